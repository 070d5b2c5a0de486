"""Reaction files to event-systems and back.

Grammar, one statement per line (``#`` starts a comment, blank lines are
ignored)::

    species: A B C                      # optional, fixes the species order
    [label:] side <-> side ; kf=RATE kr=RATE
    side  := (empty) | 0 | term (+ term)*
    term  := [COEFF] [*] NAME           # COEFF a positive integer, default 1
    NAME  := [A-Za-z][A-Za-z0-9_]*
    RATE  := integer | decimal (exponent allowed) | integer/integer

``kf`` multiplies the monomial of the left side and ``kr`` the right side.
Each reaction becomes the canonical event of its monomial pair, so writing
a reaction backwards with the rates swapped yields the same event.  Species
are indexed by the ``species:`` line if present, then by first appearance.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .core import (
    DuplicateEventError,
    EventSystem,
    EventSystemError,
    Monomial,
    canonicalize_event,
    format_rate,
)

__all__ = ["ParseError", "parse_system", "serialize_system", "load_system"]

_NAME = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")
_TERM = re.compile(r"(?:(\d+)\s*\*?\s*)?([A-Za-z][A-Za-z0-9_]*)\Z")
_RATE = re.compile(r"[+-]?(?:\d+/\d+|(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)\Z")
_RATE_SPEC = re.compile(r"(kf|kr)\s*=\s*(\S+)")


class ParseError(EventSystemError):
    """Syntax error at a 1-based line and column."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


@dataclass
class _Reaction:
    label: str | None
    lhs: dict[str, int]
    rhs: dict[str, int]
    kf: Fraction
    kr: Fraction
    line: int


def _parse_side(text: str, offset: int, lineno: int) -> dict[str, int]:
    if not text.strip() or text.strip() == "0":
        return {}
    terms: dict[str, int] = {}
    pos = 0
    for chunk in text.split("+"):
        col = offset + pos + (len(chunk) - len(chunk.lstrip())) + 1
        pos += len(chunk) + 1
        body = chunk.strip()
        if not body:
            raise ParseError("empty term", lineno, offset + pos - len(chunk))
        m = _TERM.match(body)
        if m is None:
            raise ParseError(f"malformed term {body!r}", lineno, col)
        coeff = int(m.group(1)) if m.group(1) else 1
        if coeff <= 0:
            raise ParseError(f"coefficient must be positive in {body!r}", lineno, col)
        terms[m.group(2)] = terms.get(m.group(2), 0) + coeff
    return terms


def _parse_rate(token: str, lineno: int, col: int) -> Fraction:
    if _RATE.match(token) is None:
        raise ParseError(f"malformed rate {token!r}", lineno, col)
    try:
        return Fraction(token)
    except ZeroDivisionError:
        raise ParseError(f"zero denominator in rate {token!r}", lineno, col) from None


def _parse_rates(text: str, offset: int, lineno: int) -> tuple[Fraction, Fraction]:
    rates: dict[str, Fraction] = {}
    pos = 0
    for m in _RATE_SPEC.finditer(text):
        gap = text[pos : m.start()].strip(" \t,")
        if gap:
            raise ParseError(f"unexpected {gap!r}", lineno, offset + pos + 1)
        key = m.group(1)
        if key in rates:
            raise ParseError(f"{key} given twice", lineno, offset + m.start() + 1)
        rates[key] = _parse_rate(m.group(2), lineno, offset + m.start(2) + 1)
        pos = m.end()
    tail = text[pos:].strip(" \t,")
    if tail:
        raise ParseError(f"unexpected {tail!r}", lineno, offset + pos + 1)
    for key in ("kf", "kr"):
        if key not in rates:
            raise ParseError(f"missing {key}=", lineno, offset + len(text) + 1)
    return rates["kf"], rates["kr"]


def _parse_line(line: str, lineno: int) -> _Reaction:
    arrow = line.find("<->")
    if arrow < 0:
        if "->" in line or "<-" in line:
            raise ParseError("irreversible reactions are not supported; use <->", lineno, 1)
        raise ParseError("expected '<->'", lineno, 1)
    if line.find("<->", arrow + 3) >= 0:
        raise ParseError("more than one '<->'", lineno, line.find("<->", arrow + 3) + 1)
    semi = line.find(";", arrow)
    if semi < 0:
        raise ParseError("expected ';' before the rates", lineno, len(line) + 1)

    label = None
    start = 0
    colon = line.find(":", 0, arrow)
    if colon >= 0:
        label = line[:colon].strip()
        if not _NAME.match(label):
            raise ParseError(f"malformed label {label!r}", lineno, 1)
        start = colon + 1

    lhs = _parse_side(line[start:arrow], start, lineno)
    rhs = _parse_side(line[arrow + 3 : semi], arrow + 3, lineno)
    kf, kr = _parse_rates(line[semi + 1 :], semi + 1, lineno)
    return _Reaction(label, lhs, rhs, kf, kr, lineno)


def parse_system(text: str) -> EventSystem:
    """Parse reaction text into an :class:`~evsys.core.EventSystem`.

    >>> E = parse_system("X1 + X2 <-> X3 ; kf=1/2 kr=1/3")
    >>> E.format()
    ['1/3*X3 - 1/2*X1*X2']
    """
    species: list[str] = []
    reactions: list[_Reaction] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        decl = re.match(r"\s*species\s*:", line)
        if decl:
            if reactions:
                raise ParseError("species line must precede the reactions", lineno, 1)
            for m in re.finditer(r"\S+", line[decl.end() :]):
                name = m.group()
                if not _NAME.match(name):
                    raise ParseError(f"malformed species {name!r}", lineno, decl.end() + m.start() + 1)
                if name in species:
                    raise ParseError(f"species {name} declared twice", lineno, decl.end() + m.start() + 1)
                species.append(name)
            continue
        rxn = _parse_line(line, lineno)
        for side in (rxn.lhs, rxn.rhs):
            for name in side:
                if name not in species:
                    species.append(name)
        reactions.append(rxn)

    if not reactions:
        raise ParseError("no reactions found", max(1, len(text.splitlines())), 1)

    index = {name: i for i, name in enumerate(species)}
    n = len(species)

    def monomial(side: dict[str, int]) -> Monomial:
        exps = [0] * n
        for name, k in side.items():
            exps[index[name]] = k
        return Monomial(tuple(exps))

    events = []
    for rxn in reactions:
        try:
            events.append(canonicalize_event(rxn.kf, monomial(rxn.lhs), rxn.kr, monomial(rxn.rhs)))
        except EventSystemError as exc:
            raise type(exc)(f"line {rxn.line}: {exc}") from exc

    try:
        return EventSystem(tuple(species), tuple(events), tuple(r.label for r in reactions))
    except DuplicateEventError as exc:
        raise DuplicateEventError(f"{exc} (lines {', '.join(str(r.line) for r in reactions)})") from exc


def _format_side(mon: Monomial, species) -> str:
    terms = []
    for name, k in zip(species, mon.exponents):
        if k == 1:
            terms.append(name)
        elif k > 1:
            terms.append(f"{k} {name}")
    return " + ".join(terms)


def serialize_system(E: EventSystem) -> str:
    """Reaction text that parses back to ``E`` (species order and exact rates included)."""
    lines = ["species: " + " ".join(E.species)]
    for label, e in zip(E.labels, E.events):
        lhs = _format_side(e.m_mon, E.species)
        rhs = _format_side(e.n_mon, E.species)
        prefix = f"{label}: " if label else ""
        reaction = f"{lhs} <-> {rhs}".strip()
        lines.append(f"{prefix}{reaction} ; kf={format_rate(e.sigma)} kr={format_rate(e.tau)}")
    return "\n".join(lines) + "\n"


def load_system(path) -> EventSystem:
    return parse_system(Path(path).read_text(encoding="utf-8"))

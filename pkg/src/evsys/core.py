"""Monomials, events and event-systems.

An event is a binomial ``sigma*M - tau*N`` with positive rates and ``M``
strictly preceding ``N`` in the lexicographic monomial order.  An
event-system is a finite, duplicate-free list of events over a fixed,
ordered list of species.  Rates are kept as exact :class:`~fractions.Fraction`
values; numeric routines convert them to floats through
:attr:`EventSystem.arrays`.
"""
from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from ._backend import kernels

logger = logging.getLogger(__name__)

__all__ = [
    "EventSystemError",
    "DimensionError",
    "InvalidEventError",
    "PhysicalityError",
    "DuplicateEventError",
    "Monomial",
    "Event",
    "EventSystem",
    "SystemArrays",
    "PointClass",
    "as_rate",
    "format_rate",
    "monomial_precedes",
    "canonicalize_event",
    "stoichiometric_matrix",
    "evaluate_event",
    "event_values",
    "mass_action_rhs",
    "rhs_jacobian",
    "classify_point",
]


class EventSystemError(ValueError):
    """Base class for malformed monomials, events and systems."""


class DimensionError(EventSystemError):
    pass


class InvalidEventError(EventSystemError):
    pass


class PhysicalityError(EventSystemError):
    pass


class DuplicateEventError(EventSystemError):
    pass


def as_rate(value) -> Fraction:
    """Convert ``value`` to an exact rational rate.

    Floats go through their shortest decimal representation, so ``0.1``
    becomes ``1/10`` rather than the binary expansion.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("boolean is not a rate")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if not np.isfinite(value):
            raise PhysicalityError(f"rate must be finite, got {value!r}")
        return Fraction(repr(value))
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise EventSystemError(f"not a rational rate: {value!r}") from exc
    return Fraction(value)


def format_rate(r: Fraction) -> str:
    return str(r.numerator) if r.denominator == 1 else f"{r.numerator}/{r.denominator}"


@dataclass(frozen=True)
class Monomial:
    """A monic monomial ``X1**e1 * ... * Xn**en`` stored as its exponent vector."""

    exponents: tuple[int, ...]

    def __post_init__(self):
        exps = tuple(int(e) for e in self.exponents)
        if any(e < 0 for e in exps):
            raise EventSystemError(f"negative exponent in {exps}")
        object.__setattr__(self, "exponents", exps)

    @classmethod
    def one(cls, n: int) -> "Monomial":
        return cls((0,) * n)

    @classmethod
    def variable(cls, i: int, n: int) -> "Monomial":
        exps = [0] * n
        exps[i] = 1
        return cls(tuple(exps))

    def __len__(self) -> int:
        return len(self.exponents)

    def __iter__(self):
        return iter(self.exponents)

    def __getitem__(self, i: int) -> int:
        return self.exponents[i]

    @property
    def degree(self) -> int:
        return sum(self.exponents)

    @property
    def is_one(self) -> bool:
        return not any(self.exponents)

    @property
    def support(self) -> frozenset[int]:
        return frozenset(i for i, e in enumerate(self.exponents) if e)

    def _check(self, other: "Monomial") -> None:
        if len(self) != len(other):
            raise DimensionError(f"monomial lengths differ: {len(self)} != {len(other)}")

    def divides(self, other: "Monomial") -> bool:
        self._check(other)
        return all(a <= b for a, b in zip(self.exponents, other.exponents))

    def __mul__(self, other: "Monomial") -> "Monomial":
        self._check(other)
        return Monomial(tuple(a + b for a, b in zip(self.exponents, other.exponents)))

    def __truediv__(self, other: "Monomial") -> "Monomial":
        self._check(other)
        if not other.divides(self):
            raise EventSystemError("monomial division is not exact")
        return Monomial(tuple(a - b for a, b in zip(self.exponents, other.exponents)))

    def __pow__(self, k: int) -> "Monomial":
        if k < 0:
            raise EventSystemError("negative power of a monomial")
        return Monomial(tuple(k * e for e in self.exponents))

    def evaluate(self, x):
        """Value at ``x``; exact when ``x`` holds ints or Fractions."""
        if len(x) != len(self):
            raise DimensionError(f"point has length {len(x)}, monomial has {len(self)}")
        value = 1
        for xi, e in zip(x, self.exponents):
            if e:
                value *= xi**e
        return value

    def format(self, names: Sequence[str] | None = None) -> str:
        if names is None:
            names = [f"X{i + 1}" for i in range(len(self))]
        parts = []
        for name, e in zip(names, self.exponents):
            if e == 1:
                parts.append(name)
            elif e > 1:
                parts.append(f"{name}^{e}")
        return "*".join(parts) if parts else "1"

    def __str__(self) -> str:
        return self.format()


def monomial_precedes(a: Monomial, b: Monomial) -> bool:
    """True iff ``a`` strictly precedes ``b``: at the first differing index
    the exponent of ``a`` is smaller."""
    if len(a) != len(b):
        raise DimensionError(f"monomial lengths differ: {len(a)} != {len(b)}")
    for ea, eb in zip(a.exponents, b.exponents):
        if ea != eb:
            return ea < eb
    return False


@dataclass(frozen=True)
class Event:
    """Physical event ``sigma*m_mon - tau*n_mon`` with ``m_mon`` preceding ``n_mon``.

    Use :func:`canonicalize_event` to build one from an arbitrary
    orientation; the constructor only validates.
    """

    sigma: Fraction
    m_mon: Monomial
    tau: Fraction
    n_mon: Monomial

    def __post_init__(self):
        object.__setattr__(self, "sigma", as_rate(self.sigma))
        object.__setattr__(self, "tau", as_rate(self.tau))
        if self.sigma <= 0 or self.tau <= 0:
            raise PhysicalityError(
                f"rates must be positive, got sigma={self.sigma}, tau={self.tau}"
            )
        if len(self.m_mon) != len(self.n_mon):
            raise DimensionError("event monomials have different lengths")
        if self.m_mon == self.n_mon:
            raise InvalidEventError(f"both sides are {self.m_mon}; an event needs M != N")
        if not monomial_precedes(self.m_mon, self.n_mon):
            raise InvalidEventError(
                f"{self.m_mon} does not precede {self.n_mon}; canonicalize first"
            )

    @property
    def dimension(self) -> int:
        return len(self.m_mon)

    @property
    def ratio(self) -> Fraction:
        """sigma / tau, the equilibrium constant of the event."""
        return self.sigma / self.tau

    def stoichiometry(self) -> tuple[int, ...]:
        return tuple(b - a for a, b in zip(self.m_mon.exponents, self.n_mon.exponents))

    def __call__(self, x):
        return self.sigma * self.m_mon.evaluate(x) - self.tau * self.n_mon.evaluate(x)

    def format(self, names: Sequence[str] | None = None) -> str:
        def term(rate: Fraction, mon: Monomial) -> str:
            body = mon.format(names)
            if mon.is_one:
                return format_rate(rate)
            if rate == 1:
                return body
            return f"{format_rate(rate)}*{body}"

        return f"{term(self.sigma, self.m_mon)} - {term(self.tau, self.n_mon)}"

    def __str__(self) -> str:
        return self.format()


def canonicalize_event(sigma, m: Monomial, tau, n_mon: Monomial) -> Event:
    """Build the event for ``m <-> n_mon`` with forward rate ``sigma`` on ``m``.

    The pair is swapped, rates travelling with their monomials, when
    ``n_mon`` precedes ``m``.

    >>> x1, x2 = Monomial((1, 0)), Monomial((0, 1))
    >>> str(canonicalize_event(Fraction(1, 2), x1, Fraction(1, 3), x2))
    '1/3*X2 - 1/2*X1'
    """
    sigma, tau = as_rate(sigma), as_rate(tau)
    if sigma <= 0 or tau <= 0:
        raise PhysicalityError(f"rates must be positive, got {sigma} and {tau}")
    if len(m) != len(n_mon):
        raise DimensionError("event monomials have different lengths")
    if m == n_mon:
        raise InvalidEventError(f"both sides are {m}; an event needs M != N")
    if monomial_precedes(m, n_mon):
        return Event(sigma, m, tau, n_mon)
    return Event(tau, n_mon, sigma, m)


class SystemArrays(NamedTuple):
    """Float/integer views of an event-system, laid out for the kernels."""

    sigma: np.ndarray  # (m,) float64
    tau: np.ndarray  # (m,) float64
    a: np.ndarray  # (m, n) int64 exponents of M_j
    b: np.ndarray  # (m, n) int64 exponents of N_j
    gamma: np.ndarray  # (m, n) int64, b - a


@dataclass(frozen=True)
class EventSystem:
    species: tuple[str, ...]
    events: tuple[Event, ...]
    labels: tuple[str | None, ...] = field(default=(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "species", tuple(self.species))
        object.__setattr__(self, "events", tuple(self.events))
        if not self.events:
            raise EventSystemError("an event-system needs at least one event")
        if len(set(self.species)) != len(self.species):
            raise EventSystemError(f"repeated species name in {self.species}")
        n = len(self.species)
        for e in self.events:
            if e.dimension != n:
                raise DimensionError(
                    f"event {e} has dimension {e.dimension}, system has {n} species"
                )
        seen = {}
        for j, e in enumerate(self.events):
            if e in seen:
                logger.warning("duplicate event %s (positions %d and %d)", e, seen[e], j)
                raise DuplicateEventError(
                    f"event {e.format(self.species)} occurs twice (positions {seen[e]} and {j})"
                )
            seen[e] = j
        labels = tuple(self.labels) or (None,) * len(self.events)
        if len(labels) != len(self.events):
            raise EventSystemError("labels must match events one to one")
        object.__setattr__(self, "labels", labels)

    @classmethod
    def from_events(cls, events: Iterable[Event], species: Sequence[str] | None = None):
        events = tuple(events)
        if species is None:
            if not events:
                raise EventSystemError("an event-system needs at least one event")
            species = [f"X{i + 1}" for i in range(events[0].dimension)]
        return cls(tuple(species), events)

    @property
    def dimension(self) -> int:
        return len(self.species)

    @property
    def n_events(self) -> int:
        return len(self.events)

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    @cached_property
    def arrays(self) -> SystemArrays:
        a = np.array([e.m_mon.exponents for e in self.events], dtype=np.int64)
        b = np.array([e.n_mon.exponents for e in self.events], dtype=np.int64)
        return SystemArrays(
            sigma=np.array([float(e.sigma) for e in self.events]),
            tau=np.array([float(e.tau) for e in self.events]),
            a=a,
            b=b,
            gamma=b - a,
        )

    @property
    def max_rate(self) -> float:
        arr = self.arrays
        return float(max(arr.sigma.max(), arr.tau.max()))

    def format(self) -> list[str]:
        return [e.format(self.species) for e in self.events]


class PointClass(enum.Enum):
    POSITIVE = "positive"
    NONNEGATIVE_ZPOINT = "nonnegative-z-point"
    OTHER = "other"


def _as_state(E: EventSystem, x) -> np.ndarray:
    x = np.ascontiguousarray(x, dtype=float)
    if x.shape != (E.dimension,):
        raise DimensionError(f"state has shape {x.shape}, expected ({E.dimension},)")
    return x


def stoichiometric_matrix(E: EventSystem) -> np.ndarray:
    """Integer matrix whose row ``j`` is ``exponents(N_j) - exponents(M_j)``."""
    return E.arrays.gamma.copy()


def evaluate_event(e: Event, x, exact: bool = False):
    """``sigma*M(x) - tau*N(x)``.  With ``exact=True`` the arithmetic is done
    in rationals and a :class:`Fraction` is returned."""
    if len(x) != e.dimension:
        raise DimensionError(f"state has length {len(x)}, event has dimension {e.dimension}")
    if exact:
        return e([Fraction(v) for v in x])
    return float(e.sigma) * float(e.m_mon.evaluate([float(v) for v in x])) - float(
        e.tau
    ) * float(e.n_mon.evaluate([float(v) for v in x]))


def event_values(E: EventSystem, x) -> np.ndarray:
    """Vector ``(e_1(x), ..., e_m(x))``."""
    x = _as_state(E, x)
    arr = E.arrays
    fwd = np.empty(E.n_events)
    rev = np.empty(E.n_events)
    kernels.fluxes(arr.sigma, arr.tau, arr.a, arr.b, x, fwd, rev)
    return fwd - rev


def mass_action_rhs(E: EventSystem, x, exact: bool = False):
    """The mass-action field ``P_E(x) = Gamma^T (e_1(x), ..., e_m(x))``.

    With ``exact=True`` the result is a tuple of Fractions.
    """
    if exact:
        if len(x) != E.dimension:
            raise DimensionError(f"state has length {len(x)}, expected {E.dimension}")
        xs = [Fraction(v) for v in x]
        vals = [e(xs) for e in E.events]
        gamma = E.arrays.gamma
        return tuple(
            sum((int(gamma[j, i]) * vals[j] for j in range(E.n_events)), Fraction(0))
            for i in range(E.dimension)
        )
    x = _as_state(E, x)
    arr = E.arrays
    out = np.empty(E.dimension)
    kernels.rhs(arr.sigma, arr.tau, arr.a, arr.b, arr.gamma, x, out)
    return out


def rhs_jacobian(E: EventSystem, x) -> np.ndarray:
    """Analytic Jacobian ``d P_i / d x_k`` of the mass-action field."""
    x = _as_state(E, x)
    arr = E.arrays
    out = np.empty((E.dimension, E.dimension))
    kernels.jacobian(arr.sigma, arr.tau, arr.a, arr.b, arr.gamma, x, out)
    return out


def classify_point(x) -> PointClass:
    x = np.asarray(x, dtype=float)
    if np.all(x > 0):
        return PointClass.POSITIVE
    if np.all(x >= 0):
        return PointClass.NONNEGATIVE_ZPOINT
    return PointClass.OTHER

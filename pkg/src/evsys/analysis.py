"""Structural certification of event-systems.

Naturality is decided exactly: the system admits a positive detailed-balance
point iff for every integer vector ``v`` in the left kernel of the
stoichiometric matrix the product ``prod_j (sigma_j/tau_j)**v_j`` equals 1.
A vector whose product is not 1 is an energy-cycle certificate.

Atomicity is searched for in the (infinite) monomial graph where ``T*M`` and
``T*N`` are joined for every event ``sigma*M - tau*N`` and monomial ``T``.
Searches are breadth-first under a degree and node budget, so "unknown" is a
legitimate outcome and is never reported as "not atomic".
"""
from __future__ import annotations

import enum
import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .core import Event, EventSystem, EventSystemError, Monomial, stoichiometric_matrix
from .linalg import left_kernel

__all__ = [
    "Certificate",
    "NaturalityVerdict",
    "wegscheider_check",
    "energy_cycle",
    "compute_atoms",
    "BSet",
    "compute_b_set",
    "SearchBudget",
    "default_budget",
    "SearchStatus",
    "SearchResult",
    "connected_search",
    "AtomicityStatus",
    "Violation",
    "AtomicityVerdict",
    "check_atomicity",
    "AtomicityError",
    "AtomDecomposition",
    "atomic_decomposition",
    "atom_conservation_laws",
]


# -- naturality ---------------------------------------------------------------


@dataclass(frozen=True)
class Certificate:
    vector: tuple[int, ...]
    exact_product: Fraction
    weight: float

    @property
    def is_cycle(self) -> bool:
        return self.exact_product != 1


@dataclass(frozen=True)
class NaturalityVerdict:
    natural: bool
    certificates: tuple[Certificate, ...]

    @property
    def energy_cycles(self) -> tuple[Certificate, ...]:
        return tuple(c for c in self.certificates if c.is_cycle)


def _log_ratio(r: Fraction) -> float:
    return math.log(r.numerator) - math.log(r.denominator)


def wegscheider_check(E: EventSystem) -> NaturalityVerdict:
    """Exact naturality test.

    One certificate is produced per left-kernel basis vector ``v``, carrying
    the rational product ``prod (sigma_j/tau_j)**v_j`` and its logarithm
    ``sum v_j ln(sigma_j/tau_j)``.  The system is natural iff every product
    is exactly 1.
    """
    cycles = left_kernel(stoichiometric_matrix(E))
    certs = []
    for v in cycles:
        product = Fraction(1)
        weight = 0.0
        for vj, e in zip(v, E.events):
            if vj:
                product *= e.ratio**vj
                weight += vj * _log_ratio(e.ratio)
        certs.append(Certificate(tuple(v), product, weight))
    return NaturalityVerdict(all(c.exact_product == 1 for c in certs), tuple(certs))


def energy_cycle(E: EventSystem, v: Sequence[int]) -> tuple[list[Monomial], float]:
    """Explicit closed walk in the event-graph realising an integer combination.

    Each ``v_j`` contributes ``|v_j|`` traversals of event ``j``, forwards
    (``M_j`` to ``N_j``, weight ``ln(sigma_j/tau_j)``) when positive and
    backwards otherwise.  The walk starts at the product of the monomials
    consumed first, so every vertex is a genuine monomial.  ``v`` must lie
    in the left kernel for the walk to close.
    """
    if len(v) != E.n_events:
        raise ValueError(f"vector has length {len(v)}, system has {E.n_events} events")
    steps = [(j, 1 if vj > 0 else -1) for j, vj in enumerate(v) for _ in range(abs(vj))]
    start = Monomial.one(E.dimension)
    for j, sign in steps:
        e = E.events[j]
        start = start * (e.m_mon if sign > 0 else e.n_mon)
    walk = [start]
    weight = 0.0
    for j, sign in steps:
        e = E.events[j]
        src, dst = (e.m_mon, e.n_mon) if sign > 0 else (e.n_mon, e.m_mon)
        walk.append(walk[-1] / src * dst)
        weight += sign * _log_ratio(e.ratio)
    if walk[-1] != walk[0]:
        raise ValueError("vector is not in the left kernel; the walk does not close")
    return walk, weight


# -- atoms and the B set --------------------------------------------------------


def _sides(E: EventSystem):
    for e in E.events:
        yield e.m_mon
        yield e.n_mon


def compute_atoms(E: EventSystem) -> frozenset[int]:
    """Indices of species whose connected component is the species alone.

    ``X_i`` has an edge iff some event side divides it, i.e. equals 1 or
    ``X_i``.
    """
    n = E.dimension
    blocked = set()
    for side in _sides(E):
        if side.is_one:
            return frozenset()
        if side.degree == 1:
            blocked |= side.support
    return frozenset(range(n)) - blocked


@dataclass(frozen=True)
class BSet:
    species: frozenset[int]
    has_constant_side: bool

    @property
    def criterion_applicable(self) -> bool:
        return not self.has_constant_side


def compute_b_set(E: EventSystem) -> BSet:
    """Species never appearing alone as one side of an event."""
    singles = set()
    constant = False
    for side in _sides(E):
        if side.is_one:
            constant = True
        elif side.degree == 1:
            singles |= side.support
    return BSet(frozenset(range(E.dimension)) - singles, constant)


# -- graph search -------------------------------------------------------------------


@dataclass(frozen=True)
class SearchBudget:
    max_total_degree: int
    max_nodes: int = 100_000

    def __post_init__(self):
        if self.max_total_degree < 0 or self.max_nodes <= 0:
            raise ValueError("search budget must be positive")


def default_budget(E: EventSystem, start_degree: int = 1, max_nodes: int = 100_000) -> SearchBudget:
    step = max(abs(e.n_mon.degree - e.m_mon.degree) for e in E.events)
    return SearchBudget(start_degree + 8 * step, max_nodes)


class SearchStatus(enum.Enum):
    FOUND = "found"
    EXHAUSTED = "exhausted"  # whole reachable set explored, no hit
    BUDGET = "budget"  # stopped by the degree or node budget


@dataclass(frozen=True)
class SearchResult:
    status: SearchStatus
    monomial: Monomial | None
    path: tuple[Monomial, ...]
    nodes: int
    max_degree_seen: int


def _neighbours(E: EventSystem, u: Monomial, order: Sequence[int]):
    for j in order:
        e = E.events[j]
        if e.m_mon.divides(u):
            yield u / e.m_mon * e.n_mon
        if e.n_mon.divides(u):
            yield u / e.n_mon * e.m_mon


def connected_search(
    E: EventSystem,
    start: Monomial,
    target_vars,
    budget: SearchBudget | None = None,
    event_order: Sequence[int] | None = None,
) -> SearchResult:
    """Breadth-first search for a monomial supported on ``target_vars``
    in the connected component of ``start``.

    Monomials above ``budget.max_total_degree`` are not expanded and at most
    ``budget.max_nodes`` monomials are visited.  A miss is ``EXHAUSTED`` only
    when nothing was pruned.  ``event_order`` permutes the order in which
    events generate neighbours.
    """
    if len(start) != E.dimension:
        raise ValueError(f"start has length {len(start)}, system has {E.dimension} species")
    if budget is None:
        budget = default_budget(E, start.degree)
    targets = frozenset(target_vars)
    order = list(range(E.n_events)) if event_order is None else list(event_order)

    def hit(u: Monomial) -> bool:
        return u.support <= targets

    def trace(u: Monomial) -> tuple[Monomial, ...]:
        path = [u]
        while parent[path[-1]] is not None:
            path.append(parent[path[-1]])
        return tuple(reversed(path))

    parent: dict[Monomial, Monomial | None] = {start: None}
    if hit(start):
        return SearchResult(SearchStatus.FOUND, start, (start,), 1, start.degree)
    queue = deque([start])
    pruned = False
    max_deg = start.degree
    while queue:
        u = queue.popleft()
        for w in _neighbours(E, u, order):
            if w in parent:
                continue
            if w.degree > budget.max_total_degree:
                pruned = True
                continue
            if len(parent) >= budget.max_nodes:
                return SearchResult(SearchStatus.BUDGET, None, (), len(parent), max_deg)
            parent[w] = u
            max_deg = max(max_deg, w.degree)
            if hit(w):
                return SearchResult(SearchStatus.FOUND, w, trace(w), len(parent), max_deg)
            queue.append(w)
    status = SearchStatus.BUDGET if pruned else SearchStatus.EXHAUSTED
    return SearchResult(status, None, (), len(parent), max_deg)


# -- atomicity ----------------------------------------------------------------------


class AtomicityStatus(enum.Enum):
    ATOMIC = "atomic"
    NOT_ATOMIC = "not-atomic"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class Violation:
    """Why a system is not atomic.

    Either event ``event`` maps to different witness products ``lhs`` and
    ``rhs``, or (``event`` is None) species ``species`` has no monomial over
    the B set in its fully explored component.
    """

    event: int | None
    lhs: Monomial | None
    rhs: Monomial | None
    species: int | None = None


@dataclass(frozen=True)
class AtomicityVerdict:
    status: AtomicityStatus
    atoms: frozenset[int]
    b_set: frozenset[int]
    witness: tuple[Monomial, ...] | None = None
    violation: Violation | None = None
    nodes_used: int = 0
    max_degree_used: int = 0
    note: str = ""


def _is_unit_source(E: EventSystem) -> bool:
    if E.dimension != 1 or E.n_events != 1:
        return False
    e = E.events[0]
    return e.m_mon.is_one and e.n_mon.exponents == (1,)


def _witness_product(witness: Sequence[Monomial], mon: Monomial, n: int) -> Monomial:
    out = Monomial.one(n)
    for w, k in zip(witness, mon.exponents):
        if k:
            out = out * w**k
    return out


def check_atomicity(
    E: EventSystem,
    budget: SearchBudget | None = None,
    event_order: Sequence[int] | None = None,
) -> AtomicityVerdict:
    """Decide atomicity with the B-set criterion.

    For each species a monomial over the B set is sought in its component;
    the system is atomic iff the chosen witnesses make every event balance,
    ``prod M_i**a_i == prod M_i**b_i``.  Systems with a constant event side
    fall outside the criterion and are reported unknown, except the
    single-species system ``sigma - tau*X1``, which is atomic with no atoms.
    """
    atoms = compute_atoms(E)
    bset = compute_b_set(E)
    n = E.dimension
    if bset.has_constant_side:
        if _is_unit_source(E):
            return AtomicityVerdict(
                AtomicityStatus.ATOMIC,
                atoms,
                bset.species,
                witness=(Monomial.one(1),),
                note="single event sigma - tau*X1: every monomial lies in the component of 1",
            )
        return AtomicityVerdict(
            AtomicityStatus.UNKNOWN,
            atoms,
            bset.species,
            note="an event has a constant side; the B-set criterion does not apply",
        )
    if budget is None:
        budget = default_budget(E)

    witness = []
    nodes = 0
    max_deg = 0
    for i in range(n):
        res = connected_search(E, Monomial.variable(i, n), bset.species, budget, event_order)
        nodes += res.nodes
        max_deg = max(max_deg, res.max_degree_seen)
        if res.status is SearchStatus.BUDGET:
            return AtomicityVerdict(
                AtomicityStatus.UNKNOWN,
                atoms,
                bset.species,
                nodes_used=nodes,
                max_degree_used=max_deg,
                note=f"search budget exhausted for species {E.species[i]}",
            )
        if res.status is SearchStatus.EXHAUSTED:
            return AtomicityVerdict(
                AtomicityStatus.NOT_ATOMIC,
                atoms,
                bset.species,
                violation=Violation(None, None, None, species=i),
                nodes_used=nodes,
                max_degree_used=max_deg,
                note=f"component of {E.species[i]} has no monomial over the B set",
            )
        witness.append(res.monomial)

    for j, e in enumerate(E.events):
        lhs = _witness_product(witness, e.m_mon, n)
        rhs = _witness_product(witness, e.n_mon, n)
        if lhs != rhs:
            return AtomicityVerdict(
                AtomicityStatus.NOT_ATOMIC,
                atoms,
                bset.species,
                witness=tuple(witness),
                violation=Violation(j, lhs, rhs),
                nodes_used=nodes,
                max_degree_used=max_deg,
            )
    return AtomicityVerdict(
        AtomicityStatus.ATOMIC,
        atoms,
        bset.species,
        witness=tuple(witness),
        nodes_used=nodes,
        max_degree_used=max_deg,
    )


class AtomicityError(EventSystemError):
    """Atomic decomposition requested for a system not certified atomic,
    or a decomposition search ran out of budget."""


@dataclass(frozen=True)
class AtomDecomposition:
    """Atom content ``D(X_j)`` of every species, as length-n vectors
    supported on the atoms."""

    atoms: frozenset[int]
    vectors: tuple[tuple[int, ...], ...]
    paths: tuple[tuple[Monomial, ...], ...] = field(default=(), compare=False)

    def of(self, mon: Monomial) -> tuple[int, ...]:
        """Decomposition of a composite monomial by additivity."""
        n = len(self.vectors)
        out = [0] * n
        for j, k in enumerate(mon.exponents):
            if k:
                for i in range(n):
                    out[i] += k * self.vectors[j][i]
        return tuple(out)


def atomic_decomposition(
    E: EventSystem,
    budget: SearchBudget | None = None,
    verdict: AtomicityVerdict | None = None,
) -> AtomDecomposition:
    if verdict is None:
        verdict = check_atomicity(E, budget)
    if verdict.status is not AtomicityStatus.ATOMIC:
        raise AtomicityError(f"system is {verdict.status.value}, not atomic")
    if budget is None:
        budget = default_budget(E)
    n = E.dimension
    vectors = []
    paths = []
    for j in range(n):
        res = connected_search(E, Monomial.variable(j, n), verdict.atoms, budget)
        if res.status is not SearchStatus.FOUND:
            raise AtomicityError(
                f"no atom decomposition found for {E.species[j]} ({res.status.value})"
            )
        vectors.append(res.monomial.exponents)
        paths.append(res.path)
    return AtomDecomposition(verdict.atoms, tuple(vectors), tuple(paths))


def atom_conservation_laws(
    E: EventSystem,
    budget: SearchBudget | None = None,
    decomposition: AtomDecomposition | None = None,
) -> list[tuple[int, ...]]:
    """Per-atom conservation vectors ``(D_a(X_1), ..., D_a(X_n))``, one for
    each atom ``a`` in increasing species order."""
    if decomposition is None:
        decomposition = atomic_decomposition(E, budget)
    return [
        tuple(decomposition.vectors[j][a] for j in range(E.dimension))
        for a in sorted(decomposition.atoms)
    ]

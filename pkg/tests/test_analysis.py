import math
import random
from collections import deque
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from evsys.analysis import (
    AtomicityError,
    AtomicityStatus,
    SearchBudget,
    SearchStatus,
    atom_conservation_laws,
    atomic_decomposition,
    check_atomicity,
    compute_atoms,
    compute_b_set,
    connected_search,
    default_budget,
    energy_cycle,
    wegscheider_check,
)
from evsys.core import Monomial, stoichiometric_matrix
from evsys.linalg import least_squares_solve
from evsys.parser import parse_system
from sysgen import random_atomic_system, random_natural_system, random_physical_system

LN2 = math.log(2)


def mono(*e):
    return Monomial(tuple(e))


# -- naturality -----------------------------------------------------------


def test_two_route_cycle(load):
    v = wegscheider_check(load("energy_cycle.txt"))
    assert not v.natural
    (c,) = v.certificates
    assert c.vector == (1, -1)
    assert c.exact_product == 2
    assert abs(c.weight) == pytest.approx(LN2, abs=1e-12)


def test_catalysed_cycle(load):
    v = wegscheider_check(load("catalysed_cycle.txt"))
    assert not v.natural
    assert [c.exact_product for c in v.energy_cycles] in ([2], [Fraction(1, 2)])
    assert abs(v.energy_cycles[0].weight) == pytest.approx(LN2, abs=1e-12)


def test_natural_examples(load):
    assert wegscheider_check(load("strong_equilibrium.txt")).natural
    assert wegscheider_check(load("strong_equilibrium.txt")).certificates == ()
    assert wegscheider_check(load("single_event.txt")).natural


def test_energy_cycle_walk(load):
    E = load("catalysed_cycle.txt")
    cert = wegscheider_check(E).energy_cycles[0]
    walk, weight = energy_cycle(E, cert.vector)
    assert walk[0] == walk[-1]
    assert len(walk) == sum(abs(v) for v in cert.vector) + 1
    assert weight == pytest.approx(cert.weight, abs=1e-12)
    # every step is a genuine edge T*M <-> T*N
    for u, w in zip(walk, walk[1:]):
        assert any(
            (e.m_mon.divides(u) and u / e.m_mon * e.n_mon == w) or (e.n_mon.divides(u) and u / e.n_mon * e.m_mon == w)
            for e in E.events
        )


def test_energy_cycle_rejects_non_kernel_vector(load):
    with pytest.raises(ValueError):
        energy_cycle(load("energy_cycle.txt"), (1, 0))


def _inconsistent_cycle_exists(E, degree_bound: int) -> bool:
    """Brute force: explore every monomial up to the bound and look for a
    cycle of nonzero weight by checking potential consistency."""
    n = E.dimension
    nodes = []

    def rec(prefix, left):
        if len(prefix) == n:
            nodes.append(Monomial(tuple(prefix)))
            return
        for k in range(left + 1):
            rec(prefix + [k], left - k)

    rec([], degree_bound)
    potential = {}
    for start in nodes:
        if start in potential:
            continue
        potential[start] = 0.0
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for e in E.events:
                w_fwd = math.log(e.sigma) - math.log(e.tau)
                for src, dst, w in ((e.m_mon, e.n_mon, w_fwd), (e.n_mon, e.m_mon, -w_fwd)):
                    if not src.divides(u):
                        continue
                    v = u / src * dst
                    if v.degree > degree_bound:
                        continue
                    if v in potential:
                        if abs(potential[v] - potential[u] - w) > 1e-9:
                            return True
                    else:
                        potential[v] = potential[u] + w
                        queue.append(v)
    return False


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 3), st.integers(1, 3), st.booleans())
def test_brute_force_cycle_oracle(seed, n, m, natural):
    rng = random.Random(seed)
    if natural:
        E, _ = random_natural_system(rng, n, m, max_degree=2)
    else:
        E = random_physical_system(rng, n, m, max_degree=2)
    verdict = wegscheider_check(E)
    if verdict.natural:
        assert not _inconsistent_cycle_exists(E, 5)
    else:
        walk, weight = energy_cycle(E, verdict.energy_cycles[0].vector)
        assert abs(weight) > 1e-12
        bound = max(w.degree for w in walk)
        assert _inconsistent_cycle_exists(E, bound)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 4), st.integers(1, 4), st.booleans())
def test_naturality_matches_least_squares(seed, n, m, natural):
    rng = random.Random(seed)
    if natural:
        E, _ = random_natural_system(rng, n, m)
    else:
        E = random_physical_system(rng, n, m)
    G = stoichiometric_matrix(E).astype(float)
    b = np.array([math.log(e.ratio) for e in E.events])
    _, res = least_squares_solve(G, b)
    assert wegscheider_check(E).natural == (res <= 1e-9 * (1 + np.linalg.norm(b)))


# -- atoms, B set, search -----------------------------------------------------


def test_atoms_and_b_set(load, parse):
    E = load("atomic.txt")
    assert compute_atoms(E) == {3, 4}
    assert compute_b_set(E).species == {3, 4}
    sq = load("not_atomic.txt")
    assert compute_atoms(sq) == {0, 1}
    assert compute_b_set(sq).species == {0, 1}
    src = load("inflow.txt")
    assert compute_atoms(src) == frozenset()
    assert not compute_b_set(src).criterion_applicable


def test_search_example_path(load):
    E = load("atomic.txt")
    res = connected_search(E, Monomial.variable(0, 5), {3, 4}, SearchBudget(20, 1000))
    assert res.status is SearchStatus.FOUND
    assert res.monomial == mono(0, 0, 0, 2, 2)
    assert res.path[0] == Monomial.variable(0, 5) and res.path[-1] == res.monomial
    assert len(res.path) == 4
    for u, w in zip(res.path, res.path[1:]):
        assert any(
            (e.m_mon.divides(u) and u / e.m_mon * e.n_mon == w) or (e.n_mon.divides(u) and u / e.n_mon * e.m_mon == w)
            for e in E.events
        )


def test_search_trivial_and_exhausted(load):
    E = load("atomic.txt")
    res = connected_search(E, Monomial.variable(3, 5), {3, 4})
    assert res.status is SearchStatus.FOUND and res.path == (Monomial.variable(3, 5),)
    sq = load("not_atomic.txt")
    res = connected_search(sq, Monomial.variable(0, 2), {1}, SearchBudget(10, 100))
    assert res.status is SearchStatus.EXHAUSTED and res.monomial is None
    assert res.nodes == 1


def test_search_budget_is_not_exhaustion(parse):
    # X1 <-> X1^2 X2 grows without bound and never reaches {X2}
    E = parse("species: X1 X2\nX1 <-> 2 X1 + X2 ; kf=1 kr=1")
    res = connected_search(E, Monomial.variable(0, 2), {1}, SearchBudget(6, 1000))
    assert res.status is SearchStatus.BUDGET
    res = connected_search(E, Monomial.variable(0, 2), {1}, SearchBudget(100, 5))
    assert res.status is SearchStatus.BUDGET


def test_default_budget(load):
    E = load("atomic.txt")
    assert default_budget(E).max_total_degree == 1 + 8 * 1
    assert default_budget(E).max_nodes == 100_000
    with pytest.raises(ValueError):
        SearchBudget(3, 0)


# -- atomicity ----------------------------------------------------------------


def test_not_atomic_squares(load):
    v = check_atomicity(load("not_atomic.txt"))
    assert v.status is AtomicityStatus.NOT_ATOMIC
    assert v.violation.lhs == mono(0, 2) and v.violation.rhs == mono(2, 0)


def test_atomic_example(load):
    v = check_atomicity(load("atomic.txt"))
    assert v.status is AtomicityStatus.ATOMIC
    assert v.atoms == {3, 4}
    assert v.witness == (mono(0, 0, 0, 2, 2), mono(0, 0, 0, 2, 0), mono(0, 0, 0, 0, 2), mono(0, 0, 0, 1, 0), mono(0, 0, 0, 0, 1))


def test_unit_source_special_case(load):
    v = check_atomicity(load("inflow.txt"))
    assert v.status is AtomicityStatus.ATOMIC
    assert v.atoms == frozenset()
    assert v.witness == (Monomial.one(1),)


def test_other_constant_side_unknown(parse):
    v = check_atomicity(parse("species: X1 X2\n0 <-> X1 + X2 ; kf=1 kr=1"))
    assert v.status is AtomicityStatus.UNKNOWN
    assert "constant" in v.note


def test_budget_gives_unknown(parse):
    E = parse("species: X1 X2 X3\nX1 <-> 2 X1 + X2 ; kf=1 kr=1\nX3 <-> X2 + X2 ; kf=1 kr=1")
    v = check_atomicity(E, SearchBudget(4, 1000))
    assert v.status is AtomicityStatus.UNKNOWN


def test_no_witness_is_not_atomic(load):
    v = check_atomicity(load("energy_cycle.txt"))
    assert v.status is AtomicityStatus.NOT_ATOMIC
    assert v.violation.event is None and v.violation.species == 0


def _eq1_holds(E, witness):
    n = E.dimension

    def image(mon):
        out = [0] * n
        for w, k in zip(witness, mon.exponents):
            for i in range(n):
                out[i] += k * w.exponents[i]
        return out

    return all(image(e.m_mon) == image(e.n_mon) for e in E.events)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 3), st.integers(1, 3))
def test_atomicity_soundness_and_order_independence(seed, n, m):
    rng = random.Random(seed)
    E = random_physical_system(rng, n, m, max_degree=2)
    budget = SearchBudget(8, 5000)
    v = check_atomicity(E, budget)
    if v.status is AtomicityStatus.ATOMIC and v.witness is not None and not compute_b_set(E).has_constant_side:
        assert _eq1_holds(E, v.witness)
        assert all(w.support <= v.b_set for w in v.witness)
    if v.status is AtomicityStatus.NOT_ATOMIC and v.violation.event is not None:
        assert v.violation.lhs != v.violation.rhs
    order = list(range(E.n_events))
    rng.shuffle(order)
    v2 = check_atomicity(E, budget, event_order=list(reversed(order)))
    if AtomicityStatus.UNKNOWN not in (v.status, v2.status):
        assert v.status is v2.status


@pytest.mark.parametrize("seed", range(10))
def test_generated_atomic_systems(seed):
    E, _ = random_atomic_system(random.Random(seed), n_atoms=2 + seed % 2, n_compounds=2, n_extra=2)
    v = check_atomicity(E)
    assert v.status is AtomicityStatus.ATOMIC
    assert _eq1_holds(E, v.witness)
    G = stoichiometric_matrix(E)
    for law in atom_conservation_laws(E):
        assert not np.any(G @ np.array(law))


# -- decomposition ---------------------------------------------------------------


def test_decomposition(load):
    E = load("atomic.txt")
    D = atomic_decomposition(E)
    assert D.vectors[0] == (0, 0, 0, 2, 2)
    assert D.vectors[3] == (0, 0, 0, 1, 0)
    assert D.of(mono(0, 1, 1, 0, 0)) == D.vectors[0]
    laws = atom_conservation_laws(E, decomposition=D)
    assert laws == [(2, 2, 0, 1, 0), (2, 0, 2, 0, 1)]
    G = stoichiometric_matrix(E)
    for law in laws:
        assert not np.any(G @ np.array(law))


def test_decomposition_requires_atomic(load):
    with pytest.raises(AtomicityError):
        atomic_decomposition(load("not_atomic.txt"))

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from evsys.core import (
    DimensionError,
    DuplicateEventError,
    Event,
    EventSystem,
    InvalidEventError,
    Monomial,
    PhysicalityError,
    PointClass,
    as_rate,
    canonicalize_event,
    classify_point,
    event_values,
    evaluate_event,
    mass_action_rhs,
    monomial_precedes,
    rhs_jacobian,
    stoichiometric_matrix,
)


def mono(*e):
    return Monomial(tuple(e))


class TestMonomial:
    def test_arithmetic(self):
        a, b = mono(1, 2, 0), mono(0, 1, 3)
        assert (a * b).exponents == (1, 3, 3)
        assert (a * b) / b == a
        assert (a**3).exponents == (3, 6, 0)
        assert a.degree == 3 and b.support == frozenset({1, 2})
        assert Monomial.one(3).is_one
        assert mono(0, 1, 0).divides(a) and not a.divides(b)

    def test_inexact_division(self):
        with pytest.raises(Exception):
            mono(1, 0) / mono(0, 1)

    def test_negative_exponent(self):
        with pytest.raises(Exception):
            mono(-1, 0)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            mono(1, 0) * mono(1, 0, 0)

    def test_evaluate_exact(self):
        assert mono(2, 1).evaluate([Fraction(1, 2), 3]) == Fraction(3, 4)

    def test_format(self):
        assert mono(1, 2).format() == "X1*X2^2"
        assert mono(0, 0).format() == "1"
        assert mono(0, 1).format(["A", "B"]) == "B"


class TestOrder:
    def test_first_difference_decides(self):
        # smaller exponent at the first differing index wins
        assert monomial_precedes(mono(0, 1), mono(1, 0))
        assert monomial_precedes(mono(0, 0), mono(0, 1))
        assert monomial_precedes(mono(0, 5, 3), mono(1, 0, 0))
        assert not monomial_precedes(mono(1, 0), mono(1, 0))

    @given(st.lists(st.integers(0, 3), min_size=3, max_size=3), st.lists(st.integers(0, 3), min_size=3, max_size=3))
    def test_total_strict(self, a, b):
        ma, mb = Monomial(tuple(a)), Monomial(tuple(b))
        if a == b:
            assert not monomial_precedes(ma, mb) and not monomial_precedes(mb, ma)
        else:
            assert monomial_precedes(ma, mb) != monomial_precedes(mb, ma)


class TestEvent:
    def test_canonicalize_swaps_with_rates(self):
        # 2*X1 -> X2 written with kf=2 on X1 becomes X2 - 2*X1
        e = canonicalize_event(2, mono(1, 0), 1, mono(0, 1))
        assert e.m_mon == mono(0, 1) and e.n_mon == mono(1, 0)
        assert e.sigma == 1 and e.tau == 2
        assert str(e) == "X2 - 2*X1"

    def test_canonicalize_keeps_order(self):
        e = canonicalize_event(6, mono(0, 0), 1, mono(1, 1))
        assert str(e) == "6 - X1*X2"

    def test_validation(self):
        with pytest.raises(PhysicalityError):
            canonicalize_event(0, mono(0, 1), 1, mono(1, 0))
        with pytest.raises(PhysicalityError):
            canonicalize_event(1, mono(0, 1), -2, mono(1, 0))
        with pytest.raises(InvalidEventError):
            canonicalize_event(1, mono(1, 0), 1, mono(1, 0))
        with pytest.raises(InvalidEventError):
            Event(Fraction(1), mono(1, 0), Fraction(1), mono(0, 1))

    def test_rates_are_exact(self):
        assert as_rate(0.1) == Fraction(1, 10)
        assert as_rate("3/7") == Fraction(3, 7)
        e = canonicalize_event(0.5, mono(0, 1), 500, mono(1, 0))
        assert e.sigma == Fraction(1, 2) and e.ratio == Fraction(1, 1000)

    def test_stoichiometry(self):
        # 0.5*X2^5 - 500*X1*X2^3*X7
        m = Monomial((0, 5, 0, 0, 0, 0, 0))
        n = Monomial((1, 3, 0, 0, 0, 0, 1))
        e = canonicalize_event(Fraction(1, 2), m, 500, n)
        assert e.stoichiometry() == (1, -2, 0, 0, 0, 0, 1)


class TestSystem:
    def test_duplicates_rejected(self):
        e = canonicalize_event(1, mono(0, 1), 1, mono(1, 0))
        with pytest.raises(DuplicateEventError):
            EventSystem(("X1", "X2"), (e, e))

    def test_same_pair_different_rates_allowed(self):
        e1 = canonicalize_event(2, mono(0, 1), 1, mono(1, 0))
        e2 = canonicalize_event(1, mono(0, 1), 1, mono(1, 0))
        assert EventSystem.from_events([e1, e2]).n_events == 2

    def test_empty_and_dimension(self):
        with pytest.raises(Exception):
            EventSystem(("X1",), ())
        e = canonicalize_event(1, mono(0, 1), 1, mono(1, 0))
        with pytest.raises(DimensionError):
            EventSystem(("X1", "X2", "X3"), (e,))

    def test_weak_vs_strong_equilibrium_exact(self, load):
        weak = load("weak_equilibrium.txt")
        assert mass_action_rhs(weak, [2, 3], exact=True) == (0, 0)
        assert evaluate_event(weak.events[0], [2, 3], exact=True) == 1
        strong = load("strong_equilibrium.txt")
        assert all(evaluate_event(e, [2, 3], exact=True) == 0 for e in strong.events)
        assert mass_action_rhs(strong, [2, 3], exact=True) == (0, 0)

    def test_rhs_matches_written_out_field(self, load):
        E = load("strong_equilibrium.txt")
        x1, x2 = 1.3, 0.7
        p1 = 6 - x1 * x2 + 2 * x2**2 - 9 * x1
        p2 = 6 - x1 * x2 - 4 * x2**2 + 18 * x1
        np.testing.assert_allclose(mass_action_rhs(E, [x1, x2]), [p1, p2], rtol=1e-14)
        np.testing.assert_array_equal(stoichiometric_matrix(E), [[1, 1], [1, -2]])

    def test_event_values(self, load):
        E = load("weak_equilibrium.txt")
        np.testing.assert_allclose(event_values(E, [2.0, 3.0]), [1.0, -1.0])

    def test_rhs_shape_checked(self, load):
        E = load("isomer.txt")
        with pytest.raises(DimensionError):
            mass_action_rhs(E, [1.0, 2.0, 3.0])


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.lists(st.floats(0.1, 5.0), min_size=3, max_size=3))
def test_jacobian_matches_finite_differences(seed, x):
    import random

    from sysgen import random_physical_system

    E = random_physical_system(random.Random(seed), 3, 3, max_degree=3)
    x = np.array(x)
    J = rhs_jacobian(E, x)
    h = 1e-6
    fd = np.empty_like(J)
    for k in range(3):
        dx = np.zeros(3)
        dx[k] = h
        fd[:, k] = (mass_action_rhs(E, x + dx) - mass_action_rhs(E, x - dx)) / (2 * h)
    np.testing.assert_allclose(J, fd, rtol=1e-5, atol=1e-5 * (1 + np.abs(J).max()))


def test_classify_point():
    assert classify_point([1.0, 2.0]) is PointClass.POSITIVE
    assert classify_point([0.0, 2.0]) is PointClass.NONNEGATIVE_ZPOINT
    assert classify_point([-1.0, 2.0]) is PointClass.OTHER

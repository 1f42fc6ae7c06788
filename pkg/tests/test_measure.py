from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from singular_ff.exterior import WedgeVector
from singular_ff.gf import CapExceededError, FieldSpec
from singular_ff.laurent import LaurentElement
from singular_ff.measure import (InsufficientDepthError, QuotientMatrixSpace, TruncatedRing, ValuationEvent,
                                 contraction_integral_SL, contraction_integral_U, exact_measure, log_slope,
                                 mc_measure, measure, neg_moment, truncated_neg_moment, verify_bound_D,
                                 verify_bound_E)

qs = st.sampled_from([2, 3, 4, 5, 8, 9])


@settings(max_examples=60)
@given(qs, st.integers(1, 5), st.data())
def test_truncated_ring_matches_laurent(q, k, data):
    F = FieldSpec.from_q(q)
    R = TruncatedRing(F, k)
    a, b = (data.draw(st.integers(0, R.size - 1)) for _ in range(2))
    la, lb = (LaurentElement(F, 0, R.digits(x)) for x in (a, b))
    assert R.add(a, b) == R.from_laurent((la + lb).truncate(k))
    assert R.mul(a, b) == R.from_laurent((la * lb).truncate(k))
    assert R.sub(a, b) == R.from_laurent((la - lb).truncate(k))
    assert R.val(a) == (min(la.vlow, k) if la.is_nonzero() else k)
    if R.val(a) == 0:
        assert R.mul(a, R.unit_inverse(a)) == 1
    if R.size > 1024 and q != 2:
        return
    arr_a, arr_b = np.array([a, b]), np.array([b, a])
    assert list(R.vadd(arr_a, arr_b)) == [R.add(a, b)] * 2
    assert list(R.vmul(arr_a, arr_b)) == [R.mul(a, b)] * 2
    assert list(R.vval(arr_a)) == [R.val(a), R.val(b)]


@pytest.mark.parametrize("q", [2, 3])
@pytest.mark.parametrize("d", [1, 2, 3])
def test_ball_volume(q, d):
    F = FieldSpec.from_q(q)
    for level in range(4):
        if q ** (d * level) > 1 << 24:
            continue
        assert measure(d, 1, ValuationEvent.E(level), F) == Fraction(1, q ** (d * level))


def test_known_two_by_two_value():
    F = FieldSpec.from_q(2)
    assert measure(2, 2, ValuationEvent.E(1), F) == Fraction(5, 8)
    assert measure(3, 3, ValuationEvent.E(1), F) == Fraction(43, 64)


@pytest.mark.parametrize("q,d,i,level", [(2, 2, 2, 2), (2, 3, 2, 1), (3, 2, 2, 1), (2, 3, 3, 1), (4, 2, 1, 2),
                                         (5, 2, 2, 1), (2, 3, 1, 2)])
def test_engines_agree(q, d, i, level):
    F = FieldSpec.from_q(q)
    space = QuotientMatrixSpace(d, i, level, F)
    for ev in (ValuationEvent.E(level), ValuationEvent.F(max(level - 1, 0), level)):
        a = exact_measure(space, ev, "enumerate").value
        b = exact_measure(space, ev, "fibered").value
        assert a == b


def test_cylinder_stability():
    F = FieldSpec.from_q(2)
    space = QuotientMatrixSpace(2, 2, 1, F)
    r = exact_measure(space, ValuationEvent.E(1), check_stability=True)
    assert r.value == Fraction(5, 8)


@pytest.mark.parametrize("d", [2, 3])
def test_D_product_formula(d):
    F = FieldSpec.from_q(2)
    rep = verify_bound_D(d, 1, [(0,) * d, (1, 0, 2)[:d], (2,) * d], F)
    for prof, mu, _ in rep.rows:
        expect = Fraction(1)
        for n in prof:
            expect *= Fraction(1, 2 ** n) - Fraction(1, 2 ** (n + 1))
        assert mu == expect


def test_D_profiles_partition_space():
    F = FieldSpec.from_q(2)
    space = QuotientMatrixSpace(2, 1, 2, F)
    total = sum(exact_measure(space, ValuationEvent.D((a, b))).value for a in range(2) for b in range(2))
    # profiles with entries < 2 miss exactly the event that some coordinate has valuation >= 2
    assert total == 1 - (1 - (1 - Fraction(1, 4)) ** 2)


def test_custom_event():
    F = FieldSpec.from_q(3)
    space = QuotientMatrixSpace(2, 1, 1, F)
    ev = ValuationEvent.custom(lambda v: v[(1,)] > v[(2,)], 1, "first smaller")
    assert exact_measure(space, ev).value == Fraction(2, 3) * Fraction(1, 3) * 0 + Fraction(1, 3) * Fraction(2, 3)


def test_depth_and_cap_errors():
    F = FieldSpec.from_q(2)
    with pytest.raises(InsufficientDepthError):
        exact_measure(QuotientMatrixSpace(2, 2, 1, F), ValuationEvent.E(2))
    with pytest.raises(CapExceededError):
        exact_measure(QuotientMatrixSpace(3, 3, 2, F, cap=1 << 10), ValuationEvent.D([1] * 1))
    with pytest.raises(ValueError):
        QuotientMatrixSpace(2, 3, 1, F)


@pytest.mark.parametrize("d,i,level", [(2, 1, 1), (2, 2, 1), (3, 2, 1)])
def test_monte_carlo_agrees_with_count(d, i, level):
    F = FieldSpec.from_q(2)
    space = QuotientMatrixSpace(d, i, level, F)
    ev = ValuationEvent.E(level)
    exact = float(exact_measure(space, ev).value)
    mc = mc_measure(space, ev, 3000, seed=7)
    assert abs(mc.value - exact) <= 4 * mc.stderr
    assert mc_measure(space, ev, 300, seed=7).count == mc_measure(space, ev, 300, seed=7).count


def test_bound_report_values():
    F = FieldSpec.from_q(2)
    rep = verify_bound_E(2, 2, 4, F)
    assert [r[2] for r in rep.rows] == [1, Fraction(5, 4), Fraction(11, 8), Fraction(23, 16), Fraction(47, 32)]
    assert rep.sup == Fraction(47, 32)


def test_neg_moment():
    F = FieldSpec.from_q(2)
    br = neg_moment(2, 1, 1, 20, F)
    assert br.lower <= 1.5 <= br.upper and br.upper - br.lower < 1e-3
    assert neg_moment(2, 1, 0, 5, F).lower == 1
    assert neg_moment(2, 1, 2, 5, F).diverges
    tm = truncated_neg_moment(2, 1, 2, F)
    assert tm.value == Fraction(3, 2)
    with pytest.raises(ValueError):
        truncated_neg_moment(2, 1, 0, F)


def level_set_integral(q, t):
    """Sum over val(s) = j of |g_t u_s e_2|^{-1}: the norm is max(q^{t-j}, q^{-t})."""
    q = Fraction(q)
    total = sum(((1 - 1 / q) * q ** -j * q ** (j - t) for j in range(2 * t + 1)), Fraction(0))
    return total + q ** (-2 * t - 1) * q ** t


@pytest.mark.parametrize("q,t", [(2, 1), (2, 2), (2, 3), (3, 1), (3, 2)])
def test_contraction_integral_exact(q, t):
    F = FieldSpec.from_q(q)
    v = WedgeVector.basis(F, 2, (2,))
    res = contraction_integral_U(1, 1, t, v, 0, 0, exact=True)
    assert res.value == level_set_integral(q, t)
    if q == 2:
        assert res.value == Fraction(t + 1, 2 ** t)


def test_contraction_monte_carlo():
    F = FieldSpec.from_q(3)
    v = WedgeVector.basis(F, 2, (2,))
    exact = contraction_integral_U(1, 1, 1, v, 0, 0, exact=True).value
    assert exact == Fraction(7, 9)
    mc = contraction_integral_U(1, 1, 1, v, 2000, seed=3)
    assert abs(mc.value - float(exact)) <= 4 * mc.stderr
    e1 = WedgeVector.basis(F, 2, (1,))
    sl = contraction_integral_SL(1, 1, 1, e1, 200, seed=3)
    assert sl.value > 0
    with pytest.raises(ValueError):
        contraction_integral_SL(1, 1, 1, WedgeVector.basis(F, 3, (1, 2)), 10, 0)


def test_log_slope():
    assert log_slope([1, 2, 3], [2, 4, 8], 2) == pytest.approx(1.0)
    assert log_slope([0, 1], [1, 1 / 9], 3) == pytest.approx(-2.0)

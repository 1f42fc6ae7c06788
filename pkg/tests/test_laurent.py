import pytest
from hypothesis import given, settings, strategies as st

from singular_ff import poly
from singular_ff.contfrac import convergents, from_partial_quotients, partial_quotients, periodic, polynomial_part
from singular_ff.gf import FieldSpec
from singular_ff.laurent import LaurentElement, PrecisionError, format_laurent, lift_rational, parse_laurent

fields = st.sampled_from([2, 3, 4, 5, 9]).map(FieldSpec.from_q)


@st.composite
def elements(draw, F, exact=True):
    v0 = draw(st.integers(-4, 4))
    coeffs = draw(st.lists(st.integers(0, F.q - 1), max_size=6))
    prec = None if exact else draw(st.integers(v0 + len(coeffs), v0 + len(coeffs) + 5))
    return LaurentElement(F, v0, coeffs, prec)


@st.composite
def field_and(draw, k=3, exact=True):
    F = draw(fields)
    return F, [draw(elements(F, exact)) for _ in range(k)]


@given(field_and())
def test_exact_ring_axioms(data):
    F, (a, b, c) = data
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a - a == LaurentElement.zero(F)


@given(field_and(2))
def test_absolute_value_is_multiplicative_and_ultrametric(data):
    F, (a, b) = data
    assert (a * b).abs() == a.abs() * b.abs()
    assert (a + b).abs() <= max(a.abs(), b.abs())
    if a.abs() != b.abs():
        assert (a + b).abs() == max(a.abs(), b.abs())


@given(field_and(1))
def test_inverse(data):
    F, (a,) = data
    if not a.is_nonzero():
        return
    inv = a.inv(20)
    prod = a * inv
    assert prod.agrees_with(LaurentElement.one(F))
    assert inv.abs() == 1 / a.abs()


@given(field_and(2, exact=False))
def test_precision_propagates(data):
    F, (a, b) = data
    s = a + b
    assert s.prec == min(a.prec, b.prec)
    p = a * b
    if a.is_nonzero() and b.is_nonzero():
        assert p.prec == min(a.prec + b.v0, b.prec + a.v0)


@given(field_and(1))
def test_text_round_trip(data):
    F, (a,) = data
    assert parse_laurent(format_laurent(a), F) == a


def test_parse_forms():
    F = FieldSpec.from_q(3)
    assert parse_laurent("T^2 + 2*T", F) == LaurentElement.from_T_poly(F, [0, 2, 1])
    x = parse_laurent("1 + pi + O(pi^4)", F)
    assert x.prec == 4 and x.coefficient(1) == 1
    with pytest.raises(PrecisionError):
        x.coefficient(4)


def test_zero_to_precision_has_no_norm():
    F = FieldSpec.from_q(2)
    z = LaurentElement(F, 0, [], 5)
    with pytest.raises(PrecisionError):
        z.abs()
    assert z.abs(upper_bound=True) == pytest.approx(2 ** -5)
    assert z.valuation().lower_bound


def test_lift_rational():
    F = FieldSpec.from_q(3)
    # 1/(T+1) = pi - pi^2 + pi^3 - ...
    x = lift_rational([1], [1, 1], 6, F)
    assert [x.coefficient(j) for j in range(1, 6)] == [1, 2, 1, 2, 1]
    assert x.prec == 6
    assert lift_rational([0, 0, 1], [0, 1], 6, F) == LaurentElement.from_T_poly(F, [0, 1])
    assert lift_rational([1], [0, 0, 2], 6, F).prec is None
    with pytest.raises(ZeroDivisionError):
        lift_rational([1], [0], 4, F)


@settings(max_examples=40)
@given(st.sampled_from([2, 3, 5]),
       st.lists(st.lists(st.integers(0, 4), min_size=2, max_size=3), min_size=2, max_size=5))
def test_continued_fraction_round_trip(q, raw):
    F = FieldSpec.from_q(q)
    pqs = [poly.trim([c % q for c in a]) for a in raw]
    pqs = [pqs[0]] + [a if poly.deg(a) >= 1 else (0, 1) for a in pqs[1:]]
    x = from_partial_quotients(pqs, F, 60)
    got = partial_quotients(x, len(pqs))
    assert [poly.trim(a) for a in got] == pqs


def test_convergent_determinant():
    F = FieldSpec.from_q(3)
    conv = convergents(F, [(1, 1), (0, 1), (2, 0, 1), (1, 2)])
    for (P0, Q0), (P1, Q1) in zip(conv, conv[1:]):
        det = poly.sub(F, poly.mul(F, P1, Q0), poly.mul(F, P0, Q1))
        assert poly.deg(det) == 0


def test_periodic_continued_fraction_is_quadratic():
    F = FieldSpec.from_q(2)
    x = periodic([(0, 1)], F, 40, head=[(0, 1)])
    assert x.prec == 40  # a monomial convergent denominator must not make it exact
    # x = [T; T, T, ...] satisfies x^2 + T x + 1 = 0 over F_2
    T = LaurentElement.from_T_poly(F, [0, 1])
    r = x * x + T * x + LaurentElement.one(F)
    assert all(r.coefficient(j) == 0 for j in range(-2, r.prec))
    assert polynomial_part(x) == (0, 1)

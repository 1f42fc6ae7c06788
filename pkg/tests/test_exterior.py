import random

import pytest
from hypothesis import given, settings, strategies as st

from singular_ff.exterior import (KMatrix, ShapeError, WedgeVector, compound, exterior_action, hodge_dual,
                                  jacobi_sides, minor, pu_factor, subsets, sup_norm, wedge)
from singular_ff.flow import FlowSpec, duality_flow_check, flow_matrix, horospherical
from singular_ff.gf import FieldSpec
from singular_ff.laurent import LaurentElement
from singular_ff.sampling import elementary, random_laurent_poly, random_SL_K

seeds = st.integers(0, 2 ** 32 - 1)
qs = st.sampled_from([2, 3, 4, 5])


def random_wedge(F, d, i, rng):
    return WedgeVector(F, d, i, {I: random_laurent_poly(F, rng, -2, 2) for I in subsets(d, i)})


def random_matrix(F, r, c, rng):
    return KMatrix(F, [[random_laurent_poly(F, rng, -1, 2) for _ in range(c)] for _ in range(r)])


@settings(max_examples=40)
@given(qs, seeds, st.integers(2, 4))
def test_wedge_of_columns_is_determinant(q, seed, d):
    F = FieldSpec.from_q(q)
    g = random_matrix(F, d, d, random.Random(seed))
    w = wedge(g.columns())
    assert w[tuple(range(1, d + 1))] == g.det()


@settings(max_examples=40)
@given(qs, seeds)
def test_wedge_is_alternating(q, seed):
    F = FieldSpec.from_q(q)
    rng = random.Random(seed)
    cols = random_matrix(F, 4, 3, rng).columns()
    w = wedge(cols)
    assert wedge([cols[1], cols[0], cols[2]]) == -w
    assert all(x.is_zero() for x in wedge([cols[0], cols[1], cols[0]]).coords.values())


@settings(max_examples=30)
@given(qs, seeds, st.integers(2, 4), st.data())
def test_exterior_action_is_functorial(q, seed, d, data):
    F = FieldSpec.from_q(q)
    rng = random.Random(seed)
    i = data.draw(st.integers(1, d))
    g, h = random_matrix(F, d, d, rng), random_matrix(F, d, d, rng)
    v = random_wedge(F, d, i, rng)
    assert exterior_action(g @ h, v) == exterior_action(g, exterior_action(h, v))


@settings(max_examples=30)
@given(qs, seeds)
def test_compound_entries_are_minors(q, seed):
    F = FieldSpec.from_q(q)
    g = random_matrix(F, 4, 4, random.Random(seed))
    comp = compound(g, 2)
    for I in subsets(4, 2):
        for J in subsets(4, 2):
            assert comp[I][J] == minor(g, J, I)


@settings(max_examples=60)
@given(qs, seeds, st.integers(2, 4), st.data())
def test_hodge_norm_and_equivariance(q, seed, d, data):
    F = FieldSpec.from_q(q)
    rng = random.Random(seed)
    i = data.draw(st.integers(1, d - 1))
    v = random_wedge(F, d, i, rng)
    g = random_SL_K(F, d, rng, steps=3)
    star = hodge_dual(v)
    assert star.i == d - i
    assert sup_norm(star) == sup_norm(v)
    assert hodge_dual(exterior_action(g, v)) == exterior_action(g.inverse().transpose(), star)
    back = hodge_dual(star)
    assert back == (v if F.sign(i * (d - i)) == 1 else -v)


def test_hodge_fails_without_contragredient():
    F = FieldSpec.from_q(3)
    A = KMatrix.from_ints(F, [[1, 1], [0, 1]])
    e1 = WedgeVector.basis(F, 2, (1,))
    assert hodge_dual(exterior_action(A, e1)) != exterior_action(A, hodge_dual(e1))


@settings(max_examples=40)
@given(st.sampled_from([2, 3]), seeds, st.data())
def test_jacobi_complementary_minors(q, seed, data):
    F = FieldSpec.from_q(q)
    rng = random.Random(seed)
    g = random_SL_K(F, 4, rng, steps=4)
    i = data.draw(st.integers(1, 3))
    I = data.draw(st.sampled_from(subsets(4, i)))
    J = data.draw(st.sampled_from(subsets(4, i)))
    lhs, rhs = jacobi_sides(g, J, I)
    assert lhs == rhs


@settings(max_examples=30)
@given(qs, seeds)
def test_pu_factorisation(q, seed):
    F = FieldSpec.from_q(q)
    rng = random.Random(seed)
    x = KMatrix.identity(F, 3)
    for _ in range(4):
        r, c = rng.sample(range(3), 2)
        x = x @ elementary(F, 3, r, c, random_laurent_poly(F, rng, 1, 3))
    p, u = pu_factor(x, 2, 1)
    assert (p @ u).agrees_with(x)
    assert all(u[r, c].is_zero() for r in range(2, 3) for c in range(2))
    assert all(p[r, c].is_zero() for r in range(2) for c in range(2, 3))


def test_pu_factor_rejects_non_congruent():
    F = FieldSpec.from_q(2)
    with pytest.raises(ValueError):
        pu_factor(KMatrix.from_ints(F, [[1, 1], [0, 1]]), 1, 1)


@settings(max_examples=30)
@given(qs, seeds, st.sampled_from([(1, 1), (1, 2), (2, 1), (2, 2)]), st.integers(1, 3), st.data())
def test_flow_conjugates_horospherical(q, seed, mn, tau, data):
    m, n = mn
    F = FieldSpec.from_q(q)
    rng = random.Random(seed)
    s = random_matrix(F, m, n, rng)
    spec = FlowSpec(m, n, tau)
    g = flow_matrix(spec, F)
    ginv = flow_matrix(spec, F, -tau)
    lhs = g @ horospherical(s) @ ginv
    assert lhs == horospherical(s.scale(LaurentElement.pi_power(F, -(m + n) * tau)))
    w = random_wedge(F, m + n, data.draw(st.integers(1, m + n - 1)), rng)
    assert duality_flow_check(w, random_matrix(F, n, m, rng), spec)


def test_shape_errors():
    F = FieldSpec.from_q(2)
    with pytest.raises(ShapeError):
        exterior_action(KMatrix.identity(F, 3), WedgeVector.basis(F, 2, (1,)))
    with pytest.raises(ShapeError):
        wedge([[LaurentElement.one(F)]] * 2)

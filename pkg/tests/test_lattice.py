import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_lattice, random_T_poly
from singular_ff.exterior import KMatrix
from singular_ff.flow import FlowSpec, flow_matrix
from singular_ff.gf import FieldSpec
from singular_ff.laurent import LaurentElement
from singular_ff.lattice import (PolyLattice, SaturationError, alphas, covolume, greedy_minima_oracle,
                                 is_saturated, minima_by_ball_dimension, saturate, shortest_vector_oracle,
                                 subspace_intersection, subspace_norm, subspace_sum, successive_minima)
from singular_ff.sampling import random_SL_K

seeds = st.integers(0, 2 ** 32 - 1)


def random_subspace(x, k, rng, deg=2):
    F = x.field
    coeffs = KMatrix(F, [[random_T_poly(F, rng, deg) for _ in range(k)] for _ in range(x.d)])
    return saturate(x, x.basis @ coeffs, allow_dependent=True)


@settings(max_examples=60)
@given(st.sampled_from([2, 3]), seeds, st.integers(1, 3))
def test_minima_agree_with_both_oracles(q, seed, d):
    F = FieldSpec.from_q(q)
    x = random_lattice(F, d, 3 if q == 2 else 2, random.Random(seed))
    lam = successive_minima(x)
    assert lam == sorted(lam)
    assert greedy_minima_oracle(x) == lam
    assert minima_by_ball_dimension(x) == lam


@settings(max_examples=60)
@given(st.sampled_from([2, 3, 4]), seeds, st.integers(1, 3))
def test_minima_product_is_determinant(q, seed, d):
    F = FieldSpec.from_q(q)
    x = random_lattice(F, d, 3, random.Random(seed))
    prod = Fraction(1)
    for lam in successive_minima(x):
        prod *= lam
    assert prod == x.basis.det().abs()
    al = alphas(x)
    assert al[0] == 1 and al[-1] == 1 / prod


@settings(max_examples=20)
@given(st.sampled_from([2, 3]), seeds)
def test_shortest_vector(q, seed):
    F = FieldSpec.from_q(q)
    x = random_lattice(F, 2, 1, random.Random(seed))
    _, best = shortest_vector_oracle(x, 3 if q == 2 else 2)
    assert best == successive_minima(x)[0]


@settings(max_examples=30)
@given(st.sampled_from([2, 3]), seeds)
def test_transform_scales_covolume(q, seed):
    F = FieldSpec.from_q(q)
    rng = random.Random(seed)
    x = random_lattice(F, 3, 2, rng)
    g = random_SL_K(F, 3, rng, steps=3)
    assert covolume(x.transform(g)) == covolume(x)
    y = x.transform(flow_matrix(FlowSpec(2, 1, 1), F))
    assert covolume(y) == covolume(x)


@settings(max_examples=80, deadline=None)
@given(st.sampled_from([2, 3]), seeds, st.integers(2, 3), st.data())
def test_subspace_norm_submodular(q, seed, d, data):
    F = FieldSpec.from_q(q)
    rng = random.Random(seed)
    x = random_lattice(F, d, 2, rng)
    L1 = random_subspace(x, data.draw(st.integers(1, d)), rng)
    L2 = random_subspace(x, data.draw(st.integers(1, d)), rng)
    S, I = subspace_sum(L1, L2), subspace_intersection(L1, L2)
    assert S.i + I.i == L1.i + L2.i
    assert subspace_norm(x, S) * subspace_norm(x, I) <= subspace_norm(x, L1) * subspace_norm(x, L2)


def test_unsaturated_generators_rejected():
    F = FieldSpec.from_q(3)
    x = PolyLattice.standard(F, 2)
    v = KMatrix(F, [[LaurentElement.from_T_poly(F, [0, 1])], [LaurentElement.zero(F)]])  # (T, 0)
    assert not is_saturated(x, v)
    with pytest.raises(SaturationError):
        subspace_norm(x, v)
    assert subspace_norm(x, v, auto_saturate=True) == 1


def test_standard_lattice():
    F = FieldSpec.from_q(5)
    x = PolyLattice.standard(F, 4)
    assert successive_minima(x) == [1, 1, 1, 1]
    assert covolume(x) == Fraction(1, 5 ** 4)

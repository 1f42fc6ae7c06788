import random
from collections import Counter

import pytest

from singular_ff.gf import FieldSpec
from singular_ff.laurent import LaurentElement
from singular_ff.sampling import (random_GL_O_exact, random_SL_O_exact, sample_GL_O, sample_O_matrix,
                                  sample_SL_O)
from singular_ff.seeding import chunk_ranges, parallel_map, trial_rng, trial_seed


def square(x):
    return x * x


def test_seeds_are_stable_and_separated():
    assert trial_seed(1, 2, "a") == trial_seed(1, 2, "a")
    assert len({trial_seed(1, i, s) for i in range(50) for s in ("a", "b")}) == 100
    assert trial_rng(3, 4).random() == trial_rng(3, 4).random()


@pytest.mark.parametrize("total,chunks", [(0, 3), (10, 3), (7, 7), (5, 9)])
def test_chunk_ranges_partition(total, chunks):
    rs = chunk_ranges(total, chunks)
    covered = [i for a, b in rs for i in range(a, b)]
    assert covered == list(range(total))


def test_parallel_map_preserves_order():
    items = list(range(20))
    assert parallel_map(square, items, 1) == parallel_map(square, items, 3) == [i * i for i in items]


def test_O_matrix_reproducible():
    F = FieldSpec.from_q(3)
    assert sample_O_matrix(F, 2, 2, 5, 11, 3) == sample_O_matrix(F, 2, 2, 5, 11, 3)
    assert all(x.prec == 5 and x.vlow >= 0 for row in sample_O_matrix(F, 2, 3, 5, 1).entries for x in row)


def test_GL_rejection_rate():
    F = FieldSpec.from_q(2)
    rng = random.Random(0)
    draws = sum(sample_GL_O(F, 2, 3, rng)[1] for _ in range(3000))
    # acceptance probability |GL_2(F_2)| / 16 = 6/16
    assert abs(3000 / draws - 6 / 16) < 0.03


def test_SL_samples():
    F = FieldSpec.from_q(2)
    one = LaurentElement.one(F)
    residues = Counter()
    for idx in range(1200):
        g = sample_SL_O(F, 2, 6, seed=4, index=idx)
        assert g.det().agrees_with(one)
        residues[tuple(x.coefficient(0) for row in g.entries for x in row)] += 1
    assert len(residues) == 6  # |SL_2(F_2)|
    assert max(residues.values()) / min(residues.values()) < 1.5


@pytest.mark.parametrize("q", [2, 3, 4])
def test_exact_generators(q):
    F = FieldSpec.from_q(q)
    rng = random.Random(q)
    for _ in range(20):
        g = random_SL_O_exact(F, 3, rng)
        assert g.det() == LaurentElement.one(F)
        h = random_GL_O_exact(F, 3, rng)
        assert h.det().vlow == 0 and all(x.vlow >= 0 for row in h.entries for x in row)

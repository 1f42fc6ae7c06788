"""Random elements of O, M_{d1,d2}(O), SL_d(O) and SL_d(K) with exact or
precision-tracked entries."""
from __future__ import annotations

import random

from .exterior import KMatrix
from .gf import FieldSpec
from .laurent import LaurentElement
from .seeding import trial_rng


def random_coeffs(field: FieldSpec, k: int, rng: random.Random) -> list[int]:
    if field.q == 2:
        bits = rng.getrandbits(k) if k else 0
        return [(bits >> j) & 1 for j in range(k)]
    return [rng.randrange(field.q) for _ in range(k)]


def random_O(field: FieldSpec, k: int, rng: random.Random, exact: bool = False) -> LaurentElement:
    """Uniform element of O known modulo pi^k (or its exact truncation)."""
    return LaurentElement(field, 0, random_coeffs(field, k, rng), None if exact else k)


def random_O_matrix(field: FieldSpec, d1: int, d2: int, k: int, rng: random.Random,
                    exact: bool = False) -> KMatrix:
    return KMatrix(field, [[random_O(field, k, rng, exact) for _ in range(d2)] for _ in range(d1)])


def sample_O_matrix(field: FieldSpec, d1: int, d2: int, k: int, seed: int, index: int = 0) -> KMatrix:
    """Haar-random matrix over O with PRECISION(k) entries, deterministic per (seed, index)."""
    return random_O_matrix(field, d1, d2, k, trial_rng(seed, index, "O"))


def sample_cylinder(field: FieldSpec, m: int, n: int, depth: int, rng: random.Random) -> KMatrix:
    """Polynomial representative (degree < depth in pi) of a uniform depth-`depth` cylinder."""
    return random_O_matrix(field, m, n, depth, rng, exact=True)


def _det_mod_pi_nonzero(field: FieldSpec, g: KMatrix) -> bool:
    from .lattice import _fq_rank

    rows = [[x.coefficient(0) for x in row] for row in g.entries]
    return _fq_rank(field, rows) == g.rows


def sample_GL_O(field: FieldSpec, d: int, k: int, rng: random.Random) -> tuple[KMatrix, int]:
    """Uniform element of GL_d(O) by rejection; also returns the number of draws."""
    draws = 0
    while True:
        draws += 1
        g = random_O_matrix(field, d, d, k, rng)
        if _det_mod_pi_nonzero(field, g):
            return g, draws


def sample_SL_O(field: FieldSpec, d: int, k: int, seed: int, index: int = 0) -> KMatrix:
    """Haar-random element of SL_d(O) to precision k.

    A uniform g in GL_d(O) is right-multiplied by diag(det(g)^-1, 1, ..., 1);
    the map is left-equivariant, so Haar measure is carried to Haar measure.
    """
    return sl_from_rng(field, d, k, trial_rng(seed, index, "SL"))


def sl_from_rng(field: FieldSpec, d: int, k: int, rng: random.Random) -> KMatrix:
    g, _ = sample_GL_O(field, d, k, rng)
    u = g.det().inv(k)
    rows = [list(r) for r in g.entries]
    for r in range(d):
        rows[r][0] = rows[r][0] * u
    return KMatrix(field, rows)


def random_laurent_poly(field: FieldSpec, rng: random.Random, lo: int, hi: int,
                        density: float = 0.5) -> LaurentElement:
    """Exact element with random coefficients on pi^lo .. pi^hi."""
    coeffs = [rng.randrange(field.q) if rng.random() < density else 0 for _ in range(hi - lo + 1)]
    return LaurentElement(field, lo, coeffs)


def elementary(field: FieldSpec, d: int, r: int, c: int, x: LaurentElement) -> KMatrix:
    rows = [list(row) for row in KMatrix.identity(field, d).entries]
    rows[r][c] = x
    return KMatrix(field, rows)


def random_SL_K(field: FieldSpec, d: int, rng: random.Random, steps: int = 4,
                lo: int = -2, hi: int = 2) -> KMatrix:
    """Exact element of SL_d(K): product of transvections and diagonal torus elements."""
    g = KMatrix.identity(field, d)
    for _ in range(steps):
        r, c = rng.sample(range(d), 2)
        g = g @ elementary(field, d, r, c, random_laurent_poly(field, rng, lo, hi))
        if rng.random() < 0.3:
            a, b = rng.sample(range(d), 2)
            j = rng.randint(-1, 1)
            c0 = rng.randrange(1, field.q)
            diag = [LaurentElement.one(field)] * d
            diag[a] = LaurentElement.monomial(field, c0, j)
            diag[b] = LaurentElement.monomial(field, field.inv_table[c0], -j)
            g = g @ KMatrix.diag(field, diag)
    return g


def random_SL_O_exact(field: FieldSpec, d: int, rng: random.Random, steps: int = 4, deg: int = 3) -> KMatrix:
    """Exact element of SL_d(O) with entries in F_q[pi]."""
    g = KMatrix.identity(field, d)
    for _ in range(steps):
        r, c = rng.sample(range(d), 2)
        g = g @ elementary(field, d, r, c, random_laurent_poly(field, rng, 0, deg))
        if rng.random() < 0.3 and field.q > 2:
            a, b = rng.sample(range(d), 2)
            c0 = rng.randrange(1, field.q)
            diag = [LaurentElement.one(field)] * d
            diag[a] = LaurentElement.const(field, c0)
            diag[b] = LaurentElement.const(field, field.inv_table[c0])
            g = g @ KMatrix.diag(field, diag)
    return g


def random_GL_O_exact(field: FieldSpec, d: int, rng: random.Random, steps: int = 4, deg: int = 3) -> KMatrix:
    """Exact element of GL_d(O): an SL_d(O) element times a unit-constant diagonal."""
    g = random_SL_O_exact(field, d, rng, steps, deg)
    c0 = rng.randrange(1, field.q)
    diag = [LaurentElement.one(field)] * d
    diag[0] = LaurentElement.const(field, c0)
    return g @ KMatrix.diag(field, diag)

"""Orbits of g_t u_s on lattices: trajectories, Dani scans, escape statistics,
exact cylinder coverings and box-dimension slopes."""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from functools import lru_cache
from itertools import product

from . import poly
from .contfrac import polynomial_part
from .exterior import KMatrix
from .flow import (FlowSpec, composed_flow, duality_flow_check, flow_matrix,  # noqa: F401  (re-exported)
                   horospherical, lower_horospherical, phi_combine, swap_matrix)
from .gf import CapExceededError, FieldSpec
from .laurent import LaurentElement, PrecisionError
from .lattice import PolyLattice
from .lattice import alphas as lattice_alphas
from .margulis import (MargulisParams, OrbitTree, alpha_tilde, alpha_tilde_from_alphas, block_count,
                       block_from_code, block_size, random_key, step_lattice)
from .measure import MONTE_CARLO, MeasureResult
from .seeding import parallel_map, trial_rng

DEFAULT_COVER_CAP = 1 << 22
DIVERGENCE_WINDOW = 5


def _params(spec: FlowSpec, params: MargulisParams | None) -> MargulisParams:
    if params is None:
        return MargulisParams(spec.m, spec.n, spec.t)
    return params.with_t(spec.t)


def default_M(x: PolyLattice, params: MargulisParams) -> float:
    """alpha-tilde of the standard lattice: the default compact-set threshold."""
    return alpha_tilde(PolyLattice.standard(x.field, x.d), params)


# ---------------------------------------------------------------------------
# trajectories


@dataclass
class TrajectoryStep:
    step: int
    alphas: tuple
    alpha_tilde: float
    in_compact: bool


@dataclass
class TrajectoryRecord:
    spec: FlowSpec
    M: float
    steps: list = dc_field(default_factory=list)

    @property
    def heights(self) -> list[float]:
        return [st.alpha_tilde for st in self.steps]

    def diverges(self, M_div: float, window: int = DIVERGENCE_WINDOW) -> bool:
        """Final height above M_div and nondecreasing over the last `window` steps."""
        h = self.heights
        if not h or h[-1] <= M_div:
            return False
        tail = h[-window:]
        return all(a <= b for a, b in zip(tail, tail[1:]))

    def max_height(self) -> float:
        return max(self.heights) if self.steps else 0.0


def split_s(s: KMatrix, spec: FlowSpec, N: int) -> tuple[KMatrix, list[int]]:
    """s = (Laurent polynomial part with pi-exponents < 0) + sum_l pi^{l(m+n)t} r_l.

    Returns the first part and the codes of r_0..r_{N-1}; raises when s is
    not known to pi-depth (m+n)tN.
    """
    F = s.field
    depth = block_size(spec)
    need = depth * N
    q = F.q
    neg_rows = []
    codes = [0] * N
    for r in range(spec.m):
        row = []
        for c in range(spec.n):
            x = s[r, c]
            if x.prec is not None and x.prec < need:
                raise PrecisionError(f"s needs precision at least {need} for {N} steps of t={spec.t}; "
                                     f"entry ({r + 1},{c + 1}) has {x.prec}")
            lo = min(x.v0, 0) if x.is_nonzero() else 0
            row.append(LaurentElement(F, lo, [x.coefficient(j) for j in range(lo, 0)]))
            for blk in range(N):
                for j in range(depth):
                    coeff = x.coefficient(blk * depth + j)
                    if coeff:
                        pos = (r * spec.n + c) * depth + j
                        codes[blk] += coeff * q ** pos
        neg_rows.append(row)
    return KMatrix(F, neg_rows), codes


def trajectory(x0: PolyLattice, s: KMatrix, spec: FlowSpec, N: int, M: float | None = None,
               params: MargulisParams | None = None) -> TrajectoryRecord:
    """Heights of g_{lt} u_s x0 for l = 1..N."""
    if (s.rows, s.cols) != (spec.m, spec.n):
        raise ValueError("s has the wrong shape")
    params = _params(spec, params)
    M = default_M(x0, params) if M is None else M
    head, codes = split_s(s, spec, N)
    start = x0.transform(horospherical(head)).reduced()
    tree = OrbitTree(start, params)
    rec = TrajectoryRecord(spec, M)
    for ell in range(1, N + 1):
        key = tuple(codes[:ell])
        h = tree.alpha_tilde(key)
        rec.steps.append(TrajectoryStep(ell, tree.alphas(key), h, h <= M))
    return rec


def escape_fraction(record: TrajectoryRecord, delta) -> tuple[bool, Fraction]:
    """Fraction of recorded steps outside the compact set, and whether it reaches delta."""
    if not record.steps:
        return True, Fraction(0)
    out = sum(1 for st in record.steps if not st.in_compact)
    frac = Fraction(out, len(record.steps))
    return frac >= Fraction(delta), frac


# ---------------------------------------------------------------------------
# Dani scan


@dataclass
class DaniWitness:
    T_exponent: int
    p: tuple
    q_vec: tuple
    defect: Fraction
    defect_is_bound: bool
    threshold: Fraction
    passes: bool


def _defect(s: KMatrix, qv, F: FieldSpec):
    """(p, log_q-defect or None, precision bound) for s q + p with p the negated polynomial part."""
    ps = []
    worst = None
    bound = None
    for r in range(s.rows):
        y = LaurentElement.zero(F)
        for c, qc in enumerate(qv):
            if qc:
                y = y + s[r, c] * LaurentElement.from_T_poly(F, qc)
        part = polynomial_part(y)
        ps.append(poly.neg(F, part))
        frac = y - LaurentElement.from_T_poly(F, part)
        if frac.is_nonzero():
            e = -frac.v0
            worst = e if worst is None else max(worst, e)
        elif frac.prec is not None:
            b = -frac.prec
            bound = b if bound is None else max(bound, b)
    return tuple(ps), worst, bound


def dani_scan(s: KMatrix, eps_exponent: int, T_max_exponent: int, cap: int = 1 << 16) -> list[DaniWitness]:
    """Best approximation defect ||s q + p|| over 0 < ||q|| <= T, for T = q^1 .. q^T_max_exponent.

    Passes at T when the defect is at most eps T^{-n/m}, eps = q^eps_exponent.
    """
    F = s.field
    m, n = s.rows, s.cols
    K = T_max_exponent
    total = F.q ** (n * (K + 1))
    if total > cap:
        raise CapExceededError(f"{total} candidate denominators exceed the cap {cap}")
    best_by_deg: dict = {}
    for digits in product(range(F.q), repeat=n * (K + 1)):
        if not any(digits):
            continue
        qv = tuple(poly.trim(digits[c * (K + 1):(c + 1) * (K + 1)]) for c in range(n))
        dg = max(poly.deg(a) for a in qv)
        p, worst, bound = _defect(s, qv, F)
        known = [e for e in (worst, bound) if e is not None]
        exp = max(known) if known else -math.inf
        is_bound = bound is not None and (worst is None or bound >= worst)
        cur = best_by_deg.get(dg)
        if cur is None or exp < cur[0]:
            best_by_deg[dg] = (exp, is_bound, p, qv)
    out = []
    best = None
    for k in range(0, K + 1):
        cand = best_by_deg.get(k)
        if cand is not None and (best is None or cand[0] < best[0]):
            best = cand
        if k == 0:
            continue
        exp, is_bound, p, qv = best
        defect = Fraction(0) if exp == -math.inf else Fraction(F.q) ** exp
        thr_exp = Fraction(eps_exponent) - Fraction(k * n, m)
        passes = exp == -math.inf or exp <= thr_exp
        thr = Fraction(F.q) ** math.floor(thr_exp)
        out.append(DaniWitness(k, p, qv, defect, is_bound, thr, passes))
    return out


# ---------------------------------------------------------------------------
# escape sets


def measure_Z(x: PolyLattice, M: float, N: int, spec: FlowSpec, trials: int, seed: int,
              params: MargulisParams | None = None) -> MeasureResult:
    """Monte Carlo of mu{s in M_{m,n}(O) : alpha-tilde(g_{lt} u_s x) > M for l = 1..N}."""
    return measure_Z_profile(x, M, N, spec, trials, seed, params)[-1]


def measure_Z_profile(x: PolyLattice, M: float, N: int, spec: FlowSpec, trials: int, seed: int,
                      params: MargulisParams | None = None) -> list[MeasureResult]:
    """measure_Z for every horizon 0..N from one set of trials."""
    params = _params(spec, params)
    tree = OrbitTree(x, params)
    F = x.field
    alive = [0] * (N + 1)
    for tr in range(trials):
        rng = trial_rng(seed, tr, "Z")
        key = ()
        alive[0] += 1
        for ell in range(1, N + 1):
            key = key + random_key(rng, spec, F, 1)
            if tree.alpha_tilde(key) <= M:
                break
            alive[ell] += 1
    out = []
    for cnt in alive:
        p = cnt / trials if trials else 1.0
        se = math.sqrt(p * (1 - p) / trials) if trials else 0.0
        out.append(MeasureResult(p, MONTE_CARLO, "orbit-tree", trials=trials, seed=seed, stderr=se, count=cnt,
                                 total=trials))
    return out


def _dfs_count(L: PolyLattice, params: MargulisParams, remaining: int, escapes: int, need: int, M: float,
               nb: int) -> int:
    if escapes >= need:
        return nb ** remaining
    if escapes + remaining < need:
        return 0
    total = 0
    for code in range(nb):
        child = step_lattice(L, _block(code, params.spec, L.field), params.spec)
        h = alpha_tilde_from_alphas(lattice_alphas(child), params)
        total += _dfs_count(child, params, remaining - 1, escapes + (h > M), need, M, nb)
    return total


@lru_cache(maxsize=1 << 16)
def _block(code: int, spec: FlowSpec, field: FieldSpec) -> KMatrix:
    return block_from_code(code, spec, field)


def _subtree_job(args):
    basis, params, code, N, need, M = args
    L = PolyLattice(basis)
    nb = block_count(params.spec, L.field)
    child = step_lattice(L, _block(code, params.spec, L.field), params.spec)
    h = alpha_tilde_from_alphas(lattice_alphas(child), params)
    return _dfs_count(child, params, N - 1, int(h > M), need, M, nb)


def escape_count(x: PolyLattice, M: float, N: int, spec: FlowSpec, delta=1,
                 params: MargulisParams | None = None, cap: int = DEFAULT_COVER_CAP, workers: int = 1) -> int:
    """Exact number of depth-(m+n)tN cylinders whose orbit is outside X_{<=M} at >= delta*N of steps 1..N.

    Membership is constant on each cylinder, so the count is exact.
    """
    params = _params(spec, params)
    F = x.field
    nb = block_count(spec, F)
    if nb ** N > cap:
        raise CapExceededError(f"{nb ** N} cylinders exceed the covering cap {cap}")
    if N == 0:
        return 1
    delta = Fraction(delta)
    need = math.ceil(delta * N)
    basis = x.reduced().basis
    jobs = [(basis, params, code, N, need, M) for code in range(nb)]
    return sum(parallel_map(_subtree_job, jobs, workers))


def covering_count(x: PolyLattice, M: float, N: int, spec: FlowSpec, params: MargulisParams | None = None,
                   cap: int = DEFAULT_COVER_CAP, workers: int = 1) -> int:
    """Exact number of depth-(m+n)tN cylinders contained in Z_x(M, N, t)."""
    return escape_count(x, M, N, spec, 1, params, cap, workers)


def covering_bound(x: PolyLattice, M: float, N: int, spec: FlowSpec, c: float,
                   params: MargulisParams | None = None) -> float:
    """(alpha-tilde(x)/M) (3ct)^N q^{(m+n-1)mntN}."""
    params = _params(spec, params)
    m, n, t = spec.m, spec.n, spec.t
    return alpha_tilde(x, params) / M * (3 * c * t) ** N * float(x.field.q) ** ((m + n - 1) * m * n * t * N)


@dataclass
class DimReport:
    delta: Fraction
    rows: list  # (N, radius exponent, count, slope)
    target: float

    @property
    def slopes(self) -> list[float]:
        return [r[3] for r in self.rows]


def box_dimension_estimate(x: PolyLattice, delta, spec: FlowSpec, N_range, M: float | None = None,
                           params: MargulisParams | None = None, cap: int = DEFAULT_COVER_CAP,
                           workers: int = 1) -> DimReport:
    """log_q(count)/((m+n)tN) for cylinders meeting the delta-escape set, per N."""
    params = _params(spec, params)
    M = default_M(x, params) if M is None else M
    m, n, t = spec.m, spec.n, spec.t
    delta = Fraction(delta)
    rows = []
    for N in N_range:
        cnt = escape_count(x, M, N, spec, delta, params, cap, workers)
        radius = (m + n) * t * N
        slope = math.log(cnt, x.field.q) / radius if cnt else -math.inf
        rows.append((N, radius, cnt, slope))
    target = float((m + n - delta) * m * n / (m + n))
    return DimReport(delta, rows, target)


# ---------------------------------------------------------------------------
# the combination map


def phi_pushforward(spec: FlowSpec, N: int, k: int, field: FieldSpec) -> Counter:
    """Distribution of phi(s_1..s_N) mod pi^k over all N-tuples of blocks mod pi^k."""
    m, n = spec.m, spec.n
    q = field.q
    per_block = q ** (m * n * k)
    out: Counter = Counter()
    for codes in product(range(per_block), repeat=N):
        blocks = []
        for code in codes:
            rows = []
            for _ in range(m):
                row = []
                for _ in range(n):
                    coeffs = []
                    for _ in range(k):
                        code, c = divmod(code, q)
                        coeffs.append(c)
                    row.append(LaurentElement(field, 0, coeffs))
                rows.append(row)
            blocks.append(KMatrix(field, rows))
        phi = phi_combine(blocks, spec)
        key = tuple(tuple(phi[r, c].coefficient(j) for j in range(k)) for r in range(m) for c in range(n))
        out[key] += 1
    return out

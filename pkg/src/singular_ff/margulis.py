"""Exponents beta_i, the height function alpha-tilde, weight fitting and
contraction checks for the flow g_t u_s on the space of lattices.

Lattices along an orbit are advanced one block at a time: if s has pi-adic
blocks r_0, r_1, ... of length (m+n)t, then g_{(l+1)t} u_s x = g_t u_{r_l} (g_{lt} u_s x)
up to lattice equality, so each step only needs the current reduced basis.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from functools import lru_cache

from .exterior import KMatrix
from .flow import FlowSpec, flow_matrix, horospherical
from .gf import CapExceededError, FieldSpec
from .laurent import LaurentElement
from .lattice import PolyLattice, alphas
from .seeding import trial_rng

DEFAULT_SWEEP_CAP = 1 << 20


class WeightSearchError(RuntimeError):
    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


def beta(m: int, n: int, i: int) -> Fraction:
    """m/i for i <= m, n/(m+n-i) otherwise."""
    if m < 1 or n < 1:
        raise ValueError("block sizes must be positive")
    if not 1 <= i <= m + n - 1:
        raise ValueError(f"index {i} outside 1..{m + n - 1}")
    return Fraction(m, i) if i <= m else Fraction(n, m + n - i)


def betas_full(m: int, n: int) -> tuple[Fraction, ...]:
    """beta_0 .. beta_d with the boundary exponents fixed to 1."""
    d = m + n
    return (Fraction(1),) + tuple(beta(m, n, i) for i in range(1, d)) + (Fraction(1),)


@dataclass(frozen=True)
class MargulisParams:
    m: int
    n: int
    t: int = 1
    omegas: tuple = ()
    threshold: float = 0.0

    def __post_init__(self):
        d = self.m + self.n
        if not self.omegas:
            object.__setattr__(self, "omegas", tuple(Fraction(1) for _ in range(d + 1)))
        if len(self.omegas) != d + 1:
            raise ValueError(f"need {d + 1} weights omega_0..omega_d")
        if any(w <= 0 for w in self.omegas):
            raise ValueError("weights must be positive")

    @property
    def d(self) -> int:
        return self.m + self.n

    @property
    def betas(self) -> tuple[Fraction, ...]:
        return betas_full(self.m, self.n)[1:-1]

    def with_threshold(self, threshold: float) -> "MargulisParams":
        return MargulisParams(self.m, self.n, self.t, self.omegas, threshold)

    def with_t(self, t: int) -> "MargulisParams":
        return MargulisParams(self.m, self.n, t, self.omegas, self.threshold)

    @property
    def spec(self) -> FlowSpec:
        return FlowSpec(self.m, self.n, self.t)


def _pow(x: Fraction, e: Fraction) -> float:
    if e.denominator == 1:
        return float(x ** e.numerator)
    return math.exp(float(e) * math.log(x.numerator) - float(e) * math.log(x.denominator))


def height_terms(alpha_values, params: MargulisParams) -> list[float]:
    """(omega_i alpha_i)^beta_i for i = 0..d."""
    bs = betas_full(params.m, params.n)
    return [_pow(Fraction(w) * a, b) for w, a, b in zip(params.omegas, alpha_values, bs)]


def alpha_tilde_from_alphas(alpha_values, params: MargulisParams) -> float:
    return math.fsum(height_terms(alpha_values, params))


def alpha_tilde(x: PolyLattice, params: MargulisParams) -> float:
    if x.d != params.d:
        raise ValueError("lattice dimension does not match m+n")
    return alpha_tilde_from_alphas(alphas(x), params)


def one_step_exponent(params: MargulisParams) -> float:
    """log_q of max_i q^{mnt beta_i}, the one-step growth bound for alpha-tilde."""
    return max(float(b) for b in params.betas) * params.m * params.n * params.t


# ---------------------------------------------------------------------------
# orbit stepping


@lru_cache(maxsize=256)
def _flow(spec: FlowSpec, field: FieldSpec) -> KMatrix:
    return flow_matrix(spec, field)


def block_size(spec: FlowSpec) -> int:
    """pi-depth of one block of s: (m+n)t."""
    return spec.depth()


def block_count(spec: FlowSpec, field: FieldSpec) -> int:
    return field.q ** (spec.m * spec.n * block_size(spec))


def block_from_code(code: int, spec: FlowSpec, field: FieldSpec) -> KMatrix:
    """Exact m x n matrix of pi-polynomials of degree < (m+n)t encoded by `code`."""
    q, depth = field.q, block_size(spec)
    rows = []
    for _ in range(spec.m):
        row = []
        for _ in range(spec.n):
            coeffs = []
            for _ in range(depth):
                code, c = divmod(code, q)
                coeffs.append(c)
            row.append(LaurentElement(field, 0, coeffs))
        rows.append(row)
    return KMatrix(field, rows)


def step_lattice(L: PolyLattice, block: KMatrix, spec: FlowSpec) -> PolyLattice:
    """Reduced basis of g_t u_block L."""
    g = _flow(spec, L.field) @ horospherical(block)
    return L.transform(g).reduced()


class OrbitTree:
    """Memoised lattices g_{lt} u_s x keyed by the block codes of s.

    Nodes are shared between Monte Carlo trials and cylinder sweeps; the
    value of a node depends only on its key, so caching never changes results.
    """

    def __init__(self, x: PolyLattice, params: MargulisParams, check_growth: bool = True):
        self.params = params
        self.spec = params.spec
        self.field = x.field
        self.root = x.reduced()
        self.check_growth = check_growth
        self._growth = float(self.field.q) ** one_step_exponent(params) * (1 + 1e-9)
        self._nodes = {(): (self.root, alpha_tilde(self.root, params), tuple(alphas(self.root)))}
        self._blocks: dict = {}

    def block(self, code: int) -> KMatrix:
        b = self._blocks.get(code)
        if b is None:
            b = block_from_code(code, self.spec, self.field)
            self._blocks[code] = b
        return b

    def node(self, key: tuple):
        hit = self._nodes.get(key)
        if hit is not None:
            return hit
        parent = self.node(key[:-1])
        L = step_lattice(parent[0], self.block(key[-1]), self.spec)
        al = tuple(alphas(L))
        at = alpha_tilde_from_alphas(al, self.params)
        if self.check_growth and at > self._growth * parent[1]:
            raise AssertionError(f"one-step growth bound violated: {at} > {self._growth} * {parent[1]}")
        out = (L, at, al)
        self._nodes[key] = out
        return out

    def alpha_tilde(self, key: tuple) -> float:
        return self.node(key)[1]

    def alphas(self, key: tuple):
        return self.node(key)[2]

    def __len__(self):
        return len(self._nodes)


def random_key(rng, spec: FlowSpec, field: FieldSpec, steps: int) -> tuple:
    nb = block_count(spec, field)
    return tuple(rng.randrange(nb) for _ in range(steps))


# ---------------------------------------------------------------------------
# one-step averages


@dataclass
class HeightAverageReport:
    i: int
    t: int
    lhs: float
    stderr: float
    main_term: float
    cusp_term: float
    fitted_c: float
    holds_with_c0: bool
    method: str


def _one_step_average(tree: OrbitTree, fn, trials: int, seed: int, exact: bool | None,
                      cap: int = DEFAULT_SWEEP_CAP):
    """Average of fn(node key) over one block of s; exact sweep when affordable."""
    nb = block_count(tree.spec, tree.field)
    if exact is None:
        exact = nb <= min(cap, max(trials, 1))
    if exact:
        if nb > cap:
            raise CapExceededError(f"{nb} cylinders exceed the sweep cap {cap}")
        vals = [fn((c,)) for c in range(nb)]
        return math.fsum(vals) / nb, 0.0, "exact"
    vals = []
    for tr in range(trials):
        rng = trial_rng(seed, tr, "step")
        vals.append(fn(random_key(rng, tree.spec, tree.field, 1)))
    mean = math.fsum(vals) / trials
    var = math.fsum((v - mean) ** 2 for v in vals) / max(trials - 1, 1)
    return mean, math.sqrt(var / trials), "monte-carlo"


def check_height_average(x: PolyLattice, i: int, t: int, trials: int, seed: int, m: int = 1, n: int = 1,
                exact: bool | None = None) -> HeightAverageReport:
    """Average of alpha_i(g_t u_s x)^beta_i against its two comparison terms.

    main_term = t q^{-mnt} alpha_i(x)^beta_i (to be multiplied by a constant c),
    cusp_term = q^{2mnt beta_i} max_j sqrt(alpha_{i+j} alpha_{i-j})^beta_i.
    """
    d = m + n
    if x.d != d:
        raise ValueError("lattice dimension does not match m+n")
    if not 1 <= i <= d - 1:
        raise ValueError(f"index {i} outside 1..{d - 1}")
    params = MargulisParams(m, n, t)
    tree = OrbitTree(x, params)
    b = beta(m, n, i)
    q = x.field.q
    lhs, se, method = _one_step_average(tree, lambda key: _pow(tree.alphas(key)[i], b), trials, seed, exact)
    al = tree.alphas(())
    main = t * float(q) ** (-m * n * t) * _pow(al[i], b)
    cusp = max(_pow(al[i + j] * al[i - j], b / 2) for j in range(1, min(i, d - i) + 1))
    cusp *= float(q) ** float(2 * m * n * t * b)
    fitted = max(0.0, (lhs - cusp) / main)
    return HeightAverageReport(i, t, lhs, se, main, cusp, fitted, lhs <= cusp, method)


# ---------------------------------------------------------------------------
# weight fitting


@dataclass
class WeightFit:
    params: MargulisParams
    K: float
    vacuous: bool
    log_omegas: tuple
    rows: list = dc_field(default_factory=list)  # (alpha_tilde(x), average, ratio) per sampled x


def _height_data(x: PolyLattice, m: int, n: int, t: int, trials: int, seed: int, exact: bool | None):
    """Per-index boundary values a_i = alpha_i(x)^beta_i and averages A_i of alpha_i(g_t u_s x)^beta_i."""
    params = MargulisParams(m, n, t)
    tree = OrbitTree(x, params, check_growth=False)
    bs = betas_full(m, n)
    a = [_pow(al, b) for al, b in zip(tree.alphas(()), bs)]
    A = []
    for i, b in enumerate(bs):
        if i in (0, m + n):
            A.append(1.0)
            continue
        A.append(_one_step_average(tree, lambda key, i=i, b=b: _pow(tree.alphas(key)[i], b), trials, seed, exact)[0])
    return a, A


def _evaluate_weights(data, W, m, n, t, q):
    scale = t * float(q) ** (-m * n * t)
    heights = [math.fsum(w * ai for w, ai in zip(W, a)) for a, _ in data]
    avgs = [math.fsum(w * Ai for w, Ai in zip(W, A)) for _, A in data]
    T = float(_percentile(heights, 0.9))
    ratios = [avg / (scale * h) for h, avg in zip(heights, avgs) if h > T]
    K = max(ratios) if ratios else 0.0
    return K, T, not ratios, heights, avgs


def _percentile(values, p: float) -> float:
    s = sorted(values)
    if not s:
        return 0.0
    pos = p * (len(s) - 1)
    lo = int(math.floor(pos))
    hi = min(lo + 1, len(s) - 1)
    return s[lo] + (s[hi] - s[lo]) * (pos - lo)


def fit_weights(m: int, n: int, t: int, sample_lattices, trials: int, seed: int,
                exact: bool | None = None, grid: int = 8, sweeps: int = 3) -> WeightFit:
    """Coordinate descent over log_q omega_i in [-grid, grid] minimising the contraction constant K.

    K is the smallest constant with avg alpha-tilde(g_t u_s x) <= K t q^{-mnt} alpha-tilde(x) for every
    sampled x above the threshold T (90th percentile of sampled heights).
    omega_0 and omega_d stay at 1.
    """
    xs = list(sample_lattices)
    if not xs:
        raise ValueError("need at least one sample lattice")
    q = xs[0].field.q
    d = m + n
    bs = betas_full(m, n)
    data = [_height_data(x, m, n, t, trials, seed + idx, exact) for idx, x in enumerate(xs)]

    def weights(logs):
        return [float(q) ** (e * float(b)) for e, b in zip(logs, bs)]

    logs = [0] * (d + 1)
    best = _evaluate_weights(data, weights(logs), m, n, t, q)
    for _ in range(sweeps):
        improved = False
        for i in range(1, d):
            for e in range(-grid, grid + 1):
                if e == logs[i]:
                    continue
                trial = list(logs)
                trial[i] = e
                res = _evaluate_weights(data, weights(trial), m, n, t, q)
                if not res[2] and (best[2] or res[0] < best[0] - 1e-12):
                    logs, best, improved = trial, res, True
        if not improved:
            break
    K, T, vacuous, heights, avgs = best
    if not math.isfinite(K):
        raise WeightSearchError("no finite contraction constant found", best=(logs, T, K))
    omegas = tuple(Fraction(q) ** e for e in logs)
    params = MargulisParams(m, n, t, omegas, T)
    scale = t * float(q) ** (-m * n * t)
    rows = [(h, a, a / (scale * h)) for h, a in zip(heights, avgs)]
    return WeightFit(params, K, vacuous, tuple(logs), rows)


def contraction_constant(xs, params: MargulisParams, trials: int, seed: int, exact: bool | None = None) -> float:
    """K for fixed weights and threshold: max over x above threshold of the normalised one-step average."""
    m, n, t = params.m, params.n, params.t
    q = xs[0].field.q
    scale = t * float(q) ** (-m * n * t)
    worst = 0.0
    for idx, x in enumerate(xs):
        tree = OrbitTree(x, params, check_growth=False)
        h = tree.alpha_tilde(())
        if h <= params.threshold:
            continue
        avg = _one_step_average(tree, tree.alpha_tilde, trials, seed + idx, exact)[0]
        worst = max(worst, avg / (scale * h))
    return worst


# ---------------------------------------------------------------------------
# multi-step restricted integrals


@dataclass
class RestrictedDecayReport:
    N_values: list
    integrals: list
    stderrs: list
    ratios: list
    slope: float
    target: float
    passed: bool
    vacuous: bool
    survivors: list


def check_restricted_decay(x: PolyLattice, M: float, N_max: int, t: int, trials: int, seed: int,
                 params: MargulisParams | None = None) -> RestrictedDecayReport:
    """Monte Carlo of the integral of alpha-tilde(g_{Nt} u_s x) over Z_x(M, N-1, t), N = 1..N_max.

    Passes when the least-squares slope of log_q of the integral in N is at most -mnt/2.
    """
    params = (params or MargulisParams(1, 1, t)).with_t(t)
    tree = OrbitTree(x, params)
    spec, F = tree.spec, tree.field
    sums = [[] for _ in range(N_max)]
    survivors = [0] * (N_max + 1)
    survivors[0] = trials
    for tr in range(trials):
        rng = trial_rng(seed, tr, "Z")
        key = ()
        for N in range(1, N_max + 1):
            key = key + random_key(rng, spec, F, 1)
            val = tree.alpha_tilde(key)
            sums[N - 1].append(val)
            if val <= M:
                for rest in range(N, N_max):
                    sums[rest].append(0.0)
                break
            survivors[N] += 1
    integrals, ses = [], []
    for vals in sums:
        mean = math.fsum(vals) / trials
        var = math.fsum((v - mean) ** 2 for v in vals) / max(trials - 1, 1)
        integrals.append(mean)
        ses.append(math.sqrt(var / trials))
    q = F.q
    mnt = params.m * params.n * t
    pos = [(N, v) for N, v in zip(range(1, N_max + 1), integrals) if v > 0]
    vacuous = len(pos) < 2
    slope = _slope([p[0] for p in pos], [math.log(p[1], q) for p in pos]) if not vacuous else float("nan")
    ratios = [integrals[j + 1] / integrals[j] if integrals[j] > 0 else float("nan") for j in range(N_max - 1)]
    target = -mnt / 2
    passed = vacuous or slope <= target
    return RestrictedDecayReport(list(range(1, N_max + 1)), integrals, ses, ratios, slope, target, passed, vacuous,
                                 survivors)


def _slope(xs, ys) -> float:
    mx, my = sum(xs) / len(xs), sum(ys) / len(ys)
    den = sum((a - mx) ** 2 for a in xs)
    return sum((a - mx) * (b - my) for a, b in zip(xs, ys)) / den


def concavity_check(m: int, n: int) -> bool:
    """i -> 1/beta_i is concave on 1..d-1 (exact rational second differences)."""
    d = m + n
    inv = [1 / beta(m, n, i) for i in range(1, d)]
    return all(inv[j - 1] + inv[j + 1] <= 2 * inv[j] for j in range(1, len(inv) - 1))

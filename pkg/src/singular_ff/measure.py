"""Haar measure of valuation events on M_{d,i}(O), and contraction integrals.

Events are unions of depth-k cylinders, so their measure is a finite count
over M_{d,i}(O/pi^k). Two counting routes are provided:

* ``enumerate``: odometer over every matrix of the quotient, vectorised with
  numpy over the ring O/pi^k encoded as integers (digit j = coefficient of pi^j);
* ``fibered``: for events bounded only through thresholds on the i x i minors,
  enumerate the first i-1 columns and count the admissible last columns from
  the elementary divisors of the linear map v -> (w ^ v).

The two share no code beyond the ring encoding and are cross-checked in tests.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Callable, Mapping

import numpy as np

from .exterior import KMatrix, WedgeVector, exterior_action, subsets, wedge
from .flow import FlowSpec, flow_matrix, horospherical
from .gf import CapExceededError, FieldSpec
from .laurent import LaurentElement, PrecisionError
from .margulis import beta
from .sampling import sample_cylinder, sample_O_matrix, sample_SL_O  # noqa: F401  (re-exported)
from .seeding import trial_rng

DEFAULT_ENUM_CAP = 1 << 24
TABLE_LIMIT = 1024
CHUNK = 1 << 17
EXACT_COUNT = "EXACT_COUNT"
MONTE_CARLO = "MONTE_CARLO"


class InsufficientDepthError(ValueError):
    pass


# ---------------------------------------------------------------------------
# the ring O / pi^k


class TruncatedRing:
    """O/pi^k with elements encoded as integers in [0, q^k)."""

    def __init__(self, field: FieldSpec, k: int):
        if k < 0:
            raise ValueError("depth must be nonnegative")
        self.field, self.k, self.q = field, k, field.q
        self.size = self.q ** k
        self.binary = self.q == 2

    def digits(self, a: int) -> list[int]:
        out = []
        for _ in range(self.k):
            a, r = divmod(a, self.q)
            out.append(r)
        return out

    def encode(self, digits) -> int:
        out = 0
        for c in reversed(list(digits)[: self.k]):
            out = out * self.q + c
        return out

    def from_laurent(self, x) -> int:
        """Code of an element of O given as an exact or precise-enough LaurentElement."""
        return self.encode(x.coefficient(j) for j in range(self.k))

    def shift_up(self, a: int, s: int) -> int:
        """a * pi^s."""
        return (a * self.q ** s) % self.size if s < self.k else 0

    def shift_down(self, a: int, s: int) -> int:
        """a / pi^s for a divisible by pi^s (top digits filled with zeros)."""
        return a // self.q ** s

    # scalar arithmetic
    def val(self, a: int) -> int:
        if a == 0:
            return self.k
        v = 0
        while a % self.q == 0:
            a //= self.q
            v += 1
        return v

    def add(self, a: int, b: int) -> int:
        if self.binary:
            return a ^ b
        if self.size <= TABLE_LIMIT:
            return self._py_tables[0][a][b]
        F = self.field
        return self.encode(F.add_table[x][y] for x, y in zip(self.digits(a), self.digits(b)))

    def neg(self, a: int) -> int:
        if self.binary:
            return a
        neg = self.field.neg_table
        return self.encode(neg[x] for x in self.digits(a))

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def mul(self, a: int, b: int) -> int:
        if self.binary:
            out, j = 0, 0
            while b and j < self.k:
                if b & 1:
                    out ^= a << j
                b >>= 1
                j += 1
            return out & (self.size - 1)
        if self.size <= TABLE_LIMIT:
            return self._py_tables[1][a][b]
        F = self.field
        da, db = self.digits(a), self.digits(b)
        acc = [0] * self.k
        for i, x in enumerate(da):
            if x:
                for j in range(self.k - i):
                    acc[i + j] = F.add_table[acc[i + j]][F.mul_table[x][db[j]]]
        return self.encode(acc)

    def unit_inverse(self, a: int) -> int:
        return _unit_inverse(self, a)

    @cached_property
    def _py_tables(self):
        add, mul = self.tables[0], self.tables[1]
        return add.tolist(), mul.tolist()

    # vectorised arithmetic
    @cached_property
    def tables(self):
        """(add, mul, neg) lookup arrays, for rings of at most TABLE_LIMIT elements."""
        if self.size > TABLE_LIMIT:
            raise CapExceededError(f"ring O/pi^{self.k} over F_{self.q} too large for lookup tables")
        F, Q, k = self.field, self.size, self.k
        codes = np.arange(Q)
        dig = np.stack([(codes // self.q ** j) % self.q for j in range(k)], axis=1) if k else np.zeros((Q, 0), int)
        fadd = np.array(F.add_table)
        fmul = np.array(F.mul_table)
        fneg = np.array(F.neg_table)
        weights = self.q ** np.arange(k)
        add = (fadd[dig[:, None, :], dig[None, :, :]] * weights).sum(axis=-1) if k else np.zeros((Q, Q), int)
        prod = np.zeros((Q, Q, k), dtype=np.int64)
        for i in range(k):
            for j in range(k - i):
                prod[:, :, i + j] = fadd[prod[:, :, i + j], fmul[dig[:, None, i], dig[None, :, j]]]
        mul = (prod * weights).sum(axis=-1) if k else np.zeros((Q, Q), int)
        neg = (fneg[dig] * weights).sum(axis=-1) if k else np.zeros(Q, int)
        return add.astype(np.int32), mul.astype(np.int32), neg.astype(np.int32)

    def vadd(self, a, b):
        if self.binary:
            return a ^ b
        return self.tables[0][a, b]

    def vneg(self, a):
        if self.binary:
            return a
        return self.tables[2][a]

    def vmul(self, a, b):
        if self.binary:
            out = np.zeros(np.broadcast(a, b).shape, dtype=np.int64)
            for j in range(self.k):
                out ^= np.where((b >> j) & 1, a << j, 0)
            return out & (self.size - 1)
        return self.tables[1][a, b]

    def vval(self, a):
        a = np.asarray(a, dtype=np.int64)
        if self.binary:
            low = a & -a
            v = np.zeros(a.shape, dtype=np.int64)
            nz = low > 0
            v[nz] = np.log2(low[nz]).round().astype(np.int64)
            v[~nz] = self.k
            return v
        v = np.full(a.shape, self.k, dtype=np.int64)
        rem = a.copy()
        done = a == 0
        for j in range(self.k):
            hit = ~done & (rem % self.q != 0)
            v[hit] = j
            done |= hit
            rem //= self.q
        return v


@lru_cache(maxsize=1 << 16)
def _unit_inverse(ring: TruncatedRing, a: int) -> int:
    F = ring.field
    d = ring.digits(a)
    if ring.k and d[0] == 0:
        raise ZeroDivisionError("not a unit")
    inv0 = F.inv_table[d[0]]
    out = [0] * ring.k
    # long division of 1 by a, one digit at a time
    rem = [1] + [0] * (ring.k - 1)
    for j in range(ring.k):
        c = F.mul_table[rem[j]][inv0]
        out[j] = c
        if c:
            for i in range(j, ring.k):
                rem[i] = F.sub_table[rem[i]][F.mul_table[c][d[i - j]]]
    return ring.encode(out)


# ---------------------------------------------------------------------------
# spaces, events, results


@dataclass(frozen=True)
class QuotientMatrixSpace:
    """M_{d,i}(O/pi^k) carrying the pushforward of Haar measure."""

    d: int
    i: int
    k: int
    field: FieldSpec
    cap: int = DEFAULT_ENUM_CAP

    def __post_init__(self):
        if not 1 <= self.i <= self.d:
            raise ValueError(f"need 1 <= i <= d, got d={self.d}, i={self.i}")
        if self.k < 0:
            raise ValueError("depth must be nonnegative")

    @property
    def total(self) -> int:
        return self.field.q ** (self.d * self.i * self.k)

    @property
    def ring(self) -> TruncatedRing:
        return _ring(self.field, self.k)

    def with_depth(self, k: int) -> "QuotientMatrixSpace":
        return QuotientMatrixSpace(self.d, self.i, k, self.field, self.cap)


@lru_cache(maxsize=64)
def _ring(field: FieldSpec, k: int) -> TruncatedRing:
    return TruncatedRing(field, k)


@dataclass(frozen=True)
class ValuationEvent:
    """Event defined by the valuations of the i x i minors c_I(s).

    kind 'E': all val(c_I) >= l.  kind 'F': additionally val(c_{1..i}) >= l'.
    kind 'D': val(c_I) == n_I for every I.  kind 'custom': predicate on the
    dict I -> valuation array (valuations capped at the quotient depth).
    """

    kind: str
    params: tuple = ()
    depth_needed: int = 0
    predicate: Callable | None = dc_field(default=None, compare=False)
    label: str = ""

    @classmethod
    def E(cls, level: int) -> "ValuationEvent":
        if level < 0:
            raise ValueError("level must be nonnegative")
        return cls("E", (level,), level, label=f"E({level})")

    @classmethod
    def F(cls, level: int, level_first: int) -> "ValuationEvent":
        if level < 0 or level_first < 0:
            raise ValueError("levels must be nonnegative")
        return cls("F", (level, level_first), max(level, level_first), label=f"F({level},{level_first})")

    @classmethod
    def D(cls, profile) -> "ValuationEvent":
        """profile: sequence of n_I in the order of subsets(d, i), or a dict I -> n_I."""
        if isinstance(profile, Mapping):
            items = tuple(sorted((tuple(I), int(n)) for I, n in profile.items()))
        else:
            items = tuple(int(n) for n in profile)
        vals = [n for _, n in items] if isinstance(profile, Mapping) else list(items)
        if not vals or min(vals) < 0:
            raise ValueError("profile entries must be nonnegative")
        return cls("D", items, max(vals) + 1, label=f"D{tuple(vals)}")

    @classmethod
    def custom(cls, predicate, depth: int, label: str = "custom") -> "ValuationEvent":
        return cls("custom", (label,), depth, predicate=predicate, label=label)

    def thresholds(self, d: int, i: int) -> dict:
        """Lower bounds on val(c_I), for the kinds the fibered engine handles."""
        if self.kind == "E":
            return {I: self.params[0] for I in subsets(d, i)}
        if self.kind == "F":
            level, first = self.params
            out = {I: level for I in subsets(d, i)}
            J0 = tuple(range(1, i + 1))
            out[J0] = max(level, first)
            return out
        raise ValueError(f"event kind {self.kind} has no threshold form")

    def _profile(self, d: int, i: int) -> dict:
        idx = subsets(d, i)
        if self.params and isinstance(self.params[0], tuple):
            prof = dict(self.params)
            if set(prof) != set(idx):
                raise ValueError("profile must name every index set")
            return prof
        if len(self.params) != len(idx):
            raise ValueError(f"profile needs {len(idx)} entries for d={d}, i={i}")
        return dict(zip(idx, self.params))

    def holds(self, vals: dict, d: int, i: int):
        """Vectorised membership given valuation arrays keyed by index set."""
        if self.kind in ("E", "F"):
            th = self.thresholds(d, i)
            out = None
            for I, t in th.items():
                cur = vals[I] >= t
                out = cur if out is None else out & cur
            return out
        if self.kind == "D":
            out = None
            for I, n in self._profile(d, i).items():
                cur = vals[I] == n
                out = cur if out is None else out & cur
            return out
        return np.asarray(self.predicate(vals))


@dataclass(frozen=True)
class MeasureResult:
    value: Fraction | float
    method: str
    engine: str = ""
    trials: int = 0
    seed: int | None = None
    stderr: float = 0.0
    count: int | None = None
    total: int | None = None

    def __float__(self):
        return float(self.value)


# ---------------------------------------------------------------------------
# enumeration engine


def _decode_entries(idx, Q: int, count: int):
    out = []
    for _ in range(count):
        idx, r = np.divmod(idx, Q)
        out.append(r)
    return out


def _minor_codes(ring: TruncatedRing, cols, d: int, i: int) -> dict:
    """Codes of all i x i minors c_I of the d x i matrix whose columns are `cols`.

    cols[c][r] is an array of entry codes; minors are built by Laplace
    expansion along the newest column.
    """
    w = {(): None}
    for c in range(i):
        col = cols[c]
        nxt = {}
        for J in subsets(d, c + 1):
            acc = None
            for pos, r in enumerate(J):
                rest = J[:pos] + J[pos + 1:]
                term = col[r - 1] if not rest else ring.vmul(col[r - 1], w[rest])
                if (pos + c) % 2:
                    term = ring.vneg(term)
                acc = term if acc is None else ring.vadd(acc, term)
            nxt[J] = acc
        w = nxt
    return w


def _count_enumerate(space: QuotientMatrixSpace, event: ValuationEvent) -> int:
    d, i, k = space.d, space.i, space.k
    ring = space.ring
    if space.total > space.cap:
        raise CapExceededError(f"{space.total} states exceed the enumeration cap {space.cap}")
    if k == 0:
        vals = {I: np.zeros(1, dtype=np.int64) for I in subsets(d, i)}
        return int(np.count_nonzero(event.holds(vals, d, i)))
    Q = ring.size
    hits = 0
    for start in range(0, space.total, CHUNK):
        idx = np.arange(start, min(space.total, start + CHUNK), dtype=np.int64)
        flat = _decode_entries(idx, Q, d * i)
        cols = [[flat[c * d + r] for r in range(d)] for c in range(i)]
        minors = _minor_codes(ring, cols, d, i)
        vals = {I: ring.vval(v) for I, v in minors.items()}
        hits += int(np.count_nonzero(event.holds(vals, d, i)))
    return hits


# ---------------------------------------------------------------------------
# fibered engine


def _snf_valuations(ring: TruncatedRing, rows) -> list[int]:
    """Valuations of the elementary divisors (those below k) of a matrix over O/pi^k."""
    A = [list(r) for r in rows]
    out = []
    while A and A[0]:
        best = None
        for r, row in enumerate(A):
            for c, x in enumerate(row):
                if x:
                    v = ring.val(x)
                    if best is None or v < best[0]:
                        best = (v, r, c)
                        if v == 0:
                            break
            if best is not None and best[0] == 0:
                break
        if best is None:
            break
        v, r, c = best
        prow = A[r]
        uinv = ring.unit_inverse(ring.shift_down(prow[c], v))
        nxt = []
        for rr, row in enumerate(A):
            if rr == r:
                continue
            y = row[c]
            if y:
                f = ring.mul(ring.shift_down(y, v), uinv)
                row = [ring.sub(a, ring.mul(f, b)) for a, b in zip(row, prow)]
            nxt.append(row[:c] + row[c + 1:])
        out.append(v)
        A = nxt
    return out


def _fibered_weight(ring: TruncatedRing, rows, L: int) -> Fraction:
    """Probability that a uniform v in (O/pi^k)^d solves rows . v == 0 mod pi^L."""
    expo = sum(max(0, L - a) for a in _snf_valuations(ring, rows))
    return Fraction(1, ring.q ** expo)


def _count_fibered(space: QuotientMatrixSpace, event: ValuationEvent) -> Fraction:
    d, i, k = space.d, space.i, space.k
    ring = space.ring
    prefixes = ring.size ** (d * (i - 1))
    if prefixes > space.cap:
        raise CapExceededError(f"{prefixes} prefixes exceed the enumeration cap {space.cap}")
    th = event.thresholds(d, i)
    L = max(th.values()) if th else 0
    if L == 0:
        return Fraction(1)
    idx_sets = subsets(d, i)
    shifts = {J: L - th[J] for J in idx_sets}

    def rows_for(w):
        out = []
        for J in idx_sets:
            row = [0] * d
            for pos, r in enumerate(J):
                rest = J[:pos] + J[pos + 1:]
                x = w[rest]
                if (pos + i - 1) % 2:
                    x = ring.neg(x)
                row[r - 1] = ring.shift_up(x, shifts[J])
            out.append(row)
        return out

    if i == 1:
        return _fibered_weight(ring, rows_for({(): 1}), L)

    total = Fraction(0)
    cache: dict = {}
    Q = ring.size
    for start in range(0, prefixes, CHUNK):
        idx = np.arange(start, min(prefixes, start + CHUNK), dtype=np.int64)
        flat = _decode_entries(idx, Q, d * (i - 1))
        cols = [[flat[c * d + r] for r in range(d)] for c in range(i - 1)]
        w = _minor_codes(ring, cols, d, i - 1)
        keys = list(w)
        if i == d:
            # a single row: the only elementary divisor is its minimal valuation
            shift = shifts[idx_sets[0]]
            mins = np.min(np.stack([ring.vval(w[K]) for K in keys]), axis=0) + shift
            mins = np.minimum(mins, k)
            for a, cnt in zip(*np.unique(mins, return_counts=True)):
                total += Fraction(int(cnt), ring.q ** max(0, L - int(a)))
            continue
        stacked = np.stack([w[K] for K in keys], axis=1)
        uniq, counts = np.unique(stacked, axis=0, return_counts=True)
        for vec, cnt in zip(uniq.tolist(), counts.tolist()):
            key = tuple(vec)
            wt = cache.get(key)
            if wt is None:
                wt = _fibered_weight(ring, rows_for(dict(zip(keys, key))), L)
                cache[key] = wt
            total += cnt * wt
    return total / prefixes


# ---------------------------------------------------------------------------
# public measure API


def exact_measure(space: QuotientMatrixSpace, event: ValuationEvent, engine: str = "auto",
                  check_stability: bool = False) -> MeasureResult:
    """Exact Haar measure of `event` from a count over M_{d,i}(O/pi^k)."""
    if space.k < event.depth_needed:
        raise InsufficientDepthError(
            f"event {event.label} needs depth {event.depth_needed}, space has depth {space.k}")
    if engine == "auto":
        if space.total <= space.cap:
            engine = "enumerate"
        elif event.kind in ("E", "F"):
            engine = "fibered"
        else:
            raise CapExceededError(f"{space.total} states exceed the enumeration cap {space.cap}")
    if engine == "enumerate":
        hits = _count_enumerate(space, event)
        res = MeasureResult(Fraction(hits, space.total), EXACT_COUNT, engine, count=hits, total=space.total)
    elif engine == "fibered":
        value = _count_fibered(space, event)
        res = MeasureResult(value, EXACT_COUNT, engine, total=space.total,
                            count=int(value * space.total))
    else:
        raise ValueError(f"unknown engine {engine!r}")
    if check_stability:
        deeper = exact_measure(space.with_depth(space.k + 1), event, engine)
        if deeper.value != res.value:
            raise AssertionError(f"cylinder stability failed for {event.label}: {res.value} vs {deeper.value}")
    return res


def measure(d: int, i: int, event: ValuationEvent, field: FieldSpec, k: int | None = None,
            cap: int = DEFAULT_ENUM_CAP, engine: str = "auto") -> Fraction:
    """Convenience wrapper at the minimal depth."""
    k = event.depth_needed if k is None else k
    return exact_measure(QuotientMatrixSpace(d, i, k, field, cap), event, engine).value


def mc_measure(space: QuotientMatrixSpace, event: ValuationEvent, trials: int, seed: int) -> MeasureResult:
    """Monte Carlo estimate through the precision-tracked sampler and exterior algebra."""
    d, i, k = space.d, space.i, space.k
    idx_sets = subsets(d, i)
    vals = {I: np.empty(trials, dtype=np.int64) for I in idx_sets}
    for t in range(trials):
        s = sample_O_matrix(space.field, d, i, k, seed, t)
        w = wedge(s.columns(), space.field)
        for I in idx_sets:
            vals[I][t] = min(w[I].vlow, k)
    hits = int(np.count_nonzero(event.holds(vals, d, i)))
    p = hits / trials
    se = math.sqrt(max(p * (1 - p), 0.0) / trials)
    return MeasureResult(p, MONTE_CARLO, "sampler", trials=trials, seed=seed, stderr=se, count=hits, total=trials)


# ---------------------------------------------------------------------------
# verification reports


@dataclass
class BoundReport:
    d: int
    i: int
    rows: list  # (parameter, measure, normalised ratio)
    sup: Fraction
    slopes: list = dc_field(default_factory=list)
    exponent: int = 0


def level_measures(d: int, i: int, top: int, field: FieldSpec, cap: int = DEFAULT_ENUM_CAP) -> list[Fraction]:
    """mu(E_0), ..., mu(E_top)."""
    out = [Fraction(1)]
    for level in range(1, top + 1):
        out.append(measure(d, i, ValuationEvent.E(level), field, cap=cap))
    return out


def verify_bound_E(d: int, i: int, level_max: int, field: FieldSpec, cap: int = DEFAULT_ENUM_CAP) -> BoundReport:
    """mu(E_l) q^{l(d-i+1)} for l <= level_max, its sup, and consecutive log_q slopes."""
    q = field.q
    ex = d - i + 1
    mus = level_measures(d, i, level_max, field, cap)
    rows = [(lv, mu, mu * Fraction(q) ** (lv * ex)) for lv, mu in enumerate(mus)]
    slopes = [math.log(mus[lv + 1] / mus[lv], q) for lv in range(level_max) if mus[lv + 1] > 0]
    return BoundReport(d, i, rows, max(r[2] for r in rows), slopes, ex)


def verify_bound_D(d: int, i: int, profiles, field: FieldSpec, cap: int = DEFAULT_ENUM_CAP) -> BoundReport:
    """mu(D(n)) q^{max n + (d-i) min n} per profile; sup is the fitted constant."""
    q = Fraction(field.q)
    rows = []
    for prof in profiles:
        ev = ValuationEvent.D(prof)
        ns = list(prof.values()) if isinstance(prof, Mapping) else list(prof)
        mu = measure(d, i, ev, field, cap=cap)
        rows.append((tuple(ns), mu, mu * q ** (max(ns) + (d - i) * min(ns))))
    return BoundReport(d, i, rows, max(r[2] for r in rows), [], d - i)


@dataclass
class MomentBracket:
    lower: float
    upper: float
    diverges: bool
    exact_lower: Fraction | None
    partial_sums: list
    fitted_C2: Fraction


def _as_fraction(b) -> Fraction:
    if isinstance(b, float):
        return Fraction(b).limit_denominator(10 ** 6)
    return Fraction(b)


def _qpow(q: int, e: Fraction) -> float | Fraction:
    return Fraction(q) ** int(e) if e.denominator == 1 else float(q) ** float(e)


def neg_moment(d: int, i: int, b, tail_depth: int, field: FieldSpec, cap: int = DEFAULT_ENUM_CAP) -> MomentBracket:
    """Bracket for E ||x_1 ^ ... ^ x_i||^{-b} over Haar-random x in M_{d,i}(O).

    The level sets ||.|| = q^{-l} are counted exactly for l <= tail_depth; the
    tail uses mu(E_{L+1}) exactly and mu(E_l) <= C2 q^{-l(d-i+1)} beyond, with C2
    the sup of the ratio over the computed levels.
    """
    b = _as_fraction(b)
    q = field.q
    ex = d - i + 1
    if b == 0:
        return MomentBracket(1.0, 1.0, False, Fraction(1), [Fraction(1)], Fraction(1))
    mus = level_measures(d, i, tail_depth + 1, field, cap)
    C2 = max(mu * Fraction(q) ** (lv * ex) for lv, mu in enumerate(mus))
    terms = [_qpow(q, lv * b) * (mus[lv] - mus[lv + 1]) for lv in range(tail_depth + 1)]
    partial, acc = [], 0
    for x in terms:
        acc = acc + x
        partial.append(acc)
    exact = acc if all(isinstance(x, Fraction) for x in terms) else None
    lower = float(acc)
    if b >= ex:
        return MomentBracket(lower, math.inf, True, exact, partial, C2)
    r = float(q) ** float(b - ex)
    tail = float(_qpow(q, (tail_depth + 1) * b) * mus[tail_depth + 1]) + float(C2) * r ** (tail_depth + 2) / (1 - r)
    return MomentBracket(lower, lower + tail, False, exact, partial, C2)


@dataclass
class TruncatedMoment:
    value: Fraction
    bound: Fraction
    fitted_C2: Fraction


def truncated_neg_moment(d: int, i: int, kappa: int, field: FieldSpec, cap: int = DEFAULT_ENUM_CAP) -> TruncatedMoment:
    """sum_{l < kappa} q^{l(d-i+1)} mu(level l), with the C2*kappa comparison value."""
    if kappa < 1:
        raise ValueError("kappa must be at least 1")
    q = Fraction(field.q)
    ex = d - i + 1
    mus = level_measures(d, i, kappa, field, cap)
    val = sum((q ** (lv * ex) * (mus[lv] - mus[lv + 1]) for lv in range(kappa)), Fraction(0))
    C2 = max(mu * q ** (lv * ex) for lv, mu in enumerate(mus))
    return TruncatedMoment(val, C2 * kappa, C2)


# ---------------------------------------------------------------------------
# contraction integrals


def _norm_exponent(w: WedgeVector) -> int:
    """log_q of the sup norm; raises PrecisionError when undetermined."""
    best = None
    for x in w.coords.values():
        if x.is_nonzero():
            e = -x.v0
            if best is None or e > best:
                best = e
    lows = [x for x in w.coords.values() if not x.is_nonzero() and not x.is_exact()]
    if best is None:
        if lows:
            raise PrecisionError("norm undetermined at working precision")
        raise ValueError("zero wedge vector")
    for x in lows:
        if -x.prec >= best:
            raise PrecisionError("norm undetermined at working precision")
    return best


def _summarise(values: list, trials: int, seed: int, engine: str) -> MeasureResult:
    mean = math.fsum(values) / trials
    var = math.fsum((x - mean) ** 2 for x in values) / max(trials - 1, 1)
    return MeasureResult(mean, MONTE_CARLO, engine, trials=trials, seed=seed, stderr=math.sqrt(var / trials))


def contraction_integrand(s: KMatrix, v: WedgeVector, spec: FlowSpec, b: Fraction) -> float:
    g = flow_matrix(spec, s.field) @ horospherical(s)
    return float(s.field.q) ** (-float(b) * _norm_exponent(exterior_action(g, v)))


def contraction_integral_U(m: int, n: int, t: int, v: WedgeVector, trials: int, seed: int,
                           exact: bool = False, cap: int = DEFAULT_ENUM_CAP) -> MeasureResult:
    """Integral over s in M_{m,n}(O) of ||g_t u_s v||^{-beta_i}.

    The integrand depends on s only modulo pi^{(m+n)t}, so s is drawn as an
    exact polynomial of that degree. With exact=True all cylinders are summed.
    """
    F = v.field
    if v.d != m + n or not 1 <= v.i <= m + n - 1:
        raise ValueError("v must be an i-vector in dimension m+n with 1 <= i <= m+n-1")
    b = beta(m, n, v.i)
    spec = FlowSpec(m, n, t)
    depth = spec.depth()
    if exact:
        total = F.q ** (m * n * depth)
        if total > cap:
            raise CapExceededError(f"{total} cylinders exceed the cap {cap}")
        ring = TruncatedRing(F, depth)
        acc = Fraction(0) if b.denominator == 1 else 0.0
        for code in range(total):
            ent = []
            for _ in range(m * n):
                code, r = divmod(code, ring.size)
                ent.append(LaurentElement(F, 0, ring.digits(r)))
            s = KMatrix(F, [ent[r * n:(r + 1) * n] for r in range(m)])
            e = _norm_exponent(exterior_action(flow_matrix(spec, F) @ horospherical(s), v))
            acc += Fraction(F.q) ** (-int(b) * e) if b.denominator == 1 else float(F.q) ** (-float(b) * e)
        return MeasureResult(acc / total, EXACT_COUNT, "cylinders", count=None, total=total)
    values = []
    for tr in range(trials):
        rng = trial_rng(seed, tr, "U")
        s = sample_cylinder(F, m, n, depth, rng)
        values.append(contraction_integrand(s, v, spec, b))
    return _summarise(values, trials, seed, "cylinders")


def contraction_integral_SL(m: int, n: int, t: int, v: WedgeVector, trials: int, seed: int,
                            precision: int = 24) -> MeasureResult:
    """Integral over Haar-random k in SL_{m+n}(O) of ||g_t k v||^{-beta_i}, for i <= m."""
    F = v.field
    if v.d != m + n:
        raise ValueError("v lives in the wrong dimension")
    if not 1 <= v.i <= m:
        raise ValueError("the SL integral is defined here for 1 <= i <= m")
    b = beta(m, n, v.i)
    spec = FlowSpec(m, n, t)
    g = flow_matrix(spec, F)
    values = []
    for tr in range(trials):
        k = sample_SL_O(F, m + n, precision, seed, tr)
        e = _norm_exponent(exterior_action(g @ k, v))
        values.append(float(F.q) ** (-float(b) * e))
    return _summarise(values, trials, seed, "haar-SL")


def log_slope(ts, values, base: float) -> float:
    """Least-squares slope of log_base(values) against ts."""
    xs = [float(t) for t in ts]
    ys = [math.log(v, base) for v in values]
    mx, my = sum(xs) / len(xs), sum(ys) / len(ys)
    num = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    den = sum((x - mx) ** 2 for x in xs)
    return num / den

"""F_q[T]-lattices in F_q((1/T))^d.

A lattice is given by a basis matrix whose columns generate it.  Reduction
makes the leading-coefficient vectors of the columns independent over F_q;
the sorted column norms of a reduced basis are the successive minima and
the minimal norm of an i-dimensional rational subspace is the product of the
i smallest of them.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import poly
from .exterior import KMatrix, ShapeError, sup_norm, wedge
from .gf import CapExceededError, FieldSpec
from .laurent import LaurentElement

DEFAULT_ORACLE_CAP = 1 << 16


class SingularBasisError(ValueError):
    pass


class SaturationError(ValueError):
    pass


def _column_exponent(col) -> int:
    """log_q of the sup norm of an exact column (T-degree of the largest entry)."""
    best = None
    for x in col:
        if x.coeffs:
            e = -x.v0
            if best is None or e > best:
                best = e
    if best is None:
        raise SingularBasisError("zero column: the basis is singular")
    return best


def _fq_dependency(F: FieldSpec, vectors, order):
    """First F_q-linear dependency among vectors[order[0]], vectors[order[1]], ...

    Returns {index: coefficient code} with the last-added index having
    coefficient 1, or None when the vectors are independent.
    """
    mul, add, neg, inv = F.mul_table, F.add_table, F.neg_table, F.inv_table
    echelon = []  # (pivot, reduced vector, combination dict)
    for j in order:
        v = list(vectors[j])
        comb = {j: 1}
        for piv, w, wc in echelon:
            c = v[piv]
            if c:
                f = neg[c]
                row = mul[f]
                v = [add[a][row[b]] for a, b in zip(v, w)]
                for k, x in wc.items():
                    comb[k] = add[comb.get(k, 0)][row[x]]
        piv = next((r for r, c in enumerate(v) if c), None)
        if piv is None:
            return {k: c for k, c in comb.items() if c}
        s = inv[v[piv]]
        row = mul[s]
        echelon.append((piv, [row[a] for a in v], {k: row[x] for k, x in comb.items()}))
    return None


def reduce_columns(F: FieldSpec, cols):
    """Reduce exact columns in place order; returns (columns, exponents) sorted by norm."""
    cols = [list(c) for c in cols]
    d = len(cols[0]) if cols else 0
    exps = [_column_exponent(c) for c in cols]
    while True:
        lead = []
        for c, e in zip(cols, exps):
            lead.append([x.coeffs[0] if x.coeffs and x.v0 == -e else 0 for x in c])
        order = sorted(range(len(cols)), key=lambda j: (exps[j], j))
        dep = _fq_dependency(F, lead, order)
        if dep is None:
            break
        j0 = max(dep, key=lambda j: (exps[j], order.index(j)))
        inv0 = F.inv_table[dep[j0]]
        new = list(cols[j0])
        for j, c in dep.items():
            if j == j0:
                continue
            f = F.mul_table[c][inv0]
            sh = exps[j] - exps[j0]
            for r in range(d):
                x = cols[j][r]
                if x.coeffs:
                    new[r] = new[r] + x.shift(sh).scale(f)
        cols[j0] = new
        exps[j0] = _column_exponent(new)
    order = sorted(range(len(cols)), key=lambda j: (exps[j], j))
    return [cols[j] for j in order], [exps[j] for j in order]


class PolyLattice:
    """Lattice spanned over F_q[T] by the columns of an exact basis matrix."""

    __slots__ = ("basis", "_reduced", "_exps")

    def __init__(self, basis: KMatrix):
        if not basis.is_square():
            raise ShapeError("lattice basis must be square")
        if not basis.is_exact():
            raise ValueError("lattice basis entries must be exact Laurent polynomials")
        self.basis = basis
        self._reduced = None
        self._exps = None

    @classmethod
    def standard(cls, field: FieldSpec, d: int) -> "PolyLattice":
        return cls(KMatrix.identity(field, d))

    @property
    def field(self) -> FieldSpec:
        return self.basis.field

    @property
    def d(self) -> int:
        return self.basis.rows

    def _reduce(self):
        if self._reduced is None:
            cols, exps = reduce_columns(self.field, self.basis.columns())
            self._reduced = KMatrix.from_columns(self.field, cols)
            self._exps = tuple(exps)
        return self._reduced, self._exps

    @property
    def exponents(self) -> tuple[int, ...]:
        """log_q of the successive minima, ascending."""
        return self._reduce()[1]

    def reduced(self) -> "PolyLattice":
        red, exps = self._reduce()
        out = PolyLattice(red)
        out._reduced, out._exps = red, exps
        return out

    def transform(self, g: KMatrix) -> "PolyLattice":
        """The lattice g.x, built from the reduced basis of x."""
        return PolyLattice(g @ self._reduce()[0])

    def __str__(self):
        return str(self.basis)


def reduce_basis(x: PolyLattice) -> PolyLattice:
    return x.reduced()


def successive_minima(x: PolyLattice) -> list[Fraction]:
    q = Fraction(x.field.q)
    return [q ** e for e in x.exponents]


def alpha(x: PolyLattice, i: int) -> Fraction:
    if not 0 <= i <= x.d:
        raise ValueError(f"alpha index {i} outside 0..{x.d}")
    return Fraction(x.field.q) ** (-sum(x.exponents[:i]))


def alphas(x: PolyLattice) -> list[Fraction]:
    """alpha_0 .. alpha_d from a single reduction."""
    q = Fraction(x.field.q)
    out, acc = [Fraction(1)], 0
    for e in x.exponents:
        acc += e
        out.append(q ** (-acc))
    return out


def covolume(x: PolyLattice) -> Fraction:
    det = x.basis.det()
    if not det.is_nonzero():
        raise SingularBasisError("singular basis")
    return det.abs() * Fraction(x.field.q) ** (-x.d)


def vector_norm(vec) -> Fraction:
    best = Fraction(0)
    for x in vec:
        a = x.abs()
        if a > best:
            best = a
    return best


# ---------------------------------------------------------------------------
# independent oracles


def _cramer_degree_bound(x: PolyLattice, r: int) -> list[int]:
    """Degrees of the coefficients of any lattice vector of norm <= q^r.

    By Cramer's rule a_j = det(B with column j replaced by v)/det B, so
    deg a_j <= r + sum_{k != j} e_k - deg det.
    """
    cols = x.basis.columns()
    e = [_column_exponent(c) for c in cols]
    D = x.basis.det().degree_T()
    total = sum(e)
    return [r + total - e[j] - D for j in range(x.d)]


def certified_degree_bound(x: PolyLattice) -> int:
    """A coefficient degree bound valid for all vectors of norm <= every lambda_j."""
    e = [_column_exponent(c) for c in x.basis.columns()]
    return max(0, max(_cramer_degree_bound(x, max(e))))


def _atoms(x: PolyLattice, degree_bound):
    bounds = [degree_bound] * x.d if isinstance(degree_bound, int) else list(degree_bound)
    atoms = []
    for j, col in enumerate(x.basis.columns()):
        for k in range(bounds[j] + 1):
            atoms.append([c.shift(-k) for c in col])
    return atoms


def enumerate_lattice_vectors(x: PolyLattice, degree_bound, cap: int = DEFAULT_ORACLE_CAP):
    """Yield every sum p_1 b_1 + ... + p_d b_d with deg p_j <= degree_bound, zero excluded.

    degree_bound is one int for all columns or a per-column sequence (negative: p_j = 0).

    Uses the modular q-ary Gray code so that each step adds one atom T^k b_j.
    """
    q = x.field.q
    atoms = _atoms(x, degree_bound)
    n = len(atoms)
    if q ** n > cap:
        raise CapExceededError(f"{q}^{n} coefficient tuples exceed oracle cap {cap}")
    v = [LaurentElement.zero(x.field)] * x.d
    prev = [0] * n
    for count in range(1, q ** n):
        digits, c = [], count
        for _ in range(n):
            digits.append(c % q)
            c //= q
        gray = [(digits[k] - (digits[k + 1] if k + 1 < n else 0)) % q for k in range(n)]
        k = next(i for i in range(n) if gray[i] != prev[i])
        prev = gray
        v = [a + b for a, b in zip(v, atoms[k])]
        yield v


def shortest_vector_oracle(x: PolyLattice, degree_bound: int, cap: int = DEFAULT_ORACLE_CAP):
    """Exhaustive minimum norm over bounded-degree coefficient tuples."""
    best, best_v = None, None
    for v in enumerate_lattice_vectors(x, degree_bound, cap):
        nv = vector_norm(v)
        if nv == 0:
            continue
        if best is None or nv < best:
            best, best_v = nv, list(v)
    return best_v, best


def greedy_minima_oracle(x: PolyLattice, degree_bound=None, cap: int = DEFAULT_ORACLE_CAP) -> list[Fraction]:
    """Successive minima by greedy independent selection among enumerated vectors.

    Without a degree bound the search radius q^r grows from the smallest
    possible minimum; at each r every lattice vector of norm <= q^r is listed,
    either through bounded coefficient tuples or, for polynomial bases, by
    testing every polynomial vector of degree <= r for membership, whichever
    is smaller. The first r yielding d independent vectors is certified.
    """
    if degree_bound is not None:
        return _greedy(x, enumerate_lattice_vectors(x, degree_bound, cap))
    e = [_column_exponent(c) for c in x.basis.columns()]
    D = x.basis.det().degree_T()
    polynomial = all(c.is_zero() or c.top_exponent <= 0 for row in x.basis.entries for c in row)
    q = x.field.q
    for r in range(-(-D // x.d), max(e) + 1):
        bounds = _cramer_degree_bound(x, r)
        by_coeffs = sum(max(0, b + 1) for b in bounds)
        if polynomial and r >= 0 and x.d * (r + 1) < by_coeffs:
            if q ** (x.d * (r + 1)) > cap:
                raise CapExceededError(f"{q}^{x.d * (r + 1)} polynomial vectors exceed oracle cap {cap}")
            vecs = _ball_by_membership(x, r)
        else:
            vecs = enumerate_lattice_vectors(x, bounds, cap)
        norms = _greedy(x, vecs, Fraction(q) ** r)
        if len(norms) == x.d:
            return norms
    raise AssertionError("basis columns bound the last minimum")


def _ball_by_membership(x: PolyLattice, r: int):
    """Every nonzero v in F_q[T]^d of degree <= r with adj(B) v = 0 mod det B."""
    F, d = x.field, x.d
    det = _to_T_poly(x.basis.det())
    adj = x.basis.adjugate()
    atoms = []
    for i in range(d):
        for k in range(r + 1):
            img = [poly.divmod_poly(F, poly.shift(_to_T_poly(adj[row, i]), k), det)[1] for row in range(d)]
            atoms.append((i, k, img))
    q, n = F.q, len(atoms)
    v = [()] * d
    img = [()] * d
    prev = [0] * n
    for count in range(1, q ** n):
        digits, c = [], count
        for _ in range(n):
            digits.append(c % q)
            c //= q
        gray = [(digits[j] - (digits[j + 1] if j + 1 < n else 0)) % q for j in range(n)]
        j = next(i for i in range(n) if gray[i] != prev[i])
        prev = gray
        i, k, a = atoms[j]
        v[i] = poly.add(F, v[i], poly.shift((1,), k))
        img = [poly.add(F, y, z) for y, z in zip(img, a)]
        if not any(img):
            yield [_from_T_poly(F, c) for c in v]


def _greedy(x: PolyLattice, vectors, limit: Fraction | None = None) -> list[Fraction]:
    vecs = [(vector_norm(v), list(v)) for v in vectors]
    if limit is not None:
        vecs = [t for t in vecs if t[0] <= limit]
    vecs.sort(key=lambda t: t[0])
    chosen, norms = [], []
    for nv, v in vecs:
        if nv == 0:
            continue
        trial = chosen + [v]
        if any(c.is_nonzero() for c in wedge(trial).coords.values()):
            chosen = trial
            norms.append(nv)
            if len(chosen) == x.d:
                break
    return norms


def _fq_rank(F: FieldSpec, rows) -> int:
    mul, add, neg, inv = F.mul_table, F.add_table, F.neg_table, F.inv_table
    rows = [list(r) for r in rows if any(r)]
    rank = 0
    ncols = len(rows[0]) if rows else 0
    for c in range(ncols):
        piv = next((i for i in range(rank, len(rows)) if rows[i][c]), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        s = mul[inv[rows[rank][c]]]
        rows[rank] = [s[a] for a in rows[rank]]
        for i in range(len(rows)):
            if i != rank and rows[i][c]:
                f = mul[neg[rows[i][c]]]
                rows[i] = [add[a][f[b]] for a, b in zip(rows[i], rows[rank])]
        rank += 1
    return rank


def ball_dimension(x: PolyLattice, r: int) -> int:
    """dim over F_q of {v in x : |v| <= q^r}, by linear algebra on coefficients."""
    F = x.field
    bounds = _cramer_degree_bound(x, r)
    cols = x.basis.columns()
    unknowns = [(j, k) for j in range(x.d) for k in range(bounds[j] + 1)]
    if not unknowns:
        return 0
    # constraint rows: for each coordinate and each T-exponent above r, coefficient vanishes
    constraints = {}
    for u, (j, k) in enumerate(unknowns):
        for row, entry in enumerate(cols[j]):
            for idx, c in enumerate(entry.coeffs):
                texp = -(entry.v0 + idx) + k
                if texp > r and c:
                    constraints.setdefault((row, texp), [0] * len(unknowns))[u] = c
    rank = _fq_rank(F, list(constraints.values()))
    return len(unknowns) - rank


def minima_by_ball_dimension(x: PolyLattice) -> list[Fraction]:
    """Successive minima from the jumps of r -> dim(x intersected with the q^r ball)."""
    e = [_column_exponent(c) for c in x.basis.columns()]
    D = x.basis.det().degree_T()
    r_hi = max(e)
    r_lo = D - (x.d - 1) * r_hi
    q = Fraction(x.field.q)
    out = []
    prev_dim = ball_dimension(x, r_lo - 1)
    prev_jump = 0
    for r in range(r_lo, r_hi + 1):
        dim = ball_dimension(x, r)
        jump = dim - prev_dim
        out.extend([q ** r] * (jump - prev_jump))
        prev_dim, prev_jump = dim, jump
    return out


# ---------------------------------------------------------------------------
# F_q[T] linear algebra for rational subspaces


def _to_T_poly(x: LaurentElement) -> tuple[int, ...]:
    if not x.coeffs:
        return ()
    if x.top_exponent > 0:
        raise ValueError("entry is not a polynomial in T")
    out = [0] * (-x.v0 + 1)
    for idx, c in enumerate(x.coeffs):
        out[-(x.v0 + idx)] = c
    return poly.trim(out)


def _from_T_poly(F: FieldSpec, a) -> LaurentElement:
    return LaurentElement.from_T_poly(F, a) if a else LaurentElement.zero(F)


def column_echelon(F: FieldSpec, M):
    """Unimodular column operations M.V = H with H in column echelon form.

    M is a list of rows of T-polynomials.  Returns (H, V, rank); the last
    k - rank columns of V form an F_q[T]-basis of the kernel of M.
    """
    r = len(M)
    k = len(M[0]) if M else 0
    A = [list(row) for row in M]
    V = [[(1,) if i == j else () for j in range(k)] for i in range(k)]

    def swap(c1, c2):
        for mat in (A, V):
            for row in mat:
                row[c1], row[c2] = row[c2], row[c1]

    def axpy(dst, src, f):
        # column dst -= f * column src
        for mat in (A, V):
            for row in mat:
                if row[src]:
                    row[dst] = poly.sub(F, row[dst], poly.mul(F, f, row[src]))

    piv = 0
    for i in range(r):
        if piv >= k:
            break
        while True:
            nz = [c for c in range(piv, k) if A[i][c]]
            if not nz:
                break
            cmin = min(nz, key=lambda c: (poly.deg(A[i][c]), c))
            if cmin != piv:
                swap(cmin, piv)
            clean = True
            for c in range(piv + 1, k):
                if A[i][c]:
                    quo, _ = poly.divmod_poly(F, A[i][c], A[i][piv])
                    axpy(c, piv, quo)
                    if A[i][c]:
                        clean = False
            if clean:
                break
        if A[i][piv]:
            piv += 1
    return A, V, piv


def poly_kernel(F: FieldSpec, M, ncols: int):
    """F_q[T]-basis (as columns) of {c : M c = 0}."""
    if not M:
        return [[(1,) if i == j else () for j in range(ncols)] for i in range(ncols)]
    _, V, rank = column_echelon(F, M)
    return [row[rank:] for row in V]


def _transpose(M, ncols):
    return [[M[i][j] for i in range(len(M))] for j in range(ncols)]


def saturate_coordinates(F: FieldSpec, A, d: int):
    """Saturation in F_q[T]^d of the column span of the d x k polynomial matrix A.

    Returns (basis as d x r polynomial matrix, r).
    """
    k = len(A[0]) if A else 0
    if k == 0:
        return [[] for _ in range(d)], 0
    At = _transpose(A, k)  # k x d
    left = poly_kernel(F, At, d)  # d x (d - r)
    nleft = len(left[0]) if left and left[0] is not None else 0
    if nleft == 0:
        basis = [[(1,) if i == j else () for j in range(d)] for i in range(d)]
        return basis, d
    Kt = _transpose(left, nleft)  # (d - r) x d
    sat = poly_kernel(F, Kt, d)
    return sat, len(sat[0]) if sat else 0


@dataclass(frozen=True)
class RationalSubspace:
    lattice: PolyLattice
    generators: KMatrix  # d x i, columns form a basis of L intersected with the lattice
    coords: tuple  # the same basis in lattice coordinates (T-polynomials)

    @property
    def i(self) -> int:
        return self.generators.cols


def _lattice_coordinates(x: PolyLattice, vectors: KMatrix):
    """Polynomial coordinate columns spanning the same K-space as the vectors."""
    adj = x.basis.adjugate()
    raw = adj @ vectors
    cols = []
    for col in raw.columns():
        top = max((c.top_exponent for c in col if c.coeffs), default=None)
        if top is None:
            cols.append([()] * x.d)
            continue
        cols.append([_to_T_poly(c.shift(-top)) if c.coeffs else () for c in col])
    return [[cols[j][r] for j in range(len(cols))] for r in range(x.d)]


def _subspace_from_coords(x: PolyLattice, C, r: int) -> RationalSubspace:
    F = x.field
    coord_cols = [[C[row][j] for row in range(x.d)] for j in range(r)]
    vecs = []
    for col in coord_cols:
        vecs.append(x.basis.apply([_from_T_poly(F, a) for a in col]))
    gens = KMatrix.from_columns(F, vecs) if vecs else KMatrix(F, [[] for _ in range(x.d)])
    return RationalSubspace(x, gens, tuple(tuple(c) for c in coord_cols))


def saturate(x: PolyLattice, vectors: KMatrix, allow_dependent: bool = False) -> RationalSubspace:
    """Basis of {v in x : v in the K-span of the given columns}."""
    if vectors.rows != x.d:
        raise ShapeError("vectors must have the lattice dimension")
    if not vectors.is_exact():
        raise ValueError("saturation needs exact vectors")
    A = _lattice_coordinates(x, vectors)
    C, r = saturate_coordinates(x.field, A, x.d)
    if r < vectors.cols and not allow_dependent:
        raise SaturationError(f"{vectors.cols} generators span only a {r}-dimensional space")
    return _subspace_from_coords(x, C, r)


def _poly_quotient(F: FieldSpec, a: LaurentElement, b: LaurentElement):
    """a/b as a T-polynomial, or None when it is not one."""
    if not a.coeffs:
        return ()
    s = max(a.top_exponent, b.top_exponent)
    pa, pb = _to_T_poly(a.shift(-s)), _to_T_poly(b.shift(-s))
    quo, rem = poly.divmod_poly(F, pa, pb)
    return None if rem else quo


def lattice_coordinates(x: PolyLattice, vectors: KMatrix):
    """Exact coordinates (T-polynomials) of the columns, or None if some column is not in x."""
    F = x.field
    det = x.basis.det()
    raw = x.basis.adjugate() @ vectors
    out = []
    for col in raw.columns():
        coords = [_poly_quotient(F, a, det) for a in col]
        if any(c is None for c in coords):
            return None
        out.append(coords)
    return out


def is_saturated(x: PolyLattice, vectors: KMatrix) -> bool:
    """True when the columns lie in x and form a basis of their saturation."""
    if vectors.cols == 0:
        return True
    if lattice_coordinates(x, vectors) is None:
        return False
    sat = saturate(x, vectors)
    return sup_norm(wedge(vectors.columns())) == sup_norm(wedge(sat.generators.columns()))


def subspace_norm(x: PolyLattice, L: RationalSubspace | KMatrix, auto_saturate: bool = False) -> Fraction:
    if isinstance(L, KMatrix):
        if not auto_saturate and not is_saturated(x, L):
            raise SaturationError("generators are not saturated in the lattice")
        L = saturate(x, L)
    if L.i == 0:
        return Fraction(1)
    return sup_norm(wedge(L.generators.columns()))


def subspace_sum(L1: RationalSubspace, L2: RationalSubspace) -> RationalSubspace:
    x = L1.lattice
    F = x.field
    A = [[*(L1.coords[j][r] for j in range(L1.i)), *(L2.coords[j][r] for j in range(L2.i))]
         for r in range(x.d)]
    C, r = saturate_coordinates(F, A, x.d)
    return _subspace_from_coords(x, C, r)


def subspace_intersection(L1: RationalSubspace, L2: RationalSubspace) -> RationalSubspace:
    x = L1.lattice
    F = x.field
    k1, k2 = L1.i, L2.i
    if k1 == 0 or k2 == 0:
        return _subspace_from_coords(x, [[] for _ in range(x.d)], 0)
    M = [[*(L1.coords[j][r] for j in range(k1)), *(L2.coords[j][r] for j in range(k2))]
         for r in range(x.d)]
    Z = poly_kernel(F, M, k1 + k2)
    nz = len(Z[0]) if Z else 0
    if nz == 0:
        return _subspace_from_coords(x, [[] for _ in range(x.d)], 0)
    gens = []
    for col in range(nz):
        v = [()] * x.d
        for j in range(k1):
            f = Z[j][col]
            if f:
                v = [poly.add(F, a, poly.mul(F, f, L1.coords[j][r])) for r, a in enumerate(v)]
        gens.append(v)
    A = [[gens[c][r] for c in range(nz)] for r in range(x.d)]
    C, r = saturate_coordinates(F, A, x.d)
    return _subspace_from_coords(x, C, r)

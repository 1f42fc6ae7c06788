"""Matrices over F_q((pi)), exterior powers with the sup norm, the Hodge dual
and the P(O).U(O) factorization of the congruence subgroup.

Index sets are 1-based sorted tuples, as in e_{1,3} = e_1 ^ e_3.
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from itertools import combinations

from .gf import FieldSpec
from .laurent import LaurentElement, format_laurent, parse_laurent


class ShapeError(ValueError):
    pass


@lru_cache(maxsize=None)
def subsets(d: int, i: int) -> tuple[tuple[int, ...], ...]:
    """All i-subsets of {1..d} in canonical (lexicographic) order."""
    return tuple(combinations(range(1, d + 1), i))


def complement(I, d: int) -> tuple[int, ...]:
    s = set(I)
    return tuple(j for j in range(1, d + 1) if j not in s)


def check_subset(I, d: int) -> tuple[int, ...]:
    I = tuple(I)
    if any(a >= b for a, b in zip(I, I[1:])) or (I and (I[0] < 1 or I[-1] > d)):
        raise ValueError(f"{I} is not a sorted subset of 1..{d}")
    return I


def hodge_sign_exponent(I) -> int:
    i = len(I)
    return i * (i + 1) // 2 + sum(I)


class KMatrix:
    __slots__ = ("field", "rows", "cols", "entries")

    def __init__(self, field: FieldSpec, entries):
        rows = [tuple(r) for r in entries]
        if rows and any(len(r) != len(rows[0]) for r in rows):
            raise ShapeError("ragged matrix")
        self.field = field
        self.entries = tuple(rows)
        self.rows = len(rows)
        self.cols = len(rows[0]) if rows else 0

    @classmethod
    def zeros(cls, field: FieldSpec, r: int, c: int) -> "KMatrix":
        z = LaurentElement.zero(field)
        return cls(field, [[z] * c for _ in range(r)])

    @classmethod
    def identity(cls, field: FieldSpec, d: int) -> "KMatrix":
        z, o = LaurentElement.zero(field), LaurentElement.one(field)
        return cls(field, [[o if r == c else z for c in range(d)] for r in range(d)])

    @classmethod
    def diag(cls, field: FieldSpec, elems) -> "KMatrix":
        elems = list(elems)
        z = LaurentElement.zero(field)
        d = len(elems)
        return cls(field, [[elems[r] if r == c else z for c in range(d)] for r in range(d)])

    @classmethod
    def from_ints(cls, field: FieldSpec, grid) -> "KMatrix":
        return cls(field, [[LaurentElement.const(field, c) for c in row] for row in grid])

    @classmethod
    def from_columns(cls, field: FieldSpec, columns) -> "KMatrix":
        columns = [list(c) for c in columns]
        return cls(field, [list(r) for r in zip(*columns)])

    @classmethod
    def blocks(cls, field: FieldSpec, grid) -> "KMatrix":
        """Assemble from a grid of KMatrix blocks."""
        rows = []
        for brow in grid:
            for r in range(brow[0].rows):
                rows.append([x for b in brow for x in b.entries[r]])
        return cls(field, rows)

    @classmethod
    def parse(cls, text: str, field: FieldSpec) -> "KMatrix":
        """Rows separated by ';' and entries by '|' or ','."""
        rows = []
        for line in text.strip().strip("[]").split(";"):
            sep = "|" if "|" in line else ","
            rows.append([parse_laurent(tok.strip(" []"), field) for tok in line.split(sep)])
        return cls(field, rows)

    def __getitem__(self, rc):
        r, c = rc
        return self.entries[r][c]

    def column(self, j: int) -> list[LaurentElement]:
        return [row[j] for row in self.entries]

    def columns(self) -> list[list[LaurentElement]]:
        return [self.column(j) for j in range(self.cols)]

    def submatrix(self, rows, cols) -> "KMatrix":
        """Rows and columns given 0-based."""
        return KMatrix(self.field, [[self.entries[r][c] for c in cols] for r in rows])

    def block(self, r0: int, r1: int, c0: int, c1: int) -> "KMatrix":
        return self.submatrix(range(r0, r1), range(c0, c1))

    def transpose(self) -> "KMatrix":
        return KMatrix(self.field, [list(c) for c in zip(*self.entries)])

    def is_exact(self) -> bool:
        return all(x.prec is None for row in self.entries for x in row)

    def is_square(self) -> bool:
        return self.rows == self.cols

    def __matmul__(self, other: "KMatrix") -> "KMatrix":
        if self.cols != other.rows:
            raise ShapeError(f"cannot multiply {self.rows}x{self.cols} by {other.rows}x{other.cols}")
        ocols = other.columns()
        out = []
        for row in self.entries:
            out_row = []
            for col in ocols:
                acc = None
                for a, b in zip(row, col):
                    if a.is_zero() or b.is_zero():
                        continue
                    t = a * b
                    acc = t if acc is None else acc + t
                out_row.append(acc if acc is not None else LaurentElement.zero(self.field))
            out.append(out_row)
        return KMatrix(self.field, out)

    def apply(self, vec) -> list[LaurentElement]:
        if len(vec) != self.cols:
            raise ShapeError("vector length does not match matrix")
        return (self @ KMatrix(self.field, [[x] for x in vec])).column(0)

    def __add__(self, other: "KMatrix") -> "KMatrix":
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ShapeError("shape mismatch in addition")
        return KMatrix(self.field, [[a + b for a, b in zip(r1, r2)]
                                    for r1, r2 in zip(self.entries, other.entries)])

    def __neg__(self):
        return KMatrix(self.field, [[-a for a in r] for r in self.entries])

    def __sub__(self, other: "KMatrix") -> "KMatrix":
        return self + (-other)

    def scale(self, x: LaurentElement) -> "KMatrix":
        return KMatrix(self.field, [[x * a for a in r] for r in self.entries])

    def map(self, fn) -> "KMatrix":
        return KMatrix(self.field, [[fn(a) for a in r] for r in self.entries])

    def truncate(self, k: int) -> "KMatrix":
        return self.map(lambda a: a.truncate(k))

    def agrees_with(self, other: "KMatrix") -> bool:
        return (self.rows, self.cols) == (other.rows, other.cols) and all(
            a.agrees_with(b) for r1, r2 in zip(self.entries, other.entries) for a, b in zip(r1, r2))

    def __eq__(self, other):
        if not isinstance(other, KMatrix):
            return NotImplemented
        return self.field == other.field and self.entries == other.entries

    def __hash__(self):
        return hash(self.entries)

    def __str__(self):
        return "[" + "; ".join(" | ".join(format_laurent(x) for x in r) for r in self.entries) + "]"

    __repr__ = __str__

    # determinants
    def det(self) -> LaurentElement:
        if not self.is_square():
            raise ShapeError("determinant of a non-square matrix")
        d = self.rows
        if d == 0:
            return LaurentElement.one(self.field)
        return wedge(self.columns()).coords[tuple(range(1, d + 1))]

    def minor(self, rowsJ, colsI) -> LaurentElement:
        return minor(self, rowsJ, colsI)

    def adjugate(self) -> "KMatrix":
        d = self.rows
        if not self.is_square():
            raise ShapeError("adjugate of a non-square matrix")
        if d == 1:
            return KMatrix.identity(self.field, 1)
        comp = compound(self, d - 1)
        F = self.field
        out = [[None] * d for _ in range(d)]
        for r in range(d):
            for c in range(d):
                # adj[r][c] = (-1)^(r+c) det(minor deleting row c, col r)
                J = complement((c + 1,), d)
                I = complement((r + 1,), d)
                m = comp[I][J]
                out[r][c] = m.scale(F.sign(r + c)) if not m.is_zero() else m
        return KMatrix(F, out)

    def inverse(self, prec: int | None = None) -> "KMatrix":
        """Adjugate divided by the determinant; exact when det is a monomial."""
        det = self.det()
        if not det.is_nonzero():
            raise ZeroDivisionError("matrix is singular (or singular to available precision)")
        adj = self.adjugate()
        if det == LaurentElement.one(self.field):
            return adj
        return adj.scale(det.inv(prec))


class WedgeVector:
    __slots__ = ("field", "d", "i", "coords")

    def __init__(self, field: FieldSpec, d: int, i: int, coords=None):
        self.field, self.d, self.i = field, d, i
        z = LaurentElement.zero(field)
        base = {I: z for I in subsets(d, i)}
        if coords:
            for I, x in coords.items():
                I = check_subset(I, d)
                if len(I) != i:
                    raise ShapeError(f"index {I} has wrong degree for degree {i}")
                base[I] = x
        self.coords = base

    @classmethod
    def basis(cls, field: FieldSpec, d: int, I) -> "WedgeVector":
        I = tuple(I)
        return cls(field, d, len(I), {I: LaurentElement.one(field)})

    def __getitem__(self, I) -> LaurentElement:
        return self.coords[tuple(I)]

    def items(self):
        return self.coords.items()

    def __add__(self, other: "WedgeVector") -> "WedgeVector":
        if (self.d, self.i) != (other.d, other.i):
            raise ShapeError("adding wedge vectors of different shapes")
        return WedgeVector(self.field, self.d, self.i,
                           {I: x + other.coords[I] for I, x in self.coords.items()})

    def __neg__(self):
        return WedgeVector(self.field, self.d, self.i, {I: -x for I, x in self.coords.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c: LaurentElement) -> "WedgeVector":
        return WedgeVector(self.field, self.d, self.i, {I: c * x for I, x in self.coords.items()})

    def norm(self, upper_bound: bool = False) -> Fraction:
        return sup_norm(self, upper_bound)

    def is_exact(self) -> bool:
        return all(x.prec is None for x in self.coords.values())

    def agrees_with(self, other: "WedgeVector") -> bool:
        return (self.d, self.i) == (other.d, other.i) and all(
            x.agrees_with(other.coords[I]) for I, x in self.coords.items())

    def __eq__(self, other):
        if not isinstance(other, WedgeVector):
            return NotImplemented
        return (self.d, self.i) == (other.d, other.i) and self.coords == other.coords

    def __hash__(self):
        return hash((self.d, self.i, tuple(self.coords.items())))

    def __str__(self):
        parts = []
        for I, x in self.coords.items():
            if x.is_zero():
                continue
            s = format_laurent(x)
            if " + " in s:
                s = f"({s})"
            parts.append(f"{s} * e{{{','.join(map(str, I))}}}")
        return " + ".join(parts) if parts else "0"

    __repr__ = __str__


def _wedge_step(F: FieldSpec, w: dict, vec, d: int, k: int) -> dict:
    """(w of degree k) ^ vec, as coordinates of degree k+1."""
    neg = F.neg_table
    out = {}
    for J in subsets(d, k + 1):
        acc = None
        for pos, r in enumerate(J):
            x = vec[r - 1]
            if x.is_zero():
                continue
            y = w[J[:pos] + J[pos + 1:]]
            if y.is_zero():
                continue
            t = y * x
            # e_{J minus r} ^ e_r = (-1)^(number of elements of J above r) e_J
            if (k - pos) % 2 and neg[1] != 1:
                t = -t
            acc = t if acc is None else acc + t
        out[J] = acc if acc is not None else LaurentElement.zero(F)
    return out


def wedge(vectors, field: FieldSpec | None = None) -> WedgeVector:
    vectors = [list(v) for v in vectors]
    if not vectors:
        if field is None:
            raise ShapeError("field required for the empty wedge")
        raise ShapeError("empty wedge needs an ambient dimension")
    d = len(vectors[0])
    if any(len(v) != d for v in vectors):
        raise ShapeError("vectors of different lengths")
    if len(vectors) > d:
        raise ShapeError("more vectors than the ambient dimension")
    F = vectors[0][0].field if field is None else field
    w = {(): LaurentElement.one(F)}
    for k, v in enumerate(vectors):
        w = _wedge_step(F, w, v, d, k)
    return WedgeVector(F, d, len(vectors), w)


def sup_norm(v: WedgeVector, upper_bound: bool = False) -> Fraction:
    best = Fraction(0)
    for x in v.coords.values():
        a = x.abs(upper_bound)
        if a > best:
            best = a
    return best


def minor(g: KMatrix, rowsJ, colsI) -> LaurentElement:
    J, I = tuple(rowsJ), tuple(colsI)
    if len(J) != len(I):
        raise ShapeError("minor needs equally many rows and columns")
    if not J:
        return LaurentElement.one(g.field)
    return g.submatrix([r - 1 for r in J], [c - 1 for c in I]).det()


def compound(g: KMatrix, i: int) -> dict:
    """comp[I][J] = det g_{J,I}: the coordinates of g e_I."""
    d = g.rows
    cols = g.columns()
    F = g.field
    cache = {(): {(): LaurentElement.one(F)}}
    for k in range(1, i + 1):
        for I in subsets(g.cols, k):
            cache[I] = _wedge_step(F, cache[I[:-1]], cols[I[-1] - 1], d, k - 1)
    return {I: cache[I] for I in subsets(g.cols, i)}


def exterior_action(g: KMatrix, v: WedgeVector) -> WedgeVector:
    if not g.is_square() or g.rows != v.d:
        raise ShapeError(f"matrix of size {g.rows}x{g.cols} cannot act on degree-{v.i} vectors in dimension {v.d}")
    comp = compound(g, v.i)
    F = g.field
    out = {J: None for J in subsets(v.d, v.i)}
    for I, x in v.coords.items():
        if x.is_zero():
            continue
        for J, m in comp[I].items():
            if m.is_zero():
                continue
            t = m * x
            out[J] = t if out[J] is None else out[J] + t
    z = LaurentElement.zero(F)
    return WedgeVector(F, v.d, v.i, {J: (y if y is not None else z) for J, y in out.items()})


def hodge_dual(v: WedgeVector) -> WedgeVector:
    F = v.field
    out = {}
    for I, x in v.coords.items():
        s = F.sign(hodge_sign_exponent(I))
        out[complement(I, v.d)] = x if s == 1 or x.is_zero() else -x
    return WedgeVector(F, v.d, v.d - v.i, out)


def is_in_GL_O(g: KMatrix) -> bool:
    """Entries in O and |det| = 1."""
    if not all(x.vlow >= 0 for row in g.entries for x in row):
        return False
    det = g.det()
    return det.is_nonzero() and det.v0 == 0


def pu_factor(x: KMatrix, m: int, n: int, prec: int | None = None) -> tuple[KMatrix, KMatrix]:
    """x = p.u with p lower block-triangular in P(O) and u in U(O)."""
    d = m + n
    if x.rows != d or x.cols != d:
        raise ShapeError(f"expected a {d}x{d} matrix")
    F = x.field
    one = LaurentElement.one(F)
    for r in range(d):
        for c in range(d):
            y = x[r, c] - one if r == c else x[r, c]
            if y.vlow < 1:
                raise ValueError("x is not congruent to the identity modulo pi")
    if (x.det() - one).is_nonzero():
        raise ValueError("x does not have determinant 1")
    A = x.block(0, m, 0, m)
    B = x.block(0, m, m, d)
    C = x.block(m, d, 0, m)
    D = x.block(m, d, m, d)
    detA = A.det()
    if not detA.is_nonzero() or detA.v0 != 0:
        raise ValueError("top-left block is not invertible over O")
    Ainv = A.inverse(prec)
    AinvB = Ainv @ B
    p = KMatrix.blocks(F, [[A, KMatrix.zeros(F, m, n)], [C, D - C @ AinvB]])
    u = KMatrix.blocks(F, [[KMatrix.identity(F, m), AinvB],
                           [KMatrix.zeros(F, n, m), KMatrix.identity(F, n)]])
    return p, u


def jacobi_sides(g: KMatrix, rowsJ, colsI) -> tuple[LaurentElement, LaurentElement]:
    """Both sides of det g_{J,I} = sigma_I sigma_J det(g^-T)_{J^c,I^c} for det g = 1."""
    d = g.rows
    J, I = tuple(rowsJ), tuple(colsI)
    lhs = minor(g, J, I)
    h = g.inverse().transpose()
    rhs = minor(h, complement(J, d), complement(I, d))
    if g.field.sign(hodge_sign_exponent(I) + hodge_sign_exponent(J)) != 1:
        rhs = -rhs
    return lhs, rhs

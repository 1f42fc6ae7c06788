"""Elements of F_q((pi)) with pi = 1/T.

A LaurentElement stores the coefficients of pi^v0, pi^(v0+1), ... as field
codes.  It is either exact (a Laurent polynomial) or known only modulo
pi^prec.  Precision is propagated pessimistically and an element that is
zero to its precision is never promoted to an exact zero.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction

from . import poly
from .gf import FieldMismatchError, FieldSpec, GfElem

DEFAULT_PRECISION = 64
INF = math.inf


class PrecisionError(ArithmeticError):
    """A quantity is not determined at the available precision."""


def _pmin(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


@dataclass(frozen=True)
class Valuation:
    value: float | int
    lower_bound: bool = False

    @property
    def is_infinite(self) -> bool:
        return self.value == INF

    def __str__(self):
        if self.lower_bound:
            return f">= {self.value}"
        return "inf" if self.is_infinite else str(self.value)


def _series_mul(F: FieldSpec, a, b, length: int) -> list[int]:
    """First `length` coefficients of the product of two coefficient lists."""
    a = a[:length]
    b = b[:length]
    if F.e == 1:
        p = F.p
        out = [0] * length
        for i, x in enumerate(a):
            if x:
                lim = min(len(b), length - i)
                for j in range(lim):
                    out[i + j] += x * b[j]
        return [c % p for c in out]
    add_t, mul_t = F.add_table, F.mul_table
    out = [0] * length
    for i, x in enumerate(a):
        if x:
            row = mul_t[x]
            lim = min(len(b), length - i)
            for j in range(lim):
                out[i + j] = add_t[out[i + j]][row[b[j]]]
    return out


def _series_inv(F: FieldSpec, c, length: int) -> list[int]:
    """First `length` coefficients of 1/c, where c[0] != 0."""
    inv0 = F.inv_table[c[0]]
    if F.e == 1:
        p = F.p
        w = [inv0]
        for k in range(1, length):
            s = 0
            for j in range(1, min(k, len(c) - 1) + 1):
                s += c[j] * w[k - j]
            w.append((-s * inv0) % p)
        return w
    add_t, mul_t, neg_t = F.add_table, F.mul_table, F.neg_table
    w = [inv0]
    for k in range(1, length):
        s = 0
        for j in range(1, min(k, len(c) - 1) + 1):
            s = add_t[s][mul_t[c[j]][w[k - j]]]
        w.append(mul_t[neg_t[s]][inv0])
    return w


class LaurentElement:
    __slots__ = ("field", "v0", "coeffs", "prec")

    def __init__(self, field: FieldSpec, v0: int, coeffs=(), prec: int | None = None):
        coeffs = list(coeffs)
        if prec is not None:
            keep = max(0, prec - v0)
            del coeffs[keep:]
        start = 0
        while start < len(coeffs) and coeffs[start] == 0:
            start += 1
        end = len(coeffs)
        while end > start and coeffs[end - 1] == 0:
            end -= 1
        self.field = field
        self.coeffs = tuple(coeffs[start:end])
        if self.coeffs:
            self.v0 = v0 + start
        else:
            self.v0 = prec if prec is not None else 0
        self.prec = prec

    # construction helpers
    @classmethod
    def zero(cls, field: FieldSpec, prec: int | None = None) -> "LaurentElement":
        return cls(field, 0 if prec is None else prec, (), prec)

    @classmethod
    def one(cls, field: FieldSpec) -> "LaurentElement":
        return cls(field, 0, (1,))

    @classmethod
    def monomial(cls, field: FieldSpec, c, j: int) -> "LaurentElement":
        code = c.code if isinstance(c, GfElem) else field.element(c).code
        return cls(field, j, (code,))

    @classmethod
    def pi_power(cls, field: FieldSpec, j: int) -> "LaurentElement":
        return cls(field, j, (1,))

    @classmethod
    def const(cls, field: FieldSpec, c) -> "LaurentElement":
        return cls.monomial(field, c, 0)

    @classmethod
    def from_T_poly(cls, field: FieldSpec, coeffs) -> "LaurentElement":
        """Exact element from polynomial coefficients in T, lowest first."""
        codes = [c.code if isinstance(c, GfElem) else field.element(c).code for c in coeffs]
        if not any(codes):
            return cls.zero(field)
        top = len(codes) - 1
        return cls(field, -top, list(reversed(codes)))

    @classmethod
    def from_pi_poly(cls, field: FieldSpec, coeffs, prec: int | None = None) -> "LaurentElement":
        codes = [c.code if isinstance(c, GfElem) else field.element(c).code for c in coeffs]
        return cls(field, 0, codes, prec)

    # queries
    def is_exact(self) -> bool:
        return self.prec is None

    def is_zero(self) -> bool:
        """True only for the exact zero."""
        return not self.coeffs and self.prec is None

    def is_nonzero(self) -> bool:
        return bool(self.coeffs)

    @property
    def vlow(self):
        """v0 when nonzero; otherwise the precision (or inf for exact zero)."""
        if self.coeffs:
            return self.v0
        return INF if self.prec is None else self.prec

    def valuation(self) -> Valuation:
        if self.coeffs:
            return Valuation(self.v0)
        if self.prec is None:
            return Valuation(INF)
        return Valuation(self.prec, lower_bound=True)

    def abs(self, upper_bound: bool = False) -> Fraction:
        q = self.field.q
        if self.coeffs:
            return Fraction(q) ** (-self.v0)
        if self.prec is None:
            return Fraction(0)
        if upper_bound:
            return Fraction(q) ** (-self.prec)
        raise PrecisionError(f"absolute value undetermined: zero to precision {self.prec}")

    def degree_T(self) -> int:
        """Exponent of the norm, |x| = q^degree_T; requires a nonzero value."""
        if not self.coeffs:
            raise PrecisionError("degree of a zero element")
        return -self.v0

    def coefficient(self, j: int) -> int:
        if self.prec is not None and j >= self.prec:
            raise PrecisionError(f"coefficient of pi^{j} unknown at precision {self.prec}")
        k = j - self.v0
        if self.coeffs and 0 <= k < len(self.coeffs):
            return self.coeffs[k]
        return 0

    @property
    def leading(self) -> int:
        return self.coeffs[0] if self.coeffs else 0

    @property
    def top_exponent(self) -> int:
        """Largest pi-exponent with a stored nonzero coefficient."""
        return self.v0 + len(self.coeffs) - 1

    # arithmetic
    def _coerce(self, y) -> "LaurentElement":
        if isinstance(y, LaurentElement):
            if y.field is not self.field and y.field != self.field:
                raise FieldMismatchError(f"mixed fields {self.field} and {y.field}")
            return y
        if isinstance(y, (int, GfElem)):
            return LaurentElement.const(self.field, y)
        return NotImplemented

    def __add__(self, y):
        y = self._coerce(y)
        if y is NotImplemented:
            return y
        prec = _pmin(self.prec, y.prec)
        if not y.coeffs:
            return self if prec == self.prec else LaurentElement(self.field, self.v0, self.coeffs, prec)
        if not self.coeffs:
            return y if prec == y.prec else LaurentElement(self.field, y.v0, y.coeffs, prec)
        lo = min(self.v0, y.v0)
        hi = max(self.top_exponent, y.top_exponent)
        if prec is not None:
            hi = min(hi, prec - 1)
        if hi < lo:
            return LaurentElement(self.field, lo, (), prec)
        out = [0] * (hi - lo + 1)
        o1 = self.v0 - lo
        for j, c in enumerate(self.coeffs):
            if o1 + j < len(out):
                out[o1 + j] = c
        tab = self.field.add_table
        o2 = y.v0 - lo
        for j, c in enumerate(y.coeffs):
            if o2 + j < len(out):
                out[o2 + j] = tab[out[o2 + j]][c]
        return LaurentElement(self.field, lo, out, prec)

    __radd__ = __add__

    def __neg__(self):
        tab = self.field.neg_table
        return LaurentElement(self.field, self.v0, [tab[c] for c in self.coeffs], self.prec)

    def __sub__(self, y):
        y = self._coerce(y)
        if y is NotImplemented:
            return y
        return self + (-y)

    def __rsub__(self, y):
        y = self._coerce(y)
        if y is NotImplemented:
            return y
        return y + (-self)

    def scale(self, c: int) -> "LaurentElement":
        """Multiply by the field element with code c."""
        if c == 1:
            return self
        if c == 0:
            return LaurentElement(self.field, 0, (), None if self.prec is None else self.prec)
        row = self.field.mul_table[c]
        return LaurentElement(self.field, self.v0, [row[x] for x in self.coeffs], self.prec)

    def shift(self, k: int) -> "LaurentElement":
        """Multiply by pi^k."""
        prec = None if self.prec is None else self.prec + k
        return LaurentElement(self.field, self.v0 + k, self.coeffs, prec)

    def __mul__(self, y):
        y = self._coerce(y)
        if y is NotImplemented:
            return y
        if self.is_zero() or y.is_zero():
            return LaurentElement.zero(self.field)
        vx, vy = self.vlow, y.vlow
        prec = None
        if self.prec is not None:
            prec = vy + self.prec
        if y.prec is not None:
            prec = _pmin(prec, vx + y.prec)
        if not self.coeffs or not y.coeffs:
            return LaurentElement(self.field, prec, (), prec)
        v = self.v0 + y.v0
        if prec is None:
            length = len(self.coeffs) + len(y.coeffs) - 1
        else:
            length = prec - v
            if length <= 0:
                return LaurentElement(self.field, prec, (), prec)
        if len(self.coeffs) == 1 and self.coeffs[0] == 1:
            return LaurentElement(self.field, v, y.coeffs[:length], prec)
        if len(y.coeffs) == 1 and y.coeffs[0] == 1:
            return LaurentElement(self.field, v, self.coeffs[:length], prec)
        return LaurentElement(self.field, v, _series_mul(self.field, self.coeffs, y.coeffs, length), prec)

    __rmul__ = __mul__

    def inv(self, prec: int | None = None) -> "LaurentElement":
        """Inverse; prec is the requested absolute precision for series results."""
        if not self.coeffs:
            if self.prec is None:
                raise ZeroDivisionError("inverse of exact zero")
            raise PrecisionError(f"inverse of an element that is zero to precision {self.prec}")
        v = self.v0
        if self.prec is None and len(self.coeffs) == 1:
            return LaurentElement(self.field, -v, (self.field.inv_table[self.coeffs[0]],))
        if self.prec is not None:
            target = self.prec - 2 * v
            if prec is not None:
                target = min(target, prec)
        else:
            target = prec if prec is not None else -v + DEFAULT_PRECISION
        length = target + v
        if length <= 0:
            return LaurentElement(self.field, target, (), target)
        return LaurentElement(self.field, -v, _series_inv(self.field, self.coeffs, length), target)

    def __truediv__(self, y):
        y = self._coerce(y)
        if y is NotImplemented:
            return y
        return self * y.inv()

    def __pow__(self, k: int):
        if k < 0:
            return self.inv() ** (-k)
        out = LaurentElement.one(self.field)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def truncate(self, k: int) -> "LaurentElement":
        """The same element, known only modulo pi^k."""
        return LaurentElement(self.field, self.v0, self.coeffs, _pmin(self.prec, k))

    def to_exact(self) -> "LaurentElement":
        """Forget the precision: the stored Laurent polynomial as an exact value."""
        return LaurentElement(self.field, self.v0, self.coeffs)

    def split(self, j: int) -> tuple["LaurentElement", "LaurentElement"]:
        """(terms with exponent < j, exact) and (terms with exponent >= j)."""
        head = [c for k, c in enumerate(self.coeffs) if self.v0 + k < j]
        tail_start = max(j, self.v0)
        tail = self.coeffs[tail_start - self.v0:] if self.coeffs else ()
        return (LaurentElement(self.field, self.v0, head),
                LaurentElement(self.field, tail_start, tail, self.prec))

    def agrees_with(self, other: "LaurentElement") -> bool:
        """Equality on the common range of known coefficients."""
        k = _pmin(self.prec, other.prec)
        a = self if k is None else self.truncate(k)
        b = other if k is None else other.truncate(k)
        return a.v0 == b.v0 and a.coeffs == b.coeffs

    def __eq__(self, other):
        if isinstance(other, int) and not isinstance(other, bool):
            other = LaurentElement.const(self.field, other)
        if not isinstance(other, LaurentElement):
            return NotImplemented
        return (self.field == other.field and self.v0 == other.v0
                and self.coeffs == other.coeffs and self.prec == other.prec)

    def __hash__(self):
        return hash((self.field, self.v0, self.coeffs, self.prec))

    def __str__(self):
        return format_laurent(self)

    def __repr__(self):
        return f"LaurentElement({format_laurent(self)})"


def _coef_str(F: FieldSpec, c: int) -> str:
    return str(c) if F.e == 1 else str(F.element(c))


def format_laurent(x: LaurentElement) -> str:
    parts = []
    for k, c in enumerate(x.coeffs):
        if c == 0:
            continue
        j = x.v0 + k
        cs = _coef_str(x.field, c)
        if j == 0:
            parts.append(cs)
        else:
            base = "π" if j == 1 else f"π^{j}"
            parts.append(base if cs == "1" else f"{cs}*{base}")
    if x.prec is not None:
        parts.append(f"O(π^{x.prec})")
    return " + ".join(parts) if parts else "0"


_TERM = re.compile(
    r"^(?:(?P<coef>\d+|\([\d,]+\))\*?)?(?:(?P<base>π|pi|T)(?:\^\{?(?P<exp>-?\d+)\}?)?)?$"
)


def _split_terms(text: str) -> list[tuple[int, str]]:
    """Split on top-level + and -, keeping the sign of each term."""
    terms, depth, cur, sign = [], 0, "", 1
    i = 0
    while i < len(text):
        ch = text[i]
        if ch in "({":
            depth += 1
        elif ch in ")}":
            depth -= 1
        if depth == 0 and ch in "+-" and cur and not cur.endswith("^"):
            terms.append((sign, cur))
            cur, sign = "", (1 if ch == "+" else -1)
        elif depth == 0 and ch == "-" and not cur:
            sign = -sign
        elif depth == 0 and ch == "+" and not cur:
            pass
        else:
            cur += ch
        i += 1
    if cur:
        terms.append((sign, cur))
    return terms


def parse_laurent(text: str, field: FieldSpec) -> LaurentElement:
    """Parse the canonical text form; T^j is read as pi^(-j)."""
    s = "".join(text.split())
    if s in ("", "0"):
        return LaurentElement.zero(field)
    prec = None
    acc = LaurentElement.zero(field)
    for sign, term in _split_terms(s):
        m_o = re.fullmatch(r"O\((?:π|pi)\^\{?(-?\d+)\}?\)", term)
        if m_o:
            prec = _pmin(prec, int(m_o.group(1)))
            continue
        m = _TERM.match(term)
        if not m or (m.group("coef") is None and m.group("base") is None):
            raise ValueError(f"cannot parse term {term!r}")
        coef = m.group("coef")
        if coef is None:
            code = 1
        elif coef.startswith("("):
            code = field.encode(int(c) for c in coef[1:-1].split(","))
        else:
            code = field.element(int(coef)).code
        base = m.group("base")
        exp = 0
        if base is not None:
            exp = int(m.group("exp")) if m.group("exp") is not None else 1
            if base == "T":
                exp = -exp
        if sign < 0:
            code = field.neg_table[code]
        acc = acc + LaurentElement(field, exp, (code,))
    if prec is not None:
        acc = acc.truncate(prec)
    return acc


def lift_rational(num, den, k: int = DEFAULT_PRECISION, field: FieldSpec | None = None) -> LaurentElement:
    """Expansion of num/den (polynomials in T, lowest first) in powers of pi.

    The result is exact when den divides num or den is a monomial; otherwise
    it is known modulo pi^k.  num and den may be coefficient sequences of ints
    (with `field` given) or of GfElem.
    """
    if field is None:
        for c in list(num) + list(den):
            if isinstance(c, GfElem):
                field = c.field
                break
        else:
            raise ValueError("field required for integer coefficients")
    a = poly.trim(field.element(c).code for c in num)
    b = poly.trim(field.element(c).code for c in den)
    if not b:
        raise ZeroDivisionError("zero denominator")
    if not a:
        return LaurentElement.zero(field)
    quo, rem = poly.divmod_poly(field, a, b)
    if not rem:
        return LaurentElement.from_T_poly(field, quo)
    if not any(b[:-1]):
        # den = c T^e: num/den is a Laurent polynomial
        inv = field.inv_table[b[-1]]
        e = len(b) - 1
        x = LaurentElement.from_T_poly(field, poly.scale(field, inv, a))
        return x.shift(e)
    v = (len(b) - 1) - (len(a) - 1)
    length = k - v
    if length <= 0:
        return LaurentElement(field, k, (), k)
    num_rev = list(reversed(a))
    den_rev = list(reversed(b))
    series = _series_mul(field, num_rev, _series_inv(field, den_rev, length), length)
    return LaurentElement(field, v, series, k)

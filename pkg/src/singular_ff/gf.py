"""Finite fields F_q with q = p^e.

Elements are encoded as integers 0 <= c < q, where c = sum a_j p^j for the
coefficient vector (a_0, ..., a_{e-1}) over F_p.  Arithmetic goes through
precomputed tables, which is cheap for the small q used here.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import product

DEFAULT_Q_CAP = 16


class FieldMismatchError(ValueError):
    pass


class CapExceededError(RuntimeError):
    pass


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    f = 2
    while f * f <= n:
        if n % f == 0:
            return False
        f += 1
    return True


def _poly_mod_p(a: list[int], b: list[int], p: int) -> list[int]:
    """Remainder of a by the monic polynomial b over F_p (low to high)."""
    a = list(a)
    db = len(b) - 1
    for k in range(len(a) - 1, db - 1, -1):
        c = a[k] % p
        if c:
            for j in range(db + 1):
                a[k - db + j] = (a[k - db + j] - c * b[j]) % p
    return [x % p for x in a[:db]]


def is_irreducible(modulus: tuple[int, ...], p: int) -> bool:
    """Trial division by every monic polynomial of degree 1..e//2."""
    e = len(modulus) - 1
    for deg in range(1, e // 2 + 1):
        for low in product(range(p), repeat=deg):
            if not any(_poly_mod_p(list(modulus), list(low) + [1], p)):
                return False
    return True


def first_irreducible(p: int, e: int) -> tuple[int, ...]:
    """Lexicographically first monic irreducible of degree e over F_p."""
    for low in product(range(p), repeat=e):
        cand = tuple(reversed(low)) + (1,)
        if is_irreducible(cand, p):
            return cand
    raise ValueError(f"no irreducible polynomial of degree {e} over F_{p}")


@dataclass(frozen=True)
class FieldSpec:
    p: int
    e: int = 1
    modulus: tuple[int, ...] = ()

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"characteristic {self.p} is not prime")
        if self.e < 1:
            raise ValueError("extension degree must be >= 1")
        if self.e == 1:
            object.__setattr__(self, "modulus", (0, 1))
            return
        mod = tuple(int(c) % self.p for c in self.modulus)
        if len(mod) != self.e + 1 or mod[-1] != 1:
            raise ValueError(f"modulus must be monic of degree {self.e}")
        if not is_irreducible(mod, self.p):
            raise ValueError(f"modulus {mod} is reducible over F_{self.p}")
        object.__setattr__(self, "modulus", mod)

    @classmethod
    def from_q(cls, q: int, modulus=None) -> "FieldSpec":
        for p in range(2, q + 1):
            if q % p == 0:
                break
        e, r = 0, q
        while r % p == 0:
            r //= p
            e += 1
        if r != 1:
            raise ValueError(f"{q} is not a prime power")
        if e == 1:
            return cls(p)
        if modulus is None:
            modulus = first_irreducible(p, e)
        return cls(p, e, tuple(modulus))

    @property
    def q(self) -> int:
        return self.p ** self.e

    @property
    def is_prime_field(self) -> bool:
        return self.e == 1

    def __str__(self):
        if self.e == 1:
            return f"F_{self.p}"
        return f"F_{self.q}[{','.join(map(str, self.modulus))}]"

    # encoding helpers
    def digits(self, c: int) -> tuple[int, ...]:
        out = []
        for _ in range(self.e):
            out.append(c % self.p)
            c //= self.p
        return tuple(out)

    def encode(self, digits) -> int:
        c = 0
        for a in reversed(tuple(digits)):
            c = c * self.p + int(a) % self.p
        return c

    def _mul_digits(self, a, b):
        prod = [0] * (2 * self.e - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    prod[i + j] += x * y
        return _poly_mod_p(prod + [0], list(self.modulus), self.p) if self.e > 1 else [prod[0] % self.p]

    @cached_property
    def add_table(self) -> tuple[tuple[int, ...], ...]:
        q, p = self.q, self.p
        if self.e == 1:
            return tuple(tuple((a + b) % p for b in range(q)) for a in range(q))
        dg = [self.digits(c) for c in range(q)]
        return tuple(
            tuple(self.encode((x + y) % p for x, y in zip(dg[a], dg[b])) for b in range(q))
            for a in range(q)
        )

    @cached_property
    def mul_table(self) -> tuple[tuple[int, ...], ...]:
        q, p = self.q, self.p
        if self.e == 1:
            return tuple(tuple((a * b) % p for b in range(q)) for a in range(q))
        dg = [self.digits(c) for c in range(q)]
        return tuple(
            tuple(self.encode(self._mul_digits(dg[a], dg[b])) for b in range(q))
            for a in range(q)
        )

    @cached_property
    def neg_table(self) -> tuple[int, ...]:
        return tuple(self.encode((-x) % self.p for x in self.digits(c)) for c in range(self.q))

    @cached_property
    def sub_table(self) -> tuple[tuple[int, ...], ...]:
        add, neg = self.add_table, self.neg_table
        return tuple(tuple(add[a][neg[b]] for b in range(self.q)) for a in range(self.q))

    @cached_property
    def inv_table(self) -> tuple[int, ...]:
        mul = self.mul_table
        inv = [0] * self.q
        for a in range(1, self.q):
            for b in range(1, self.q):
                if mul[a][b] == 1:
                    inv[a] = b
                    break
        return tuple(inv)

    def sign(self, k: int) -> int:
        """Code of (-1)^k; always 1 in characteristic 2."""
        return 1 if k % 2 == 0 else self.neg_table[1]

    def element(self, value) -> "GfElem":
        if isinstance(value, GfElem):
            _check_same(self, value.field)
            return value
        if isinstance(value, (tuple, list)):
            return GfElem(self, self.encode(value))
        return GfElem(self, int(value) % self.p if self.e == 1 else int(value))


def _check_same(a: FieldSpec, b: FieldSpec):
    if a != b:
        raise FieldMismatchError(f"mixed fields {a} and {b}")


@dataclass(frozen=True)
class GfElem:
    field: FieldSpec
    code: int

    def __post_init__(self):
        if not 0 <= self.code < self.field.q:
            raise ValueError(f"code {self.code} out of range for {self.field}")

    @property
    def rep(self) -> tuple[int, ...]:
        return self.field.digits(self.code)

    def _other(self, b) -> int:
        if isinstance(b, GfElem):
            _check_same(self.field, b.field)
            return b.code
        return self.field.element(b).code

    def __add__(self, b):
        return GfElem(self.field, self.field.add_table[self.code][self._other(b)])

    __radd__ = __add__

    def __sub__(self, b):
        return GfElem(self.field, self.field.sub_table[self.code][self._other(b)])

    def __rsub__(self, b):
        return GfElem(self.field, self.field.sub_table[self._other(b)][self.code])

    def __mul__(self, b):
        return GfElem(self.field, self.field.mul_table[self.code][self._other(b)])

    __rmul__ = __mul__

    def __neg__(self):
        return GfElem(self.field, self.field.neg_table[self.code])

    def inv(self) -> "GfElem":
        if self.code == 0:
            raise ZeroDivisionError("inverse of zero in a finite field")
        return GfElem(self.field, self.field.inv_table[self.code])

    def __truediv__(self, b):
        return self * GfElem(self.field, self._other(b)).inv()

    def __pow__(self, k: int):
        if k < 0:
            return self.inv() ** (-k)
        out, base = GfElem(self.field, 1), self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __bool__(self):
        return self.code != 0

    def __str__(self):
        if self.field.e == 1:
            return str(self.code)
        return "(" + ",".join(map(str, self.rep)) + ")"

    __repr__ = __str__


def enumerate_field(spec: FieldSpec, cap: int = DEFAULT_Q_CAP) -> list[GfElem]:
    if spec.q > cap:
        raise CapExceededError(f"q = {spec.q} exceeds enumeration cap {cap}")
    return [GfElem(spec, c) for c in range(spec.q)]

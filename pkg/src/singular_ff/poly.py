"""Polynomials in T over F_q as tuples of field codes, lowest degree first.

The zero polynomial is the empty tuple.  These helpers back the F_q[T]
linear algebra in the lattice module and the rational lifts in laurent.
"""
from __future__ import annotations

from .gf import FieldSpec


def trim(a) -> tuple[int, ...]:
    a = list(a)
    while a and a[-1] == 0:
        a.pop()
    return tuple(a)


def deg(a) -> int:
    """Degree, with -1 for the zero polynomial."""
    return len(a) - 1


def from_ints(F: FieldSpec, coeffs) -> tuple[int, ...]:
    return trim(F.element(c).code for c in coeffs)


def add(F: FieldSpec, a, b) -> tuple[int, ...]:
    tab = F.add_table
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for j, c in enumerate(b):
        out[j] = tab[out[j]][c]
    return trim(out)


def neg(F: FieldSpec, a) -> tuple[int, ...]:
    tab = F.neg_table
    return tuple(tab[c] for c in a)


def sub(F: FieldSpec, a, b) -> tuple[int, ...]:
    return add(F, a, neg(F, b))


def scale(F: FieldSpec, c: int, a) -> tuple[int, ...]:
    if c == 0:
        return ()
    row = F.mul_table[c]
    return tuple(row[x] for x in a)


def shift(a, k: int) -> tuple[int, ...]:
    """Multiply by T^k, k >= 0."""
    return (0,) * k + tuple(a) if a else ()


def mul(F: FieldSpec, a, b) -> tuple[int, ...]:
    if not a or not b:
        return ()
    if F.e == 1:
        p = F.p
        out = [0] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    out[i + j] += x * y
        return trim(c % p for c in out)
    add_t, mul_t = F.add_table, F.mul_table
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            row = mul_t[x]
            for j, y in enumerate(b):
                out[i + j] = add_t[out[i + j]][row[y]]
    return trim(out)


def divmod_poly(F: FieldSpec, a, b) -> tuple[tuple[int, ...], tuple[int, ...]]:
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    a = list(a)
    db = len(b) - 1
    lead_inv = F.inv_table[b[-1]]
    mul_t, sub_t = F.mul_table, F.sub_table
    if len(a) <= db:
        return (), trim(a)
    quo = [0] * (len(a) - db)
    for k in range(len(a) - 1, db - 1, -1):
        c = a[k]
        if c:
            f = mul_t[c][lead_inv]
            quo[k - db] = f
            row = mul_t[f]
            for j in range(db + 1):
                a[k - db + j] = sub_t[a[k - db + j]][row[b[j]]]
    return trim(quo), trim(a[:db])


def monic(F: FieldSpec, a) -> tuple[int, ...]:
    if not a:
        return ()
    return scale(F, F.inv_table[a[-1]], a)


def gcd(F: FieldSpec, a, b) -> tuple[int, ...]:
    a, b = trim(a), trim(b)
    while b:
        a, b = b, divmod_poly(F, a, b)[1]
    return monic(F, a)


def evaluate_str(F: FieldSpec, a) -> str:
    if not a:
        return "0"
    parts = []
    for j, c in enumerate(a):
        if c == 0:
            continue
        cs = str(F.element(c)) if F.e > 1 else str(c)
        if j == 0:
            parts.append(cs)
        else:
            base = "T" if j == 1 else f"T^{j}"
            parts.append(base if cs == "1" else f"{cs}*{base}")
    return " + ".join(parts)

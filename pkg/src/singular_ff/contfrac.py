"""Continued fractions over F_q((1/T)) with polynomial partial quotients."""
from __future__ import annotations

from . import poly
from .gf import FieldSpec
from .laurent import DEFAULT_PRECISION, LaurentElement, lift_rational


def polynomial_part(x: LaurentElement) -> tuple[int, ...]:
    """The F_q[T] part of x (coefficients of pi^j for j <= 0), lowest degree first."""
    if not x.is_nonzero() or x.v0 > 0:
        return ()
    return poly.trim(x.coefficient(-e) for e in range(-x.v0 + 1))


def convergents(field: FieldSpec, pqs) -> list[tuple[tuple, tuple]]:
    """(P_k, Q_k) for k = 0..len(pqs)-1."""
    P0, Q0 = (1,), ()
    P1, Q1 = (), (1,)
    out = []
    for a in pqs:
        a = poly.trim(a)
        P0, P1 = poly.add(field, poly.mul(field, a, P0), P1), P0
        Q0, Q1 = poly.add(field, poly.mul(field, a, Q0), Q1), Q0
        out.append((P0, Q0))
    return out


def from_partial_quotients(pqs, field: FieldSpec, precision: int = DEFAULT_PRECISION) -> LaurentElement:
    """Value of the finite continued fraction [a_0; a_1, ..., a_K]."""
    P, Q = convergents(field, pqs)[-1]
    return lift_rational(P, Q, precision, field)


def periodic(period, field: FieldSpec, precision: int = DEFAULT_PRECISION, head=()) -> LaurentElement:
    """Infinite continued fraction [head; period, period, ...] known modulo pi^precision.

    Every partial quotient after the first must have degree >= 1; the K-th
    convergent is then within q^{-(deg Q_K + deg Q_{K+1})} of the limit.
    """
    period = [poly.trim(a) for a in period]
    if not period or any(poly.deg(a) < 1 for a in period):
        raise ValueError("periodic part needs partial quotients of positive degree")
    terms = [poly.trim(a) for a in head] or [period[0]]
    src = period if head else period[1:] + period[:1]
    j = 0
    while True:
        conv = convergents(field, terms)
        if len(conv) >= 2 and poly.deg(conv[-1][1]) + poly.deg(conv[-2][1]) >= precision + 1:
            P, Q = conv[-2]
            # a convergent can be a Laurent polynomial (over F_2, Q may be a monomial)
            return lift_rational(P, Q, precision, field).truncate(precision)
        terms.append(src[j % len(src)])
        j += 1


def partial_quotients(x: LaurentElement, count: int) -> list[tuple[int, ...]]:
    """First `count` partial quotients (fewer if x is rational or precision runs out)."""
    out = []
    for _ in range(count):
        a = polynomial_part(x)
        out.append(a)
        rem = x - LaurentElement.from_T_poly(x.field, a)
        if not rem.is_nonzero():
            break
        x = rem.inv()
    return out

"""The diagonal flow g_t, horospherical matrices u_s, the combination map phi
and the duality identity relating the flow on k-vectors to its transpose."""
from __future__ import annotations

from dataclasses import dataclass

from .exterior import KMatrix, ShapeError, WedgeVector, exterior_action
from .gf import FieldSpec
from .laurent import LaurentElement


@dataclass(frozen=True)
class FlowSpec:
    m: int
    n: int
    t: int = 1

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise ValueError("block sizes must be positive")

    @property
    def d(self) -> int:
        return self.m + self.n

    def depth(self, steps: int = 1) -> int:
        """pi-depth below which s no longer affects the first `steps` flow steps."""
        return (self.m + self.n) * self.t * steps


def flow_matrix(spec: FlowSpec, field: FieldSpec, t: int | None = None) -> KMatrix:
    """g_t = diag(pi^(-nt) I_m, pi^(mt) I_n)."""
    t = spec.t if t is None else t
    up = LaurentElement.pi_power(field, -spec.n * t)
    down = LaurentElement.pi_power(field, spec.m * t)
    return KMatrix.diag(field, [up] * spec.m + [down] * spec.n)


def horospherical(s: KMatrix, m: int | None = None, n: int | None = None) -> KMatrix:
    """u_s = [[I_m, s], [0, I_n]]."""
    if m is not None and (s.rows, s.cols) != (m, n):
        raise ShapeError(f"expected an {m}x{n} matrix, got {s.rows}x{s.cols}")
    F = s.field
    m, n = s.rows, s.cols
    return KMatrix.blocks(F, [[KMatrix.identity(F, m), s], [KMatrix.zeros(F, n, m), KMatrix.identity(F, n)]])


def lower_horospherical(s: KMatrix) -> KMatrix:
    """l_s = [[I_m, 0], [s, I_n]] for an n x m matrix s."""
    F = s.field
    n, m = s.rows, s.cols
    return KMatrix.blocks(F, [[KMatrix.identity(F, m), KMatrix.zeros(F, m, n)], [s, KMatrix.identity(F, n)]])


def swap_matrix(field: FieldSpec, m: int, n: int) -> KMatrix:
    """E = [[0, I_n], [I_m, 0]], sending the first m coordinates to the last m."""
    return KMatrix.blocks(field, [[KMatrix.zeros(field, n, m), KMatrix.identity(field, n)],
                                  [KMatrix.identity(field, m), KMatrix.zeros(field, m, n)]])


def phi_combine(blocks, spec: FlowSpec) -> KMatrix:
    """sum_i pi^((i-1) d t) s_i, so that g_t u_{s_N} ... g_t u_{s_1} = g_{Nt} u_phi."""
    blocks = list(blocks)
    if not blocks:
        raise ValueError("phi needs at least one block")
    F = blocks[0].field
    out = KMatrix.zeros(F, spec.m, spec.n)
    for idx, s in enumerate(blocks):
        if (s.rows, s.cols) != (spec.m, spec.n):
            raise ShapeError("block has the wrong shape")
        out = out + s.scale(LaurentElement.pi_power(F, idx * spec.d * spec.t))
    return out


def composed_flow(blocks, spec: FlowSpec) -> KMatrix:
    """g_t u_{s_N} ... g_t u_{s_1}, by direct multiplication."""
    blocks = list(blocks)
    F = blocks[0].field
    g = flow_matrix(spec, F)
    out = KMatrix.identity(F, spec.d)
    for s in blocks:
        out = g @ horospherical(s) @ out
    return out


def duality_flow_check(w: WedgeVector, s: KMatrix, spec: FlowSpec) -> bool:
    """E g_{-t} l_s w == g~_t u~_s E w, with the tilde flow for the swapped blocks."""
    m, n = spec.m, spec.n
    if (s.rows, s.cols) != (n, m):
        raise ShapeError(f"s must be {n}x{m}")
    if w.d != spec.d:
        raise ShapeError("wedge vector has the wrong ambient dimension")
    F = s.field
    E = swap_matrix(F, m, n)
    left = exterior_action(E @ flow_matrix(spec, F, -spec.t) @ lower_horospherical(s), w)
    tilde = FlowSpec(n, m, spec.t)
    right = exterior_action(flow_matrix(tilde, F) @ horospherical(s) @ E, w)
    return left == right

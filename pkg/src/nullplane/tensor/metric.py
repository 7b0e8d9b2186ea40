"""Metric specifications and their jets at sample points.

Coordinate order is (u, v, x, y).  A walker-kind metric is the block form

    g = [[0, 0, 1, 0],
         [0, 0, 0, 1],
         [1, 0, a, c],
         [0, 1, c, b]]

with a, b, c arbitrary coordinate functions; conformal_walker is chi^2
times that block; general holds ten independent components.  Every sampled
point is checked for invertibility and for signature (+, +, -, -).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ..errors import DomainError, KindError, SingularMetric
from ..exprkit.ast import Expr, Num, as_expr
from ..exprkit.calculus import mul_, pow_
from ..exprkit.jets import (
    as_points,
    check_finite_points,
    div_coeffs,
    mul_coeffs,
    n_coeffs,
    _eval_coeffs,
)

WALKER = "walker"
CONFORMAL_WALKER = "conformal_walker"
GENERAL = "general"


@dataclass(frozen=True)
class MetricSpec:
    kind: str
    a: Optional[Expr] = None
    b: Optional[Expr] = None
    c: Optional[Expr] = None
    chi: Optional[Expr] = None
    components: Optional[tuple] = None  # 4x4 nested tuple of Expr, general kind

    @staticmethod
    def walker(a, b, c) -> "MetricSpec":
        return MetricSpec(WALKER, a=as_expr(a), b=as_expr(b), c=as_expr(c))

    @staticmethod
    def conformal_walker(chi, a, b, c) -> "MetricSpec":
        return MetricSpec(CONFORMAL_WALKER, a=as_expr(a), b=as_expr(b), c=as_expr(c), chi=as_expr(chi))

    @staticmethod
    def general(rows: Sequence[Sequence]) -> "MetricSpec":
        mat = [[as_expr(rows[i][j]) for j in range(4)] for i in range(4)]
        for i in range(4):
            for j in range(i):
                mat[i][j] = mat[j][i]  # upper triangle is authoritative
        return MetricSpec(GENERAL, components=tuple(tuple(r) for r in mat))

    def walker_part(self) -> "MetricSpec":
        """The underlying walker-form metric (identity for walker kind)."""
        if self.kind == WALKER:
            return self
        if self.kind == CONFORMAL_WALKER:
            return MetricSpec(WALKER, a=self.a, b=self.b, c=self.c)
        raise KindError("general metrics have no distinguished walker part")

    def component_exprs(self) -> list:
        if self.kind == GENERAL:
            return [list(row) for row in self.components]
        zero, one = Num(0.0), Num(1.0)
        rows = [
            [zero, zero, one, zero],
            [zero, zero, zero, one],
            [one, zero, self.a, self.c],
            [zero, one, self.c, self.b],
        ]
        if self.kind == CONFORMAL_WALKER:
            chi2 = pow_(self.chi, 2)
            rows = [[mul_(chi2, e) for e in row] for row in rows]
        return rows


def conformal_rescale(spec: MetricSpec, chi) -> MetricSpec:
    """General-kind spec whose components are chi^2 times the input's."""
    chi = as_expr(chi)
    chi2 = pow_(chi, 2)
    rows = [[mul_(chi2, e) for e in row] for row in spec.component_exprs()]
    return MetricSpec.general(rows)


# ---------------------------------------------------------------------------
# jet-valued 4x4 linear algebra (coefficient arrays shaped (M, P))


def _det3(m, order):
    def mm(a, b):
        return mul_coeffs(a, b, order, order, order)

    return (
        mm(m[0][0], mm(m[1][1], m[2][2]) - mm(m[1][2], m[2][1]))
        - mm(m[0][1], mm(m[1][0], m[2][2]) - mm(m[1][2], m[2][0]))
        + mm(m[0][2], mm(m[1][0], m[2][1]) - mm(m[1][1], m[2][0]))
    )


def _minor(m, row, col):
    return [[m[i][j] for j in range(4) if j != col] for i in range(4) if i != row]


def det_and_adjugate(g: np.ndarray, order: int):
    """Determinant jet and adjugate jets of a 4x4 jet matrix."""
    m = [[g[i, j] for j in range(4)] for i in range(4)]
    cof = np.empty_like(g)
    for i in range(4):
        for j in range(4):
            cof[i, j] = (-1.0) ** (i + j) * _det3(_minor(m, i, j), order)
    det = np.zeros_like(g[0, 0])
    for j in range(4):
        det = det + mul_coeffs(m[0][j], cof[0, j], order, order, order)
    adj = np.swapaxes(cof, 0, 1)
    return det, adj


@dataclass
class MetricJet:
    """Metric values and raw partials (to ``order``) at a point batch."""

    spec: MetricSpec
    points: np.ndarray  # (P, 4)
    single: bool
    order: int
    g: np.ndarray  # (4, 4, M, P)
    g_inv: np.ndarray
    det: np.ndarray  # (M, P)

    @property
    def npoints(self) -> int:
        return self.points.shape[0]

    @property
    def g_val(self) -> np.ndarray:  # (P, 4, 4)
        return np.moveaxis(self.g[:, :, 0, :], -1, 0)

    @property
    def g_inv_val(self) -> np.ndarray:
        return np.moveaxis(self.g_inv[:, :, 0, :], -1, 0)

    def partial(self, multi_index) -> np.ndarray:
        from ..exprkit.jets import _normalize_multi_index, mono_index

        idx = _normalize_multi_index(multi_index)
        if sum(idx) > self.order:
            raise ValueError(f"multi-index order {sum(idx)} exceeds jet order {self.order}")
        k = mono_index(self.order)[idx]
        return np.moveaxis(self.g[:, :, k, :], -1, 0)


def metric_jet(spec: MetricSpec, p, order: int = 3) -> MetricJet:
    """Evaluate the metric, its inverse, and partials at the point(s)."""
    pts, single = as_points(p)
    check_finite_points(pts)
    npts = pts.shape[0]
    M = n_coeffs(order)

    g = np.zeros((4, 4, M, npts))
    if spec.kind in (WALKER, CONFORMAL_WALKER):
        base = spec.walker_part().component_exprs()
        for i in range(4):
            for j in range(i, 4):
                g[i, j] = _eval_coeffs(base[i][j], pts, order)
                g[j, i] = g[i, j]
        if spec.kind == CONFORMAL_WALKER:
            chi = _eval_coeffs(spec.chi, pts, order)
            if np.any(chi[0] <= 0.0):
                raise DomainError("conformal factor must be positive on the sample box", expr=spec.chi)
            chi2 = mul_coeffs(chi, chi, order, order, order)
            g = mul_coeffs(chi2[None, None], g, order, order, order)
    elif spec.kind == GENERAL:
        comps = spec.component_exprs()
        for i in range(4):
            for j in range(i, 4):
                g[i, j] = _eval_coeffs(comps[i][j], pts, order)
                g[j, i] = g[i, j]
    else:
        raise KindError(f"unknown metric kind {spec.kind!r}")

    g_val = np.moveaxis(g[:, :, 0, :], -1, 0)
    eigs = np.linalg.eigvalsh(g_val)
    scale = np.max(np.abs(eigs), axis=1)
    if np.any(scale <= 0.0) or np.any(np.min(np.abs(eigs), axis=1) < 1e-10 * scale):
        raise SingularMetric("metric is numerically singular at a sampled point")
    if np.any((eigs > 0).sum(axis=1) != 2):
        raise SingularMetric("metric signature is not (+, +, -, -) at a sampled point")

    det, adj = det_and_adjugate(g, order)
    g_inv = div_coeffs(adj, det[None, None], order, order, order)

    ident = np.einsum("pij,pjk->pik", g_val, np.moveaxis(g_inv[:, :, 0, :], -1, 0))
    if np.max(np.abs(ident - np.eye(4))) > 1e-9:
        raise SingularMetric("inverse check failed (ill-conditioned metric)")

    return MetricJet(spec=spec, points=pts, single=single, order=order, g=g, g_inv=g_inv, det=det)

"""Walker null tetrad, null-plane distribution families, and the three
residuals (Frobenius, auto-parallel, parallel) that measure integrability
and parallelism of a distribution at a point.

Tetrad layout for a walker-kind metric (coordinates u, v, x, y):

    l  = d_u                          mt = d_v
    n  = d_x - (a/2) d_u - (c/2) d_v   m = -d_y + (c/2) d_u + (b/2) d_v

which satisfies g(l, n) = 1, g(m, mt) = -1, all other pairings zero, all
four vectors null.  The sign on m is forced by requiring the beta-plane
family span{t0 l + t1 mt, t0 m + t1 n} to be totally null.  For a
conformal_walker metric every vector is divided by the conformal factor.

Residuals are off-span components measured in the coordinate Euclidean
inner product (the metric is degenerate on null spans), normalized by
products of generator norms so that rescaling the projective parameter by
a positive function leaves every residual unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateParam, KindError, RankDeficient
from .exprkit.ast import Expr, Num, as_expr
from .exprkit.calculus import add_, div_, mul_, neg_
from .exprkit.jets import as_points, deriv_coeffs, _eval_coeffs
from .tensor.curvature import christoffel
from .tensor.metric import CONFORMAL_WALKER, WALKER, MetricSpec, metric_jet


@dataclass(frozen=True)
class Tetrad:
    l: tuple
    n: tuple
    m: tuple
    mt: tuple

    def vectors(self):
        return {"l": self.l, "n": self.n, "m": self.m, "mt": self.mt}


@dataclass(frozen=True)
class ProjParam:
    """Homogeneous parameter pair; scale-equivalent pairs give equal spans."""

    t0: Expr
    t1: Expr

    @staticmethod
    def of(t0, t1) -> "ProjParam":
        return ProjParam(as_expr(t0), as_expr(t1))

    def values(self, p) -> np.ndarray:
        pts, _ = as_points(p)
        t0 = _eval_coeffs(self.t0, pts, 0)[0]
        t1 = _eval_coeffs(self.t1, pts, 0)[0]
        vals = np.stack([t0, t1])
        scale = np.max(np.abs(vals), axis=0)
        if np.any(scale < 1e-12):
            raise DegenerateParam("both projective components vanish at a sampled point")
        return vals


@dataclass(frozen=True)
class Distribution:
    label: str
    generators: tuple  # k tuples of 4 Exprs

    @property
    def rank(self) -> int:
        return len(self.generators)


def walker_tetrad(spec: MetricSpec) -> Tetrad:
    """Canonical null tetrad of a walker or conformal_walker metric."""
    if spec.kind not in (WALKER, CONFORMAL_WALKER):
        raise KindError("walker_tetrad needs a walker-family metric (supply a tetrad for general kinds)")
    a, b, c = spec.a, spec.b, spec.c
    half = Num(0.5)
    l = (Num(1.0), Num(0.0), Num(0.0), Num(0.0))
    mt = (Num(0.0), Num(1.0), Num(0.0), Num(0.0))
    n = (neg_(mul_(half, a)), neg_(mul_(half, c)), Num(1.0), Num(0.0))
    m = (mul_(half, c), mul_(half, b), Num(0.0), Num(-1.0))
    if spec.kind == CONFORMAL_WALKER:
        chi = spec.chi
        scale = lambda vec: tuple(div_(comp, chi) for comp in vec)
        l, n, m, mt = scale(l), scale(n), scale(m), scale(mt)
    return Tetrad(l=l, n=n, m=m, mt=mt)


def _combine(s0: Expr, va, s1: Expr, vb) -> tuple:
    return tuple(add_(mul_(s0, va[i]), mul_(s1, vb[i])) for i in range(4))


def alpha_dist(s: ProjParam, tet: Tetrad) -> Distribution:
    """Self-dual plane family: span{s0 l + s1 m, s0 mt + s1 n}."""
    return Distribution(
        label=f"alpha({s.t0}:{s.t1})",
        generators=(_combine(s.t0, tet.l, s.t1, tet.m), _combine(s.t0, tet.mt, s.t1, tet.n)),
    )


def beta_dist(t: ProjParam, tet: Tetrad) -> Distribution:
    """Anti-self-dual plane family: span{t0 l + t1 mt, t0 m + t1 n}."""
    return Distribution(
        label=f"beta({t.t0}:{t.t1})",
        generators=(_combine(t.t0, tet.l, t.t1, tet.mt), _combine(t.t0, tet.m, t.t1, tet.n)),
    )


def dist_D(t: ProjParam, tet: Tetrad) -> Distribution:
    """Null line field span{t0 l + t1 mt} (intersection of the alpha plane
    with the beta plane of the same parameter)."""
    return Distribution(label=f"D({t.t0}:{t.t1})", generators=(_combine(t.t0, tet.l, t.t1, tet.mt),))


def dist_H(t: ProjParam, tet: Tetrad) -> Distribution:
    """Orthogonal complement of D: span{l, mt, t0 m + t1 n}."""
    return Distribution(
        label=f"H({t.t0}:{t.t1})",
        generators=(tet.l, tet.mt, _combine(t.t0, tet.m, t.t1, tet.n)),
    )


# ---------------------------------------------------------------------------
# numeric validators


def metric_pairings(spec: MetricSpec, vectors: Sequence, p) -> np.ndarray:
    """Gram matrix g(X_i, X_j) of expression vector fields at the point(s)."""
    pts, single = as_points(p)
    mj = metric_jet(spec, pts, order=2)
    vals = np.stack([[_eval_coeffs(comp, pts, 0)[0] for comp in vec] for vec in vectors])  # (k,4,P)
    gram = np.einsum("iap,pab,jbp->ijp", vals, mj.g_val, vals)
    return gram[..., 0] if single else gram


def tetrad_max_defect(spec: MetricSpec, tet: Tetrad, p) -> float:
    """Max deviation of the ten tetrad pairings from their target values."""
    gram = metric_pairings(spec, [tet.l, tet.n, tet.m, tet.mt], p)
    target = np.zeros_like(gram)
    target[0, 1] = target[1, 0] = 1.0
    target[2, 3] = target[3, 2] = -1.0
    return float(np.max(np.abs(gram - target)))


def totally_null_defect(spec: MetricSpec, dist: Distribution, p) -> float:
    gram = metric_pairings(spec, dist.generators, p)
    return float(np.max(np.abs(gram)))


# ---------------------------------------------------------------------------
# residual machinery


def _generator_data(dist: Distribution, pts: np.ndarray):
    """Values (k,4,P) and first partials (k,4,4,P) of the generators."""
    jets = np.stack([[_eval_coeffs(comp, pts, 1) for comp in vec] for vec in dist.generators])
    vals = jets[..., 0, :]
    # (k, comp, deriv, P)
    partials = deriv_coeffs(jets, 1)[..., 0, :]
    return vals, partials


def _offspan_residuals(vals: np.ndarray, candidates: np.ndarray, denoms: np.ndarray) -> np.ndarray:
    """Per-point max over candidates of |off-span part| / denominator.

    vals: (k,4,P) spanning values; candidates: (m,4,P); denoms: (m,P).
    Denominators are generator-norm products rather than candidate norms:
    the off-span component of brackets and covariant derivatives scales
    exactly like those products under positive rescaling of the
    generators, which makes the residual projective-parameter invariant.
    """
    k = vals.shape[0]
    npts = vals.shape[2]
    out = np.zeros(npts)
    for p in range(npts):
        vmat = vals[:, :, p].T  # (4, k)
        sv = np.linalg.svd(vmat, compute_uv=False)
        if sv[k - 1] < 1e-10 * max(sv[0], 1e-300):
            raise RankDeficient(f"generators have rank < {k} at point {p}")
        q, _ = np.linalg.qr(vmat)
        proj_off = np.eye(4) - q @ q.T
        off = np.linalg.norm(candidates[:, :, p] @ proj_off.T, axis=1)
        out[p] = np.max(off / np.maximum(denoms[:, p], 1e-300))
    return out


def _frobenius_batch(dist: Distribution, pts: np.ndarray) -> np.ndarray:
    vals, partials = _generator_data(dist, pts)
    k = dist.rank
    if k == 1:
        return np.zeros(pts.shape[0])
    norms = np.linalg.norm(vals, axis=1)  # (k, P)
    brackets, denoms = [], []
    for i in range(k):
        for j in range(i + 1, k):
            # [X_i, X_j]^a = X_i^b d_b X_j^a - X_j^b d_b X_i^a
            brackets.append(
                np.einsum("bp,abp->ap", vals[i], partials[j])
                - np.einsum("bp,abp->ap", vals[j], partials[i])
            )
            denoms.append(norms[i] * norms[j])
    return _offspan_residuals(vals, np.stack(brackets), np.stack(denoms))


def _autoparallel_batch(spec: MetricSpec, dist: Distribution, pts: np.ndarray) -> np.ndarray:
    mj = metric_jet(spec, pts, order=2)
    gamma = christoffel(mj).gamma[..., 0, :]  # (a,b,c,P)
    vals, partials = _generator_data(dist, pts)
    norms = np.linalg.norm(vals, axis=1)
    cands, denoms = [], []
    for i in range(dist.rank):
        for j in range(dist.rank):
            # (nabla_{X_i} X_j)^a = X_i^b d_b X_j^a + Gamma^a_bc X_i^b X_j^c
            cands.append(
                np.einsum("bp,abp->ap", vals[i], partials[j])
                + np.einsum("abcp,bp,cp->ap", gamma, vals[i], vals[j])
            )
            denoms.append(norms[i] * norms[j])
    return _offspan_residuals(vals, np.stack(cands), np.stack(denoms))


def _parallel_batch(spec: MetricSpec, dist: Distribution, pts: np.ndarray) -> np.ndarray:
    mj = metric_jet(spec, pts, order=2)
    gamma = christoffel(mj).gamma[..., 0, :]
    vals, partials = _generator_data(dist, pts)
    norms = np.linalg.norm(vals, axis=1)
    cands, denoms = [], []
    for i in range(dist.rank):
        for b in range(4):
            # (nabla_{e_b} X_i)^a = d_b X_i^a + Gamma^a_bc X_i^c
            cands.append(partials[i, :, b, :] + np.einsum("acp,cp->ap", gamma[:, b], vals[i]))
            denoms.append(norms[i])
    return _offspan_residuals(vals, np.stack(cands), np.stack(denoms))


def frobenius_residual(dist: Distribution, p) -> float:
    """0 iff the span is involutive (closed under Lie brackets) at p."""
    pts, single = as_points(p)
    out = _frobenius_batch(dist, pts)
    return float(out[0]) if single else out


def autoparallel_residual(spec: MetricSpec, dist: Distribution, p) -> float:
    """0 iff covariant derivatives along the span stay in the span at p."""
    pts, single = as_points(p)
    out = _autoparallel_batch(spec, dist, pts)
    return float(out[0]) if single else out


def parallel_residual(spec: MetricSpec, dist: Distribution, p) -> float:
    """0 iff covariant derivatives in every coordinate direction stay in
    the span at p."""
    pts, single = as_points(p)
    out = _parallel_batch(spec, dist, pts)
    return float(out[0]) if single else out

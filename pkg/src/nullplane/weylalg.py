"""Weyl quartics over the null-plane families, root-multiplicity structure,
component calibration, and Ricci degeneracy residuals.

For a tetrad (l, n, m, mt) the plane families are parametrized by a
projective pair; their bivectors expand as

    self-dual      P(s) = l^mt + s (l^n + m^mt) + s^2 (m^n)
    anti-self-dual Q(t) = l^m  + t (l^n - m^mt) + t^2 (mt^n)

and the quartic value at parameter tau is C(P(tau), P(tau)) with the full
Weyl tensor (the opposite-duality part contracts to zero).  Roots of the
quartic are the principal directions of the corresponding Weyl half; the
walker direction is s = 0, i.e. the homogeneous parameter (1:0).

Component normalization (psi_k = c_k / (binom(4,k) kappa)) uses one global
calibration constant fixed on metrics with a and c independent of v, where
the middle component must equal S/12 on both sides; the constant is
asserted to be instance- and point-independent rather than derived from
any particular component convention.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import comb
from typing import Optional

import numpy as np

from .errors import CalibrationFailure, DegenerateRoot, KindError, RankDeficient
from .exprkit.ast import Num, u as _u, v as _v
from .exprkit.calculus import diff_expr, is_zero_expr
from .exprkit.jets import as_points, mul_coeffs, _eval_coeffs
from .frames import Distribution, Tetrad, walker_tetrad
from .tensor.curvature import CurvaturePack, curvature
from .tensor.metric import WALKER, MetricSpec, metric_jet

_REF_FLOOR = 1e-4  # absolute curvature-reference floor for zero-form detection


@dataclass
class QuarticForm:
    """Binary quartic of one duality side at a single point."""

    side: str  # "SD" | "ASD"
    coeffs: np.ndarray  # (5,) c_0..c_4, c_k multiplying tau^k
    coeff_partials: Optional[np.ndarray]  # (5, 4) coordinate partials, or None
    scale: float  # max |c_k|
    ref_scale: float  # curvature x bivector^2 magnitude at the point

    def value(self, tau: float) -> float:
        return float(np.polyval(self.coeffs[::-1], tau))


@dataclass(frozen=True)
class RootEntry:
    kind: str  # "real" | "complex_pair" | "inf"
    value: Optional[complex]
    multiplicity: int


@dataclass(frozen=True)
class RootList:
    entries: tuple
    type_string: str

    def multiplicities(self) -> tuple:
        out = []
        for e in self.entries:
            out.extend([e.multiplicity] * (2 if e.kind == "complex_pair" else 1))
        return tuple(sorted(out, reverse=True))


@dataclass(frozen=True)
class WeylComponents:
    psi: np.ndarray  # (5,)


@dataclass(frozen=True)
class CalibrationConstant:
    value: float
    provenance: dict


# ---------------------------------------------------------------------------
# quartic extraction


def _wedge_jets(a: np.ndarray, b: np.ndarray, order: int) -> np.ndarray:
    w = mul_coeffs(a[:, None], b[None, :], order, order, order)
    return w - np.swapaxes(w, 0, 1)


def _pairing(cjets: np.ndarray, pj: np.ndarray, qj: np.ndarray, order: int) -> np.ndarray:
    t = mul_coeffs(cjets, pj[:, :, None, None], order, order, order).sum(axis=(0, 1))
    return mul_coeffs(t, qj, order, order, order).sum(axis=(0, 1))


def _side_bases(tet: Tetrad, pts: np.ndarray, order: int) -> dict:
    vecs = {k: np.stack([_eval_coeffs(c, pts, order) for c in comps]) for k, comps in tet.vectors().items()}
    ln = _wedge_jets(vecs["l"], vecs["n"], order)
    mmt = _wedge_jets(vecs["m"], vecs["mt"], order)
    return {
        "SD": (
            _wedge_jets(vecs["l"], vecs["mt"], order),
            ln + mmt,
            _wedge_jets(vecs["m"], vecs["n"], order),
        ),
        "ASD": (
            _wedge_jets(vecs["l"], vecs["m"], order),
            ln - mmt,
            _wedge_jets(vecs["mt"], vecs["n"], order),
        ),
    }


def weyl_quartic(pack: CurvaturePack, tet: Tetrad, side: str):
    """Quartic form(s) of one duality side at the pack's point(s).

    Returns a QuarticForm for a single-point pack, else a list of them.
    Coefficient coordinate partials are included when the pack was built
    from order-3 metric jets.  The reference scale is the largest Weyl
    pairing over both sides' bivector bases, which is the magnitude the
    coefficients would have if the relevant Weyl part were generic.
    """
    if side not in ("SD", "ASD"):
        raise ValueError("side must be 'SD' or 'ASD'")
    order = pack.order
    pts = pack.points
    bases = _side_bases(tet, pts, order)
    b0, b1, b2 = bases[side]

    c = pack.weyl
    pair = lambda a_, b_: _pairing(c, a_, b_, order)
    coeffs = np.stack(
        [
            pair(b0, b0),
            2.0 * pair(b0, b1),
            2.0 * pair(b0, b2) + pair(b1, b1),
            2.0 * pair(b1, b2),
            pair(b2, b2),
        ]
    )  # (5, M, P)

    cvals = pack.weyl_val
    ref = np.zeros(pts.shape[0])
    for side_name in ("SD", "ASD"):
        basis_vals = [b[..., 0, :] for b in bases[side_name]]
        for i in range(3):
            for j in range(i, 3):
                g = np.einsum("pabcd,abp,cdp->p", cvals, basis_vals[i], basis_vals[j])
                ref = np.maximum(ref, np.abs(g))

    forms = []
    npts = pts.shape[0]
    has_partials = order >= 1
    from .exprkit.jets import deriv_coeffs

    partials = deriv_coeffs(coeffs, order)[..., 0, :] if has_partials else None  # (5,4,P)
    for p in range(npts):
        cp = coeffs[:, 0, p].copy()
        forms.append(
            QuarticForm(
                side=side,
                coeffs=cp,
                coeff_partials=partials[:, :, p].copy() if has_partials else None,
                scale=float(np.max(np.abs(cp))),
                ref_scale=float(ref[p]),
            )
        )
    if pack.mj.single:
        return forms[0]
    return forms


# ---------------------------------------------------------------------------
# root structure


def _cluster_roots(roots: np.ndarray, tol: float):
    remaining = list(roots)
    clusters = []
    while remaining:
        n = len(remaining)
        chosen = None
        for m in range(n, 0, -1):
            radius = tol ** (1.0 / m)
            for combo in combinations(range(n), m):
                group = [remaining[i] for i in combo]
                center = sum(group) / m
                r = radius * max(1.0, abs(center))
                if all(abs(z - center) <= r for z in group):
                    chosen = (combo, center, m, r)
                    break
            if chosen:
                break
        combo, center, m, r = chosen
        clusters.append((center, m, r))
        remaining = [z for i, z in enumerate(remaining) if i not in combo]
    return clusters


def root_structure(q: QuarticForm, tol: float = 1e-8) -> RootList:
    """Roots with multiplicities; near-zero leading coefficients deflate to
    roots at infinity, and clusters merge within tol^(1/multiplicity)."""
    ref = max(q.ref_scale, _REF_FLOOR)
    if q.scale <= tol * ref:
        return RootList(entries=(), type_string="O")

    c = q.coeffs
    lead = 4
    m_inf = 0
    while lead >= 0 and abs(c[lead]) < tol * q.scale:
        m_inf += 1
        lead -= 1
    entries = []
    if lead >= 1:
        roots = np.roots(c[lead::-1])
        clusters = _cluster_roots(roots, tol)
        complex_clusters = []
        for center, m, r in clusters:
            if abs(center.imag) <= r:
                entries.append(RootEntry("real", complex(center.real, 0.0), m))
            else:
                complex_clusters.append((center, m))
        used = [False] * len(complex_clusters)
        for i, (z, m) in enumerate(complex_clusters):
            if used[i]:
                continue
            used[i] = True
            best, bestd = None, np.inf
            for j in range(i + 1, len(complex_clusters)):
                if used[j] or complex_clusters[j][1] != m:
                    continue
                d = abs(np.conj(z) - complex_clusters[j][0])
                if d < bestd:
                    best, bestd = j, d
            if best is not None:
                used[best] = True
            rep = z if z.imag > 0 else np.conj(z)
            entries.append(RootEntry("complex_pair", complex(rep), m))
    if m_inf:
        entries.append(RootEntry("inf", None, m_inf))

    entries.sort(key=lambda e: (e.kind, -e.multiplicity, abs(e.value) if e.value is not None else 0.0))
    mults = []
    for e in entries:
        mults.extend([e.multiplicity] * (2 if e.kind == "complex_pair" else 1))
    type_string = "{" + "".join(str(m) for m in sorted(mults, reverse=True)) + "}"
    return RootList(entries=tuple(entries), type_string=type_string)


# ---------------------------------------------------------------------------
# component calibration


def weyl_components(q: QuarticForm, kappa: CalibrationConstant) -> WeylComponents:
    psi = np.array([q.coeffs[k] / (comb(4, k) * kappa.value) for k in range(5)])
    return WeylComponents(psi=psi)


def calibrate_kappa(spec: MetricSpec, points) -> CalibrationConstant:
    """Fix the pairing constant via (middle component) = S/12 on metrics
    with a_v = c_v = 0; asserts point- and side-independence."""
    if spec.kind != WALKER:
        raise CalibrationFailure("calibration runs on walker-kind metrics")
    if not (is_zero_expr(diff_expr(spec.a, "v")) and is_zero_expr(diff_expr(spec.c, "v"))):
        raise CalibrationFailure("calibration instance must have a and c independent of v")
    pts, _ = as_points(points)
    pack = curvature(metric_jet(spec, pts, order=2))
    tet = walker_tetrad(spec)
    s_vals = pack.scalar_val
    if np.all(np.abs(s_vals) < 1e-8):
        raise CalibrationFailure("scalar curvature vanishes at all calibration points")
    keep = np.abs(s_vals) > 1e-8 * max(1.0, np.max(np.abs(s_vals)))
    ratios = []
    for side in ("ASD", "SD"):
        forms = weyl_quartic(pack, tet, side)
        if pack.mj.single:
            forms = [forms]
        c2 = np.array([f.coeffs[2] for f in forms])
        ratios.append((2.0 * c2 / s_vals)[keep])
    ratios = np.concatenate(ratios)
    mean = float(np.mean(ratios))
    if abs(mean) < 1e-12:
        raise CalibrationFailure("calibration ratio is zero (degenerate instance)")
    if np.std(ratios) / abs(mean) > 1e-6:
        raise CalibrationFailure(
            f"calibration ratio not constant across points/sides (std/mean = {np.std(ratios)/abs(mean):.2e})"
        )
    return CalibrationConstant(
        value=mean,
        provenance={
            "instance": {"a": str(spec.a), "b": str(spec.b), "c": str(spec.c)},
            "points": int(np.sum(keep)),
            "sides": ["ASD", "SD"],
        },
    )


_DEFAULT_KAPPA: Optional[CalibrationConstant] = None


def default_kappa() -> CalibrationConstant:
    """Package-wide calibration constant, computed once and reused verbatim.

    Calibrated on a = u^2, b = v^2, c = u (S = 4) and cross-checked on the
    independent instance c = 0 to guard against convention drift.
    """
    global _DEFAULT_KAPPA
    if _DEFAULT_KAPPA is None:
        pts = np.random.default_rng(0xC0FFEE).uniform(0.5, 1.5, (10, 4))
        first = calibrate_kappa(MetricSpec.walker(_u**2, _v**2, _u), pts)
        second = calibrate_kappa(MetricSpec.walker(_u**2, _v**2, Num(0.0)), pts)
        if abs(first.value - second.value) > 1e-6 * abs(first.value):
            raise CalibrationFailure("calibration constant is instance-dependent")
        _DEFAULT_KAPPA = first
    return _DEFAULT_KAPPA


def obstruction_residual(spec: MetricSpec, p, kappa: Optional[CalibrationConstant] = None):
    """psi_2 - S/12 from the anti-self-dual quartic of a walker metric; the
    quantity whose vanishing characterizes conformally two-sided form."""
    if spec.kind != WALKER:
        raise KindError("the obstruction is evaluated in the walker gauge")
    if kappa is None:
        kappa = default_kappa()
    pts, single = as_points(p)
    pack = curvature(metric_jet(spec, pts, order=2))
    forms = weyl_quartic(pack, walker_tetrad(spec), "ASD")
    if pack.mj.single:
        forms = [forms]
    c2 = np.array([f.coeffs[2] for f in forms])
    out = c2 / (6.0 * kappa.value) - pack.scalar_val / 12.0
    return float(out[0]) if single else out


# ---------------------------------------------------------------------------
# Ricci degeneracy residuals

_RICCI_FLOOR = 1e-4  # fraction of the Riemann scale used as an E-scale floor


def einstein_residual(pack: CurvaturePack):
    """max |E_ab| normalized by the Ricci/Riemann scale (0 iff Einstein)."""
    num = np.max(np.abs(pack.efield_val), axis=(1, 2))
    den = np.maximum.reduce(
        [np.max(np.abs(pack.ricci_val), axis=(1, 2)), pack.riemann_scale(), np.full_like(num, 1e-30)]
    )
    out = num / den
    return float(out[0]) if pack.mj.single else out


def _z_generator_values(pack: CurvaturePack, zdist: Distribution) -> np.ndarray:
    pts = pack.points
    vals = np.stack([[_eval_coeffs(c, pts, 0)[0] for c in gen] for gen in zdist.generators])
    for p in range(pts.shape[0]):
        sv = np.linalg.svd(vals[:, :, p].T, compute_uv=False)
        if sv[vals.shape[0] - 1] < 1e-10 * max(sv[0], 1e-300):
            raise RankDeficient("distribution rank-deficient at a sampled point")
    return vals


def _e_restricted(pack: CurvaturePack, zdist: Distribution):
    vals = _z_generator_values(pack, zdist)  # (k,4,P)
    evals = pack.efield_val  # (P,4,4)
    m = np.einsum("iap,pab,jbp->ijp", vals, evals, vals)
    gen_scale = np.max(np.linalg.norm(vals, axis=1), axis=0)
    e_scale = np.maximum(
        np.max(np.abs(evals), axis=(1, 2)), _RICCI_FLOOR * pack.riemann_scale()
    )
    return m, e_scale * gen_scale**2


def ricci_null_residual(pack: CurvaturePack, zdist: Distribution, p=None):
    """max |E(X, Y)| over the distribution's generators, normalized; 0 iff
    the trace-free Ricci form vanishes on the plane."""
    m, den = _e_restricted(pack, zdist)
    out = np.max(np.abs(m), axis=(0, 1)) / np.maximum(den, 1e-30)
    return float(out[0]) if pack.mj.single else out


def rps_discriminant(pack: CurvaturePack, zdist: Distribution, p=None):
    """det of E restricted to the 2-plane, normalized; a real principal
    direction of the trace-free Ricci form on the plane exists iff <= 0."""
    if zdist.rank != 2:
        raise RankDeficient("rps_discriminant needs a 2-plane distribution")
    m, den = _e_restricted(pack, zdist)
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    out = det / np.maximum(den**2, 1e-30)
    return float(out[0]) if pack.mj.single else out


# ---------------------------------------------------------------------------
# implicit differentiation of a root field


def _falling(k: int, j: int) -> float:
    out = 1.0
    for i in range(j):
        out *= k - i
    return out


def implicit_root_jet(q: QuarticForm, t_root: float, vanish_tol: float = 1e-6) -> np.ndarray:
    """First coordinate partials of an isolated root field of the quartic.

    The root's multiplicity m is detected from the t-derivatives at t_root;
    implicit differentiation is applied to d^{m-1}q/dt^{m-1} = 0.  Raises
    DegenerateRoot when the multiplicity structure is not clearly resolved.
    """
    if q.coeff_partials is None:
        raise ValueError("quartic was built without coefficient partials (needs order-3 metric jets)")
    c = q.coeffs
    tmax = max(1.0, abs(t_root))
    mult = None
    for j in range(5):
        val = sum(c[k] * _falling(k, j) * t_root ** (k - j) for k in range(j, 5))
        bound = sum(abs(c[k]) * _falling(k, j) * tmax ** (k - j) for k in range(j, 5))
        bound = max(bound, q.scale, 1e-30)
        if abs(val) > vanish_tol * bound:
            if abs(val) < 1e3 * vanish_tol * bound:
                raise DegenerateRoot("root multiplicity is numerically marginal")
            mult = j
            break
    if mult is None:
        raise DegenerateRoot("all t-derivatives vanish (zero form)")
    if mult == 0:
        raise DegenerateRoot(f"t = {t_root} is not a root of the quartic")

    dG_dt = sum(c[k] * _falling(k, mult) * t_root ** (k - mult) for k in range(mult, 5))
    grad = np.zeros(4)
    for i in range(4):
        dG_dxi = sum(
            q.coeff_partials[k, i] * _falling(k, mult - 1) * t_root ** (k - mult + 1)
            for k in range(mult - 1, 5)
        )
        grad[i] = -dG_dxi / dG_dt
    return grad

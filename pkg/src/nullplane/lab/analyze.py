"""The analysis pipeline: sample points, compute curvature and frame data,
classify, and assemble a Report."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from ..errors import DomainError, NullplaneError, SingularMetric
from ..frames import (
    ProjParam,
    alpha_dist,
    beta_dist,
    dist_D,
    dist_H,
    walker_tetrad,
    tetrad_max_defect,
    _frobenius_batch,
    _autoparallel_batch,
    _parallel_batch,
)
from ..tensor.curvature import curvature, box_scalar, walker_box_closed_form
from ..tensor.metric import CONFORMAL_WALKER, WALKER, metric_jet
from ..weylalg import (
    default_kappa,
    einstein_residual,
    ricci_null_residual,
    root_structure,
    rps_discriminant,
    weyl_quartic,
)
from .config import AnalysisConfig, sample_points
from .report import Report, _roots_to_dict


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("NULLPLANE_THREADS", "1")))
    except ValueError:
        return 1


def _attribute_point(err: NullplaneError, spec, order, pts) -> NullplaneError:
    """Re-run point by point to name the failing sample in the message."""
    for i in range(pts.shape[0]):
        try:
            metric_jet(spec, pts[i], order)
        except (DomainError, SingularMetric) as single_err:
            return err.__class__(f"{single_err} [at point {pts[i].tolist()}]")
    return err


def _adapted_middle_coeff(coeffs: np.ndarray, t0: float, t1: float) -> float:
    """Middle coefficient of the quartic reparametrized by the unimodular
    dyad change that sends the direction (t0 : t1) to (0 : 1).

    This is the frame in which the middle component is a geometric
    quantity once the direction is a double root; for (0 : 1) it reduces
    to the raw c_2.
    """
    norm = float(np.hypot(t0, t1))
    b0, b1 = t0 / norm, t1 / norm
    a0, a1 = b1, -b0  # det [[a0, b0], [a1, b1]] = +1
    p0 = np.array([a0, b0])  # value of the first parameter component in s
    p1 = np.array([a1, b1])
    total = np.zeros(5)
    for k in range(5):
        term = np.array([coeffs[k]])
        for _ in range(4 - k):
            term = np.polymul(term, p0[::-1])
        for _ in range(k):
            term = np.polymul(term, p1[::-1])
        total[: len(term)] += term[::-1]
    return float(total[2])


def _double_root_defect(coeffs: np.ndarray, t0: float, t1: float, is_zero_form: bool) -> float:
    """Relative size of the homogeneous-quartic gradient at a direction;
    ~0 iff the direction is a root of multiplicity >= 2."""
    if is_zero_form:
        return 0.0
    norm = float(np.hypot(t0, t1))
    t0, t1 = t0 / norm, t1 / norm
    dq0 = sum(coeffs[k] * (4 - k) * t0 ** max(3 - k, 0) * t1**k for k in range(4))
    dq1 = sum(coeffs[k] * k * t0 ** (4 - k) * t1 ** (k - 1) for k in range(1, 5))
    scale = 4.0 * max(np.max(np.abs(coeffs)), 1e-30)
    return float(max(abs(dq0), abs(dq1)) / scale)


def _chunk_arrays(cfg: AnalysisConfig, pts: np.ndarray, kappa) -> dict:
    spec = cfg.spec
    try:
        mj = metric_jet(spec, pts, cfg.order)
    except (DomainError, SingularMetric) as err:
        raise _attribute_point(err, spec, cfg.order, pts) from err
    pack = curvature(mj)

    out: dict = {
        "scalar": pack.scalar_val,
        "einstein": np.atleast_1d(einstein_residual(pack)),
        "ricci_scale": np.max(np.abs(pack.ricci_val), axis=(1, 2)),
        "riemann_scale": pack.riemann_scale(),
    }

    tet = cfg.tetrad
    if spec.kind in (WALKER, CONFORMAL_WALKER):
        tet = walker_tetrad(spec)
    out["has_frames"] = tet is not None

    if tet is not None:
        defect = tetrad_max_defect(spec, tet, pts)
        gscale = max(float(np.max(np.abs(mj.g_val))), 1.0)
        if defect > 1e-7 * gscale:
            raise NullplaneError(f"tetrad normalization defect {defect:.2e} exceeds tolerance")
        from ..tensor.dual import volume_and_duals

        volume_and_duals(mj, tet)  # orientation calibration check

        tvals = cfg.t_field.values(pts)  # (2, P)
        sd_forms = weyl_quartic(pack, tet, "SD")
        asd_forms = weyl_quartic(pack, tet, "ASD")
        sd_roots = [root_structure(f) for f in sd_forms]
        asd_roots = [root_structure(f) for f in asd_forms]
        out["sd_coeffs"] = np.stack([f.coeffs for f in sd_forms])
        out["asd_coeffs"] = np.stack([f.coeffs for f in asd_forms])
        out["sd_roots"] = sd_roots
        out["asd_roots"] = asd_roots
        out["sd_dir_defect"] = np.array(
            [
                _double_root_defect(f.coeffs, 1.0, 0.0, rl.type_string == "O")
                for f, rl in zip(sd_forms, sd_roots)
            ]
        )
        out["asd_dir_defect"] = np.array(
            [
                _double_root_defect(f.coeffs, tvals[0, p], tvals[1, p], asd_roots[p].type_string == "O")
                for p, f in enumerate(asd_forms)
            ]
        )

        zdist = alpha_dist(ProjParam.of(1, 0), tet)
        dists = {
            "D": dist_D(cfg.t_field, tet),
            "Z": zdist,
            "W": beta_dist(cfg.t_field, tet),
            "H": dist_H(cfg.t_field, tet),
        }
        residuals: dict = {}
        for name, dist in dists.items():
            residuals[name] = {
                "frobenius": _frobenius_batch(dist, pts),
                "autoparallel": _autoparallel_batch(spec, dist, pts),
                "parallel": _parallel_batch(spec, dist, pts),
            }
        out["residuals"] = residuals
        out["ricci_null"] = np.atleast_1d(ricci_null_residual(pack, zdist))
        out["rps_disc"] = np.atleast_1d(rps_discriminant(pack, zdist))

    if spec.kind in (WALKER, CONFORMAL_WALKER):
        # obstruction lives in the walker gauge; the flag/verdict use the
        # middle coefficient in the frame adapted to the t-field direction
        wp = spec.walker_part()
        if spec.kind == WALKER:
            wpack = pack
            wasd_coeffs = out["asd_coeffs"]
        else:
            wpack = curvature(metric_jet(wp, pts, 2))
            wasd_coeffs = np.stack(
                [f.coeffs for f in weyl_quartic(wpack, walker_tetrad(wp), "ASD")]
            )
        tvals = cfg.t_field.values(pts)
        c2_raw = wasd_coeffs[:, 2]
        c2_adapted = np.array(
            [_adapted_middle_coeff(wasd_coeffs[p], tvals[0, p], tvals[1, p]) for p in range(pts.shape[0])]
        )
        out["obstruction"] = c2_raw / (6.0 * kappa.value) - wpack.scalar_val / 12.0
        out["obstruction_adapted"] = c2_adapted / (6.0 * kappa.value) - wpack.scalar_val / 12.0
        out["obstruction_scale"] = np.maximum(
            np.abs(wpack.scalar_val) / 12.0, 1e-2 * np.max(np.abs(wpack.riemann_val), axis=(1, 2, 3, 4))
        )
        if spec.kind == CONFORMAL_WALKER:
            out["box_chi_generic"] = np.atleast_1d(box_scalar(wp, spec.chi, pts))
            out["box_chi_closed"] = np.atleast_1d(walker_box_closed_form(wp.a, wp.b, wp.c, spec.chi, pts))
    return out


def _merge_chunks(chunks: list) -> dict:
    if len(chunks) == 1:
        return chunks[0]
    merged: dict = {}
    first = chunks[0]
    for key, value in first.items():
        if isinstance(value, np.ndarray):
            merged[key] = np.concatenate([c[key] for c in chunks])
        elif isinstance(value, list):
            merged[key] = [item for c in chunks for item in c[key]]
        elif key == "residuals":
            merged[key] = {
                name: {
                    kind: np.concatenate([c[key][name][kind] for c in chunks])
                    for kind in value[name]
                }
                for name in value
            }
        else:
            merged[key] = value
    return merged


def run_analysis(cfg: AnalysisConfig) -> Report:
    """Analyze the configured metric at seeded sample points."""
    pts = sample_points(cfg)
    kappa = default_kappa() if cfg.spec.kind in (WALKER, CONFORMAL_WALKER) else None

    nthreads = _threads()
    if nthreads > 1 and pts.shape[0] > nthreads:
        splits = np.array_split(np.arange(pts.shape[0]), nthreads)
        with ThreadPoolExecutor(max_workers=nthreads) as pool:
            chunks = list(pool.map(lambda idx: _chunk_arrays(cfg, pts[idx], kappa), splits))
        data = _merge_chunks(chunks)
    else:
        data = _chunk_arrays(cfg, pts, kappa)

    tol0 = cfg.tol_zero
    flags: dict = {}
    has_frames = data["has_frames"]
    walker_kind = cfg.spec.kind in (WALKER, CONFORMAL_WALKER)

    if has_frames:
        res = data["residuals"]
        z_parallel = bool(np.max(res["Z"]["parallel"]) < tol0)
        w_integrable = bool(np.max(res["W"]["frobenius"]) < tol0)
        w_parallel = bool(np.max(res["W"]["parallel"]) < tol0)
        h_integrable = bool(np.max(res["H"]["frobenius"]) < tol0)
        sd_flag = bool(all(rl.type_string == "O" for rl in data["asd_roots"]))
        ricci_small = bool(np.max(data["ricci_scale"] / np.maximum(data["riemann_scale"], 1e-30)) < tol0)
        flags.update(
            {
                "walker_form": bool(walker_kind or cfg.tetrad is not None) and z_parallel,
                "Z_parallel": z_parallel,
                "W_integrable": w_integrable,
                "W_parallel": w_parallel,
                "H_integrable": h_integrable,
                "sesquiWalker": z_parallel and w_integrable,
                "integrable_sesquiWalker": z_parallel and w_integrable and h_integrable,
                "two_sided": z_parallel and w_parallel,
                "SD": sd_flag,
                "ricci_null": bool(np.max(data["ricci_null"]) < tol0),
                "left_flat": ricci_small and sd_flag,
            }
        )
    else:
        for key in (
            "walker_form",
            "Z_parallel",
            "W_integrable",
            "W_parallel",
            "H_integrable",
            "sesquiWalker",
            "integrable_sesquiWalker",
            "two_sided",
            "SD",
            "ricci_null",
            "left_flat",
        ):
            flags[key] = None

    if walker_kind:
        obs_ok = bool(
            np.max(np.abs(data["obstruction_adapted"]) / np.maximum(data["obstruction_scale"], 1e-30)) < tol0
        )
        flags["obstruction_zero"] = obs_ok
    else:
        flags["obstruction_zero"] = None

    if not walker_kind:
        verdict, reason = "inconclusive", "general-kind metric has no distinguished walker gauge"
    elif not flags["H_integrable"]:
        verdict, reason = "no:H", "the 3-plane distribution is not integrable"
    elif not (
        np.max(data["sd_dir_defect"]) < tol0 and np.max(data["asd_dir_defect"]) < tol0
    ):
        verdict, reason = "no:WPS", "a distinguished direction is not a double quartic root"
    elif not flags["obstruction_zero"]:
        verdict, reason = "no:obstruction", "the middle component does not equal S/12 in the walker gauge"
    else:
        verdict, reason = "yes", "all conditions hold at every sampled point"

    records = []
    for p in range(pts.shape[0]):
        rec: dict = {
            "point": [float(c) for c in pts[p]],
            "scalar_curvature": float(data["scalar"][p]),
            "einstein_residual": float(data["einstein"][p]),
        }
        if has_frames:
            rec["ricci_null_residual"] = float(data["ricci_null"][p])
            rec["rps_discriminant"] = float(data["rps_disc"][p])
            rec["quartic_sd"] = {
                "coeffs": [float(c) for c in data["sd_coeffs"][p]],
                "roots": _roots_to_dict(data["sd_roots"][p]),
            }
            rec["quartic_asd"] = {
                "coeffs": [float(c) for c in data["asd_coeffs"][p]],
                "roots": _roots_to_dict(data["asd_roots"][p]),
            }
            rec["residuals"] = {
                name: {kind: float(vals[p]) for kind, vals in kinds.items()}
                for name, kinds in data["residuals"].items()
            }
        if walker_kind:
            rec["obstruction"] = float(data["obstruction"][p])
        if "box_chi_generic" in data:
            rec["box_chi"] = {
                "generic": float(data["box_chi_generic"][p]),
                "closed_form": float(data["box_chi_closed"][p]),
            }
        records.append(rec)

    return Report(
        config=cfg.echo(),
        kappa=kappa.value if kappa is not None else None,
        point_records=records,
        flags=flags,
        verdict=verdict,
        verdict_reason=reason,
    )

import json

import numpy as np
import pytest

from nullplane.errors import ConfigError
from nullplane.exprkit import u, v, x, y
from nullplane.families import mk_cp_example, mk_ricci_null, mk_sd_two_sided, mk_two_sided, mk_walker, random_polys
from nullplane.lab import AnalysisConfig, load_spec_file, run_analysis, sample_points
from nullplane.lab.cli import main
from conftest import sample_box

GOOD_SPEC = """
[metric]
kind = walker
a = u^2
b = v^2
c = u

[lambda]
t0 = 0
t1 = 1

[domain]
box = 0.5, 1.5
"""


@pytest.fixture
def spec_file(tmp_path):
    path = tmp_path / "metric.ini"
    path.write_text(GOOD_SPEC)
    return str(path)


# ---------------------------------------------------------------------------
# configuration


def test_load_spec_file(spec_file):
    cfg = load_spec_file(spec_file)
    assert cfg.spec.kind == "walker"
    assert str(cfg.t_field.t1) == "1"
    assert cfg.box == ((0.5, 1.5),) * 4


def test_load_spec_file_errors(tmp_path):
    bad = tmp_path / "bad.ini"
    bad.write_text("[metric]\nkind = walker\na = u^\nb = 0\nc = 0\n")
    with pytest.raises(ConfigError):
        load_spec_file(bad.as_posix())
    missing = tmp_path / "missing.ini"
    missing.write_text("[metric]\nkind = walker\na = u\n")
    with pytest.raises(ConfigError):
        load_spec_file(missing.as_posix())
    nokind = tmp_path / "nokind.ini"
    nokind.write_text("[metric]\nfoo = 1\n")
    with pytest.raises(ConfigError):
        load_spec_file(nokind.as_posix())


def test_sample_points_deterministic_and_excluding():
    cfg = AnalysisConfig(spec=mk_walker(0, 0, 0).spec, points=50, seed=5, box=((-1.0, 1.0),) * 4, exclude=(("v", 0.0),))
    pts1 = sample_points(cfg)
    pts2 = sample_points(cfg)
    assert np.array_equal(pts1, pts2)
    assert np.all(np.abs(pts1[:, 1]) >= 0.02 * 2.0)


# ---------------------------------------------------------------------------
# analysis flags and verdicts


def test_flat_analysis():
    report = run_analysis(AnalysisConfig(spec=mk_walker(0, 0, 0).spec, points=6, seed=3))
    assert report.verdict == "yes"
    rec = report.point_records[0]
    assert rec["quartic_sd"]["roots"]["type"] == "O"
    assert rec["quartic_asd"]["roots"]["type"] == "O"
    assert rec["scalar_curvature"] == 0.0
    for kinds in rec["residuals"].values():
        for value in kinds.values():
            assert value < 1e-12


def test_two_sided_verdict_yes():
    for spec in (
        mk_two_sided(u**2, v**2, u).spec,
        mk_sd_two_sided(*random_polys(70_001, 2, ("x", "y"), 9)).spec,
        mk_ricci_null(u**2 * v * x, u**2, v**2).spec,
    ):
        report = run_analysis(AnalysisConfig(spec=spec, points=10, seed=4))
        assert report.flags["two_sided"] is True
        assert report.verdict == "yes"


def test_flag_monotonicity_across_corpus():
    instances = [
        mk_walker(0, 0, 0),
        mk_two_sided(u**2, v**2, u),
        mk_walker(*random_polys(70_100, 2, ("u", "v", "x", "y"), 3)),
        mk_walker(random_polys(70_101, 2, ("u", "x", "y"), 1)[0], v**2, u * v * x),
    ]
    g_inst, h_inst, t_field = mk_cp_example(x * y)
    configs = [AnalysisConfig(spec=i.spec, t_field=i.t_field, points=8, seed=6) for i in instances]
    configs += [
        AnalysisConfig(spec=i.spec, t_field=t_field, points=8, seed=6, exclude=(("v", 0.0),))
        for i in (g_inst, h_inst)
    ]
    for cfg in configs:
        flags = run_analysis(cfg).flags
        if flags["two_sided"]:
            assert flags["integrable_sesquiWalker"]
        if flags["integrable_sesquiWalker"]:
            assert flags["sesquiWalker"]
        if flags["sesquiWalker"]:
            assert flags["walker_form"]


def test_cp_verdict_no_h():
    g_inst, h_inst, t_field = mk_cp_example(x * y)
    for inst in (g_inst, h_inst):
        cfg = AnalysisConfig(spec=inst.spec, t_field=t_field, points=8, seed=2, exclude=(("v", 0.0),))
        assert run_analysis(cfg).verdict == "no:H"


def test_general_kind_inconclusive():
    from nullplane.tensor import conformal_rescale
    from nullplane.exprkit import parse_expr

    spec = conformal_rescale(mk_two_sided(u**2, v**2, u).spec, parse_expr("exp(x/4)"))
    report = run_analysis(AnalysisConfig(spec=spec, points=5, seed=1))
    assert report.verdict == "inconclusive"
    assert report.flags["Z_parallel"] is None
    assert "quartic_sd" not in report.point_records[0]


GENERAL_SPEC = """
; conformal rescale of the walker metric (u^2, v^2, u) by exp(y/4),
; written out as ten general components with the matching rescaled tetrad
[metric]
kind = general
g_uu = 0
g_uv = 0
g_ux = exp(y/2)
g_uy = 0
g_vv = 0
g_vx = 0
g_vy = exp(y/2)
g_xx = exp(y/2) * u^2
g_xy = exp(y/2) * u
g_yy = exp(y/2) * v^2

[tetrad]
l0 = exp(-y/4)
l1 = 0
l2 = 0
l3 = 0
n0 = -u^2/2 * exp(-y/4)
n1 = -u/2 * exp(-y/4)
n2 = exp(-y/4)
n3 = 0
m0 = u/2 * exp(-y/4)
m1 = v^2/2 * exp(-y/4)
m2 = 0
m3 = -exp(-y/4)
mt0 = 0
mt1 = exp(-y/4)
mt2 = 0
mt3 = 0
"""


def test_general_kind_with_user_tetrad(tmp_path):
    """A conformal rescale by a factor constant on the null surfaces keeps
    both plane distributions parallel; with a user tetrad the frame flags
    are computed even though the verdict stays inconclusive."""
    path = tmp_path / "general.ini"
    path.write_text(GENERAL_SPEC)
    cfg = load_spec_file(str(path))
    cfg.points = 6
    report = run_analysis(cfg)
    assert report.flags["Z_parallel"] is True
    assert report.flags["two_sided"] is True
    assert report.flags["walker_form"] is True
    assert report.verdict == "inconclusive"
    assert report.flags["obstruction_zero"] is None


def test_determinism_byte_identical():
    cfg = AnalysisConfig(spec=mk_two_sided(u**2, v**2, u).spec, points=10, seed=11)
    a = run_analysis(cfg).to_json(with_timestamp=False)
    b = run_analysis(cfg).to_json(with_timestamp=False)
    assert a == b


def test_threads_do_not_change_results(monkeypatch):
    cfg = AnalysisConfig(spec=mk_two_sided(u**2, v**2, u).spec, points=12, seed=13)
    base = run_analysis(cfg).to_json(with_timestamp=False)
    monkeypatch.setenv("NULLPLANE_THREADS", "3")
    threaded = run_analysis(cfg).to_json(with_timestamp=False)
    assert base == threaded


def test_report_json_roundtrip():
    cfg = AnalysisConfig(spec=mk_two_sided(u**2, v**2, u).spec, points=4, seed=1)
    report = run_analysis(cfg)
    parsed = json.loads(report.to_json())
    assert parsed["verdict"] == "yes"
    assert parsed["tool"]["name"] == "nullplane"
    assert "generated_at" in parsed
    assert len(parsed["points"]) == 4


# ---------------------------------------------------------------------------
# CLI


def test_cli_analyze_json(spec_file, capsys):
    code = main(["analyze", "--spec", spec_file, "--points", "5", "--seed", "42", "--format", "json"])
    assert code == 0
    out = json.loads(capsys.readouterr().out)
    assert out["verdict"] == "yes"
    assert out["config"]["points"] == 5


def test_cli_analyze_text(spec_file, capsys):
    code = main(["analyze", "--spec", spec_file, "--points", "4", "--format", "text"])
    assert code == 0
    assert "verdict: yes" in capsys.readouterr().out


def test_cli_analyze_bad_spec(tmp_path, capsys):
    bad = tmp_path / "bad.ini"
    bad.write_text("[metric]\nkind = walker\na = u^\nb = 0\nc = 0\n")
    assert main(["analyze", "--spec", bad.as_posix()]) == 2
    assert "error" in capsys.readouterr().err


def test_cli_analyze_missing_file(capsys):
    assert main(["analyze", "--spec", "/nonexistent.ini"]) == 2


def test_cli_family_cp(capsys):
    code = main(["family", "--name", "cp", "--F", "x*y", "--points", "6", "--format", "json"])
    assert code == 0
    out = json.loads(capsys.readouterr().out)
    assert set(out) == {"cp_g", "cp_h"}
    assert out["cp_g"]["verdict"] == "no:H"
    assert out["cp_h"]["verdict"] == "no:H"


def test_cli_family_two_sided(capsys):
    code = main(
        ["family", "--name", "two_sided", "--a", "u^2", "--b", "v^2", "--c", "u", "--points", "5", "--format", "json"]
    )
    assert code == 0
    assert json.loads(capsys.readouterr().out)["verdict"] == "yes"


def test_cli_family_random_sd(capsys):
    code = main(["family", "--name", "sd2015", "--seed", "7", "--degree", "2", "--points", "5", "--format", "json"])
    assert code == 0
    out = json.loads(capsys.readouterr().out)
    assert out["flags"]["SD"] is True


def test_cli_family_missing_argument(capsys):
    assert main(["family", "--name", "two_sided"]) == 2


def test_cli_family_constraint_violation_is_analysis_error(capsys):
    code = main(["family", "--name", "two_sided", "--a", "v", "--b", "0", "--c", "0"])
    assert code == 1


def test_cli_t_field_override(spec_file, capsys):
    code = main(["analyze", "--spec", spec_file, "--t0", "u", "--t1", "v", "--points", "4", "--format", "json"])
    assert code == 0
    out = json.loads(capsys.readouterr().out)
    assert out["config"]["lambda"] == {"t0": "u", "t1": "v"}


def test_cli_usage_error_exit_code():
    with pytest.raises(SystemExit) as err:
        main(["analyze"])  # missing --spec
    assert err.value.code == 2


# ---------------------------------------------------------------------------
# selftest plumbing


def test_selftest_mutation_detection():
    """Perturbing the self-dual family's off-diagonal component by 0.01 u^3
    must break the anti-self-dual vanishing that the family guarantees."""
    from nullplane.exprkit.calculus import add_, mul_
    from nullplane.exprkit import Num, parse_expr
    from nullplane.frames import walker_tetrad
    from nullplane.tensor import MetricSpec, curvature, metric_jet
    from nullplane.weylalg import root_structure, weyl_quartic

    inst = mk_sd_two_sided(*random_polys(70_200, 2, ("x", "y"), 9))
    pts = sample_box(70_201, 8)
    broken = MetricSpec.walker(
        inst.spec.a, inst.spec.b, add_(inst.spec.c, mul_(Num(0.01), parse_expr("u^3")))
    )
    pack = curvature(metric_jet(broken, pts, 3))
    asd = weyl_quartic(pack, walker_tetrad(broken), "ASD")
    assert any(root_structure(f).type_string != "O" for f in asd)

import json
import os

import numpy as np
import pytest

import gaplab.harness as harness
from gaplab.errors import ConvergenceError, InapplicableError, SweepAborted, UsageError
from gaplab.harness import (ExperimentConfig, SeriesFit, SweepResult, dump_json, emit_report,
                            fit_exponent, judge, load_report, run_lower_pipeline,
                            run_upper_sweep, summary_text)

from conftest import DATA

SMALL = {"schema_version": 1, "hessian": [[1, 0], [0, 4]],
         "epsilons": [1e-2, 10 ** -2.5, 1e-3, 10 ** -3.5],
         "grid": {"n_theta": 32}, "spectrum": {"grid_size": 256}}


@pytest.fixture(scope="module")
def small_cfg():
    return ExperimentConfig.from_dict(SMALL)


@pytest.fixture(scope="module")
def upper(small_cfg):
    return run_upper_sweep(small_cfg)


# -- fitting ------------------------------------------------------------------
def test_fit_exact_power_law():
    x = np.geomspace(1e-4, 1e-1, 6)
    fit = fit_exponent(np.column_stack([x, 5 * x ** -0.5]))
    assert fit.slope == pytest.approx(-0.5, abs=1e-12)
    assert fit.intercept == pytest.approx(np.log(5), abs=1e-12)
    assert fit.r2 == pytest.approx(1.0)


def test_fit_noisy_power_law():
    rng = np.random.default_rng(12345)
    x = np.geomspace(1e-4, 1e-1, 10)
    y = x ** 0.414 * (1 + 0.01 * rng.standard_normal(x.size))
    fit = fit_exponent(list(zip(x, y)))
    assert fit.slope == pytest.approx(0.414, abs=0.02)
    assert fit.stderr > 0


def test_fit_two_points():
    fit = fit_exponent([(1.0, 1.0), (np.e, np.e ** 2)])
    assert fit.slope == pytest.approx(2.0, abs=1e-14)


@pytest.mark.parametrize("pts", [[(1, 1)], [(1, 1), (2, -1)], [(0, 1), (2, 3)], [(1, 1), (1, 2)]])
def test_fit_errors(pts):
    with pytest.raises(UsageError):
        fit_exponent(pts)


def test_judge_needs_four_points():
    f = judge("q", [1e-2, 1e-3, 1e-4], [1, 2, 3], -0.3, 0.05)
    assert f.verdict == "FAIL" and f.slope is None and "3 point" in f.note


# -- config -------------------------------------------------------------------
def test_config_defaults_and_round_trip(small_cfg):
    assert small_cfg.n_theta == 32 and small_cfg.epsilons[0] == 1e-2
    again = ExperimentConfig.from_dict(small_cfg.to_dict())
    assert again == small_cfg
    d = ExperimentConfig().to_dict()
    assert d["epsilons"] == [1e-2, 10 ** -2.5, 1e-3, 10 ** -3.5, 1e-4]


@pytest.mark.parametrize("patch", [
    {"schema_version": 2},
    {"bogus": 1},
    {"grid": {"n_theta": 32, "nr": 4}},
    {"boundary": {"kind": "sideways"}},
    {"boundary": {"kind": "custom"}},
    {"boundary": {"axis": 3}},
    {"epsilons": [1e-3, 1e-2]},
    {"epsilons": [1e-2, -1e-3]},
    {"hessian": [[1, 0], [0, -1]]},
    {"hessian": [[1, 0, 0], [0, 1, 0], [0, 0, 1]]},
    {"grid": {"n_r": 40}},
    {"grid": {"cells_below": 6}},
    {"tolerances": {"cg": 0}},
])
def test_config_rejections(patch):
    d = dict(SMALL)
    d.update(patch)
    with pytest.raises(UsageError):
        ExperimentConfig.from_dict(d)


def test_missing_schema_version():
    with pytest.raises(UsageError):
        ExperimentConfig.from_dict({"n": 3})


def test_config_file_errors(tmp_path):
    p = tmp_path / "c.json"
    p.write_text("{not json")
    with pytest.raises(UsageError):
        ExperimentConfig.from_json(str(p))
    with pytest.raises(UsageError):
        ExperimentConfig.from_json(str(tmp_path / "missing.json"))


# -- sweeps -------------------------------------------------------------------
def test_upper_sweep(upper):
    assert upper.verdict == "PASS"
    assert [f.quantity for f in upper.fits] == ["max_gradient", "omega_sqrt_eps"]
    for f in upper.fits:
        assert f.r2 > 0.99 and f.halfwidth >= 0
    assert len(upper.records) == 4


def test_single_eps_keeps_records(small_cfg):
    res = run_upper_sweep(small_cfg.replace(epsilons=(1e-3,)))
    assert len(res.records) == 1
    assert res.verdict == "FAIL"
    assert all(f.slope is None and "rejected" in f.note for f in res.fits)


def test_parallel_invariance(small_cfg, upper):
    par = run_upper_sweep(small_cfg, workers=2)
    for a, b in zip(upper.records, par.records):
        for k in ("max_gradient", "omega_sqrt_eps", "U1_sqrt_eps", "witness_gradient"):
            assert a[k] == pytest.approx(b[k], rel=1e-12, abs=1e-300)


def test_determinism(small_cfg, upper, tmp_path):
    again = run_upper_sweep(small_cfg)
    emit_report([upper], str(tmp_path / "a"))
    emit_report([again], str(tmp_path / "b"))
    a = (tmp_path / "a" / "report.json").read_bytes()
    b = (tmp_path / "b" / "report.json").read_bytes()
    assert a == b
    assert b"runtime" not in a


def test_lower_pipeline(small_cfg):
    cfg = small_cfg.replace(boundary_kind="coordinate", boundary_axis=2)
    res = run_lower_pipeline(cfg)
    assert res.verdict == "PASS"
    assert all(r["U1_sqrt_eps"] > 0 for r in res.records)


def test_lower_even_data_inapplicable(small_cfg):
    theta = 2 * np.pi * np.arange(32) / 32
    cfg = small_cfg.replace(boundary_kind="custom", boundary_axis=2,
                            boundary_samples=tuple(np.cos(2 * theta)))
    res = run_lower_pipeline(cfg)
    assert res.verdict == "INAPPLICABLE"
    assert all(abs(r["U1_sqrt_eps"]) < 1e-12 for r in res.records)


def test_lower_parity_failure(small_cfg):
    cfg = small_cfg.replace(boundary_kind="coordinate", boundary_axis=1)
    with pytest.raises(InapplicableError):
        run_lower_pipeline(cfg)
    cfg = small_cfg.replace(hessian=((2.0, 0.5), (0.5, 1.0)), boundary_kind="coordinate")
    with pytest.raises(InapplicableError):
        run_lower_pipeline(cfg)


def test_abort_keeps_partial_records(small_cfg, monkeypatch, tmp_path):
    real = harness.solve_reduced

    def flaky(weight, eps, **kw):
        if eps < 2e-3:
            raise ConvergenceError("forced", residual=1e-3)
        return real(weight, eps, **kw)

    monkeypatch.setattr(harness, "solve_reduced", flaky)
    with pytest.raises(SweepAborted) as err:
        run_upper_sweep(small_cfg)
    part = err.value.partial
    assert part.verdict == "ABORTED" and len(part.records) == 2
    emit_report([part], str(tmp_path))
    assert load_report(str(tmp_path / "report.json"))[0].verdict == "ABORTED"


# -- reports ------------------------------------------------------------------
def _synthetic():
    eps = [1e-2, 10 ** -2.5, 1e-3, 10 ** -3.5, 1e-4]
    pred = {"n": 3, "lambda1": 1.0, "lambda1_error": 0.0, "alpha": np.sqrt(2) - 1,
            "alpha_interval": [np.sqrt(2) - 1] * 2, "predicted_gradient_exponent":
            (np.sqrt(2) - 2) / 2, "exponent_interval": [(np.sqrt(2) - 2) / 2] * 2,
            "ball_beta": (np.sqrt(2) - 1) / 2}
    up_recs = [{"epsilon": e, "max_gradient": 0.9 * e ** -0.29, "omega_sqrt_eps": e ** 0.21,
                "runtime": 0.1} for e in eps]
    lo_recs = [{"epsilon": e, "U1_sqrt_eps": 0.7 * e ** 0.3, "witness_gradient": e ** -0.2,
                "runtime": 0.2} for e in eps]
    up = SweepResult("upper", "ball", pred, up_recs, [
        judge("max_gradient", eps, [r["max_gradient"] for r in up_recs], -0.2929, 0.05),
        judge("omega_sqrt_eps", eps, [r["omega_sqrt_eps"] for r in up_recs], 0.2071, 0.05)],
        "PASS")
    lo = SweepResult("lower", "ball", pred, lo_recs, [
        judge("U1_sqrt_eps", eps, [r["U1_sqrt_eps"] for r in lo_recs], 0.2071, 0.05),
        judge("witness_gradient", eps, [r["witness_gradient"] for r in lo_recs], -0.2929, 0.05)],
        "FAIL")
    return [up, lo]


def test_golden_summary(tmp_path):
    res = _synthetic()
    written = emit_report(res, str(tmp_path))
    with open(os.path.join(DATA, "golden_summary.txt")) as fh:
        golden = fh.read()
    assert (tmp_path / "summary.txt").read_text() == golden
    assert "[upper] ball: PASS" in golden and "[lower] ball: FAIL" in golden
    assert len(written) == 6


def test_single_sweep_files_and_round_trip(tmp_path):
    res = _synthetic()[:1]
    written = emit_report(res, str(tmp_path / "one"))
    names = sorted(os.path.basename(p) for p in written)
    assert names == ["report.json", "summary.txt", "upper_0.csv", "upper_0_plot.dat"]
    text = (tmp_path / "one" / "report.json").read_text()
    assert dump_json(json.loads(text)) == text
    emit_report(load_report(str(tmp_path / "one" / "report.json")), str(tmp_path / "two"))
    assert (tmp_path / "two" / "report.json").read_text() == text
    csv = (tmp_path / "one" / "upper_0.csv").read_text().splitlines()
    assert csv[0].startswith("epsilon,") and len(csv) == 6
    plot = (tmp_path / "one" / "upper_0_plot.dat").read_text().splitlines()
    assert len(plot) == 1 + 2 * 5


def test_float_repr_round_trips():
    x = 0.1 + 0.2
    assert json.loads(dump_json({"x": x}))["x"] == x


def test_emit_errors(tmp_path):
    with pytest.raises(UsageError):
        emit_report([], str(tmp_path))
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(harness.GaplabError, match="file"):
        emit_report(_synthetic(), str(blocker / "sub"))


def test_series_fit_dict():
    f = SeriesFit("q", 1.0, 0.0, 1.0, 0.1, 1.0, 0.05, "PASS")
    assert f.to_dict()["verdict"] == "PASS"

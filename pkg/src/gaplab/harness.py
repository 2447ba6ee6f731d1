"""Experiment orchestration: configs, epsilon sweeps, exponent fits, reports."""
import copy
import csv
import json
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np
from scipy import stats

from .errors import GaplabError, InapplicableError, NumericalError, SweepAborted, UsageError
from .exponents import alpha_of, gradient_exponent, predict_rate
from .geometry import GapGeometry, build_weight, check_spd
from .reduced import disk_grid, mode_norm, project_mode, solve_reduced
from .spectral import classify_parity, odd_eigenfunction, solve_spectrum
from .validation import (check_epsilons, check_int, check_keys, check_matrix,
                         check_real)

log = logging.getLogger("gaplab")

SCHEMA_VERSION = 1
DEFAULT_EPSILONS = (1e-2, 10 ** -2.5, 1e-3, 10 ** -3.5, 1e-4)
EXPONENT_TOL = 0.05
MIN_FIT_POINTS = 4
MIN_CELLS_BELOW = 10


# --------------------------------------------------------------------------
# configuration
# --------------------------------------------------------------------------
_TOP_KEYS = {"schema_version", "name", "n", "hessian", "quartic_coeff", "R0",
             "f_share", "epsilons", "epsilon", "R", "grid", "spectrum",
             "boundary", "tolerances", "also_gap", "seed"}
_GRID_KEYS = {"n_theta", "n_r", "ratio", "cells_below", "n_z"}
_SPECTRUM_KEYS = {"grid_size", "k"}
_BOUNDARY_KEYS = {"kind", "axis", "samples"}
_TOL_KEYS = {"cg", "exponent"}
BOUNDARY_KINDS = ("Y1_ramp", "coordinate", "custom")


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a sweep needs; built from JSON via :meth:`from_dict`."""

    n: int = 3
    hessian: tuple = ((1.0, 0.0), (0.0, 1.0))
    quartic_coeff: float = 0.0
    R0: float = 1.0
    f_share: float = 0.5
    epsilons: tuple = DEFAULT_EPSILONS
    epsilon: float = 1e-2
    R: float = 1.0
    n_theta: int = 128
    n_r: Optional[int] = None
    ratio: float = 1.03
    cells_below: int = 12
    n_z: int = 16
    spectral_grid: object = None
    spectral_k: int = 6
    boundary_kind: str = "Y1_ramp"
    boundary_axis: int = 1
    boundary_samples: tuple = None
    cg_tol: float = 1e-10
    exponent_tol: float = EXPONENT_TOL
    also_gap: bool = False
    name: str = "experiment"
    seed: int = 0

    # -- parsing -----------------------------------------------------------
    @classmethod
    def from_dict(cls, data):
        check_keys(data, _TOP_KEYS, "config")
        version = data.get("schema_version")
        if version != SCHEMA_VERSION:
            raise UsageError(f"schema_version must be {SCHEMA_VERSION}, got {version!r}")
        kw = {}
        if "name" in data:
            kw["name"] = str(data["name"])
        if "n" in data:
            kw["n"] = check_int(data["n"], "n", 2)
        n = kw.get("n", 3)
        if "hessian" in data:
            M = check_matrix(data["hessian"], n - 1, "hessian")
            kw["hessian"] = tuple(tuple(float(v) for v in row) for row in M)
        elif n != 3:
            kw["hessian"] = tuple(tuple(float(i == j) for j in range(n - 1)) for i in range(n - 1))
        for key in ("quartic_coeff", "f_share"):
            if key in data:
                kw[key] = check_real(data[key], key)
        for key in ("R0", "R", "epsilon"):
            if key in data:
                kw[key] = check_real(data[key], key, positive=True)
        if "epsilons" in data:
            kw["epsilons"] = tuple(float(e) for e in check_epsilons(data["epsilons"]))
        if "also_gap" in data:
            kw["also_gap"] = bool(data["also_gap"])
        if "seed" in data:
            kw["seed"] = check_int(data["seed"], "seed", 0)

        grid = check_keys(data.get("grid", {}), _GRID_KEYS, "grid")
        for key in ("n_theta", "cells_below", "n_z"):
            if key in grid:
                kw[key] = check_int(grid[key], f"grid.{key}", 1)
        if grid.get("n_r") is not None:
            kw["n_r"] = check_int(grid["n_r"], "grid.n_r", 4)
        if "ratio" in grid:
            kw["ratio"] = check_real(grid["ratio"], "grid.ratio", positive=True)

        spec = check_keys(data.get("spectrum", {}), _SPECTRUM_KEYS, "spectrum")
        if "grid_size" in spec:
            gs = spec["grid_size"]
            kw["spectral_grid"] = tuple(gs) if isinstance(gs, list) else gs
        if "k" in spec:
            kw["spectral_k"] = check_int(spec["k"], "spectrum.k", 2)

        bnd = check_keys(data.get("boundary", {}), _BOUNDARY_KEYS, "boundary")
        if "kind" in bnd:
            if bnd["kind"] not in BOUNDARY_KINDS:
                raise UsageError(f"boundary.kind must be one of {BOUNDARY_KINDS}")
            kw["boundary_kind"] = bnd["kind"]
        if "axis" in bnd:
            kw["boundary_axis"] = check_int(bnd["axis"], "boundary.axis", 1)
        if "samples" in bnd:
            kw["boundary_samples"] = tuple(float(v) for v in bnd["samples"])

        tol = check_keys(data.get("tolerances", {}), _TOL_KEYS, "tolerances")
        if "cg" in tol:
            kw["cg_tol"] = check_real(tol["cg"], "tolerances.cg", positive=True)
        if "exponent" in tol:
            kw["exponent_tol"] = check_real(tol["exponent"], "tolerances.exponent", positive=True)
        cfg = cls(**kw)
        cfg.validate()
        return cfg

    @classmethod
    def from_json(cls, path):
        try:
            with open(path) as fh:
                data = json.load(fh)
        except OSError as exc:
            raise UsageError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise UsageError(f"config {path} is not valid JSON: {exc}") from exc
        return cls.from_dict(data)

    def to_dict(self):
        return {
            "schema_version": SCHEMA_VERSION, "name": self.name, "n": self.n,
            "hessian": [list(r) for r in self.hessian],
            "quartic_coeff": self.quartic_coeff, "R0": self.R0, "f_share": self.f_share,
            "epsilons": list(self.epsilons), "epsilon": self.epsilon, "R": self.R,
            "grid": {"n_theta": self.n_theta, "n_r": self.n_r, "ratio": self.ratio,
                     "cells_below": self.cells_below, "n_z": self.n_z},
            "spectrum": {"grid_size": self.spectral_grid_size, "k": self.spectral_k},
            "boundary": {"kind": self.boundary_kind, "axis": self.boundary_axis,
                         **({"samples": list(self.boundary_samples)}
                            if self.boundary_samples is not None else {})},
            "tolerances": {"cg": self.cg_tol, "exponent": self.exponent_tol},
            "also_gap": self.also_gap, "seed": self.seed,
        }

    # -- derived -----------------------------------------------------------
    def validate(self):
        if not 1 <= self.boundary_axis <= self.n - 1:
            raise UsageError(f"boundary.axis must be in 1..{self.n - 1}")
        if self.boundary_kind == "custom":
            if self.boundary_samples is None or len(self.boundary_samples) != self.n_theta:
                raise UsageError(f"custom boundary needs {self.n_theta} samples")
        if self.n_r is None and self.cells_below < MIN_CELLS_BELOW:
            raise UsageError(f"grid.cells_below must be >= {MIN_CELLS_BELOW}")
        if self.n == 3 and self.n_r is not None:
            grid = self.disk_grid()
            rho = np.sqrt(min(self.epsilons))
            if grid.cells_below(rho) < MIN_CELLS_BELOW:
                raise UsageError(
                    f"grid has {grid.cells_below(rho)} radial cells below sqrt(eps_min); "
                    f"need >= {MIN_CELLS_BELOW}")
        self.geometry(self.epsilon)

    @property
    def matrix(self):
        return np.array(self.hessian, dtype=float)

    @property
    def spectral_grid_size(self):
        if self.spectral_grid is not None:
            return list(self.spectral_grid) if isinstance(self.spectral_grid, tuple) else self.spectral_grid
        return 1024 if self.n == 3 else [96, 192]

    def geometry(self, eps):
        return GapGeometry(self.n, eps, self.matrix, self.quartic_coeff, self.f_share, self.R0)

    def disk_grid(self):
        return disk_grid(self.R, self.n_theta, n_r=self.n_r, eps_min=min(self.epsilons),
                         ratio=self.ratio, cells_below=self.cells_below)

    def replace(self, **kw):
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        d.update(kw)
        out = ExperimentConfig(**d)
        out.validate()
        return out


# --------------------------------------------------------------------------
# fitting
# --------------------------------------------------------------------------
class PowerFit(NamedTuple):
    slope: float
    intercept: float
    r2: float
    stderr: float


def fit_exponent(points):
    """Least-squares line through ``(log x, log y)``.

    Parameters
    ----------
    points : sequence of (x, y)
        At least two, all coordinates positive.

    Returns
    -------
    PowerFit
        ``(slope, intercept, r2, stderr)``; ``stderr`` is the standard
        error of the slope (zero for two points).
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise UsageError("points must be a sequence of (x, y) pairs")
    if pts.shape[0] < 2:
        raise UsageError("need at least 2 points to fit an exponent")
    if not np.all(np.isfinite(pts)) or np.any(pts <= 0):
        raise UsageError("fit_exponent needs positive finite values")
    lx, ly = np.log(pts[:, 0]), np.log(pts[:, 1])
    if np.ptp(lx) == 0:
        raise UsageError("all x values coincide")
    if pts.shape[0] == 2:
        slope = (ly[1] - ly[0]) / (lx[1] - lx[0])
        return PowerFit(float(slope), float(ly[0] - slope * lx[0]), 1.0, 0.0)
    res = stats.linregress(lx, ly)
    return PowerFit(float(res.slope), float(res.intercept), float(res.rvalue ** 2),
                    float(res.stderr))


@dataclass(frozen=True)
class SeriesFit:
    """A fitted exponent compared to its prediction."""

    quantity: str
    slope: Optional[float]
    intercept: Optional[float]
    r2: Optional[float]
    halfwidth: Optional[float]
    predicted: float
    tolerance: float
    verdict: str
    note: str = ""

    def to_dict(self):
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def judge(quantity, x, y, predicted, tol, min_points=MIN_FIT_POINTS):
    """Fit ``y ~ x^p`` and compare ``p`` with ``predicted``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < min_points:
        return SeriesFit(quantity, None, None, None, None, float(predicted), tol, "FAIL",
                         f"fit rejected: {x.size} point(s), need {min_points}")
    if np.any(y <= 0):
        return SeriesFit(quantity, None, None, None, None, float(predicted), tol, "FAIL",
                         "fit rejected: non-positive values")
    fit = fit_exponent(np.column_stack([x, y]))
    ok = abs(fit.slope - predicted) <= tol
    return SeriesFit(quantity, fit.slope, fit.intercept, fit.r2, 2.0 * fit.stderr,
                     float(predicted), tol, "PASS" if ok else "FAIL")


@dataclass
class SweepResult:
    """Per-epsilon records plus fitted exponents and verdicts."""

    kind: str
    name: str
    prediction: dict
    records: list
    fits: list
    verdict: str
    notes: list = field(default_factory=list)

    def to_dict(self, include_runtime=False):
        recs = []
        for r in self.records:
            r = dict(r)
            if not include_runtime:
                r.pop("runtime", None)
            recs.append(r)
        return {"kind": self.kind, "name": self.name, "prediction": self.prediction,
                "records": recs, "fits": [f.to_dict() for f in self.fits],
                "verdict": self.verdict, "notes": list(self.notes)}

    @classmethod
    def from_dict(cls, d):
        fits = [SeriesFit(**f) for f in d["fits"]]
        return cls(d["kind"], d["name"], d["prediction"], d["records"], fits,
                   d["verdict"], d.get("notes", []))


# --------------------------------------------------------------------------
# sweeps
# --------------------------------------------------------------------------
def _spectral_weight(cfg):
    return build_weight(cfg.matrix, cfg.spectral_grid_size)


def _boundary_data(cfg, basis_disk, theta, lower=False):
    kind = cfg.boundary_kind
    if kind == "custom":
        return np.array(cfg.boundary_samples, dtype=float)
    if kind == "coordinate":
        return cfg.R * (np.cos(theta) if cfg.boundary_axis == 1 else np.sin(theta))
    try:
        return odd_eigenfunction(basis_disk, cfg.boundary_axis)
    except InapplicableError:
        if lower:
            raise
        return basis_disk.eigenfunction(basis_disk.lambda1_index)


def _solve_point(task):
    """One sweep point; top level so worker processes can run it."""
    cfg, eps, boundary, Y = task
    t0 = time.perf_counter()
    weight = build_weight(cfg.matrix, cfg.n_theta)
    grid = cfg.disk_grid()
    field_ = solve_reduced(weight, eps, boundary=boundary, grid=grid, tol=cfg.cg_tol)
    gmax, loc = field_.max_gradient(skip_outer=2)
    rho = np.sqrt(eps)
    rec = {
        "epsilon": float(eps),
        "max_gradient": gmax,
        "gradient_location": [loc[0], loc[1]],
        "omega_sqrt_eps": mode_norm(field_, rho),
        "U1_sqrt_eps": project_mode(field_, Y).at(rho),
        "witness_gradient": field_.max_gradient(skip_outer=2, r_range=(0.5 * rho, 2.0 * rho))[0],
        "center_value": field_.center_value,
        "residual": field_.residual,
    }
    if cfg.also_gap:
        from .gapfull import map_strip, solve_gap
        strip = map_strip(cfg.geometry(eps), rho=min(cfg.R, cfg.R0), n_z=cfg.n_z,
                          grid=grid if cfg.R <= cfg.R0 else None, n_theta=cfg.n_theta)
        sol = solve_gap(strip, phi=boundary)
        rec["gap_max_gradient"] = sol.max_gradient()[0]
    rec["runtime"] = time.perf_counter() - t0
    return rec


def _run_points(cfg, boundary, Y, workers, kind="upper"):
    tasks = [(cfg, eps, boundary, Y) for eps in cfg.epsilons]
    records = []
    try:
        if workers and workers > 1 and len(tasks) > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                # map preserves order, so the first failure leaves a clean prefix
                for rec in pool.map(_solve_point, tasks):
                    records.append(rec)
        else:
            for t in tasks:
                records.append(_solve_point(t))
    except (NumericalError, UsageError) as exc:
        eps = cfg.epsilons[len(records)]
        partial = SweepResult(kind, cfg.name, {}, records, [], "ABORTED",
                              [f"solve failed at epsilon={eps!r}: {exc}"])
        raise SweepAborted(f"sweep aborted at epsilon={eps:g}: {exc}", partial,
                           getattr(exc, "residual", None)) from exc
    return records


def _prediction(cfg):
    if cfg.n != 3:
        raise UsageError("sweeps use the planar reduced solver and need n = 3")
    basis = solve_spectrum(_spectral_weight(cfg), k=cfg.spectral_k)
    rep = predict_rate(basis)
    basis_disk = solve_spectrum(build_weight(cfg.matrix, cfg.n_theta), k=cfg.spectral_k,
                                extrapolate=False)
    return rep, basis_disk


def run_upper_sweep(cfg, workers=1):
    """Reduced solves over ``cfg.epsilons``; fit max gradient and ``omega(sqrt eps)``.

    The max-gradient slope is compared with ``(alpha - 1) / 2`` and the
    ``omega`` slope with ``alpha / 2``.
    """
    rep, basis_disk = _prediction(cfg)
    theta = basis_disk.weight.theta
    boundary = _boundary_data(cfg, basis_disk, theta)
    Y = basis_disk.eigenfunction(basis_disk.lambda1_index)
    records = _run_points(cfg, boundary, Y, workers)
    eps = [r["epsilon"] for r in records]
    alpha = rep.alpha
    fits = [judge("max_gradient", eps, [r["max_gradient"] for r in records],
                  gradient_exponent(alpha), cfg.exponent_tol),
            judge("omega_sqrt_eps", eps, [r["omega_sqrt_eps"] for r in records],
                  alpha / 2.0, cfg.exponent_tol)]
    if cfg.also_gap:
        fits.append(judge("gap_max_gradient", eps, [r["gap_max_gradient"] for r in records],
                          gradient_exponent(alpha), cfg.exponent_tol))
    verdict = "PASS" if all(f.verdict == "PASS" for f in fits) else "FAIL"
    return SweepResult("upper", cfg.name, rep.to_dict(), records, fits, verdict)


def run_lower_pipeline(cfg, workers=1):
    """Mode-amplitude pipeline for odd boundary data.

    Projects each solution on the ``lambda_1`` eigenfunction odd in
    ``x_axis`` and checks that ``U_1(sqrt eps) > 0`` scales like
    ``eps^(alpha/2)``; the largest gradient on ``sqrt(eps)/2 <= r <= 2 sqrt(eps)``
    is the lower-bound witness, expected to scale like ``eps^((alpha-1)/2)``.

    Raises
    ------
    InapplicableError
        If the weight is not symmetric in ``x_axis`` or the ``lambda_1``
        eigenspace holds no odd function.
    """
    if cfg.boundary_kind not in ("coordinate", "Y1_ramp", "custom"):
        raise UsageError("unsupported boundary kind")
    rep, basis_disk = _prediction(cfg)
    axis = cfg.boundary_axis
    parity = classify_parity(basis_disk, axis)
    if not parity.lambda1_has_odd:
        raise InapplicableError(f"no lambda_1 eigenfunction is odd in x_{axis}")
    Y = odd_eigenfunction(basis_disk, axis)
    theta = basis_disk.weight.theta
    boundary = _boundary_data(cfg, basis_disk, theta, lower=True)
    records = _run_points(cfg, boundary, Y, workers, kind="lower")
    eps = [r["epsilon"] for r in records]
    amps = np.array([r["U1_sqrt_eps"] for r in records])
    alpha = rep.alpha
    scale = max(np.max(np.abs(boundary)), 1e-300)
    if np.all(np.abs(amps) <= 1e-10 * scale):
        return SweepResult("lower", cfg.name, rep.to_dict(), records, [], "INAPPLICABLE",
                           ["U1 vanishes identically: boundary data has no odd lambda_1 component"])
    notes = []
    positive = bool(np.all(amps > 0))
    if not positive:
        notes.append("U1 amplitude is not positive at every epsilon")
    fits = [judge("U1_sqrt_eps", eps, amps, alpha / 2.0, cfg.exponent_tol),
            judge("witness_gradient", eps, [r["witness_gradient"] for r in records],
                  gradient_exponent(alpha), cfg.exponent_tol)]
    ok = positive and all(f.verdict == "PASS" for f in fits)
    return SweepResult("lower", cfg.name, rep.to_dict(), records, fits,
                       "PASS" if ok else "FAIL", notes)


# --------------------------------------------------------------------------
# reports
# --------------------------------------------------------------------------
def _plain(obj):
    """Convert numpy scalars/arrays so ``json`` can serialize them."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not np.isfinite(obj):
        return None
    return obj


def dump_json(obj):
    """Deterministic JSON: sorted keys, shortest round-trip float repr."""
    return json.dumps(_plain(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def _write(path, text):
    try:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise GaplabError(f"cannot write {path}: {exc}") from exc


def _series(result):
    """The ``(quantity, x, y)`` columns that were fitted."""
    eps = [r["epsilon"] for r in result.records]
    out = []
    for f in result.fits:
        ys = [r.get(f.quantity) for r in result.records]
        out.append((f, eps, ys))
    return out


def summary_text(results):
    lines = []
    for res in results:
        lines.append(f"[{res.kind}] {res.name}: {res.verdict}")
        pred = res.prediction
        if pred:
            lines.append(f"  lambda_1 = {pred['lambda1']:.10g} +/- {pred['lambda1_error']:.2g}, "
                         f"alpha = {pred['alpha']:.10g}")
        for f in res.fits:
            if f.slope is None:
                lines.append(f"  {f.quantity}: {f.verdict} ({f.note})")
            else:
                lines.append(f"  {f.quantity}: slope {f.slope:.4f} +/- {f.halfwidth:.4f}, "
                             f"predicted {f.predicted:.4f}, tol {f.tolerance:g} -> {f.verdict}")
        for note in res.notes:
            lines.append(f"  note: {note}")
    overall = "PASS" if results and all(r.verdict == "PASS" for r in results) else "FAIL"
    lines.append(f"overall: {overall}")
    return "\n".join(lines) + "\n"


def emit_report(results, path, include_runtime=False):
    """Write ``report.json``, ``summary.txt`` and per-sweep CSV and plot data.

    Parameters
    ----------
    results : list of SweepResult
    path : str
        Output directory (created if missing).
    include_runtime : bool
        Runtimes make the JSON non-reproducible, so by default they only
        appear in the CSV tables.

    Returns
    -------
    list of str
        Written file paths.
    """
    if isinstance(results, SweepResult):
        results = [results]
    if not results:
        raise UsageError("emit_report needs at least one result")
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as exc:
        raise GaplabError(f"cannot create output directory {path}: {exc}") from exc
    written = []
    doc = {"schema_version": SCHEMA_VERSION,
           "results": [r.to_dict(include_runtime) for r in results]}
    p = os.path.join(path, "report.json")
    _write(p, dump_json(doc))
    written.append(p)

    for i, res in enumerate(results):
        stem = f"{res.kind}_{i}"
        cols = sorted({k for r in res.records for k in r if k != "gradient_location"})
        cols.remove("epsilon")
        cols = ["epsilon"] + cols
        p = os.path.join(path, f"{stem}.csv")
        try:
            with open(p, "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(cols)
                for r in res.records:
                    w.writerow([repr(r.get(c)) if isinstance(r.get(c), float) else r.get(c)
                                for c in cols])
        except OSError as exc:
            raise GaplabError(f"cannot write {p}: {exc}") from exc
        written.append(p)

        lines = ["# quantity log_epsilon log_value log_fit"]
        for f, eps, ys in _series(res):
            for e, y in zip(eps, ys):
                if y is None or y <= 0:
                    continue
                fit = "nan" if f.slope is None else repr(f.intercept + f.slope * np.log(e))
                lines.append(f"{f.quantity} {np.log(e)!r} {np.log(y)!r} {fit}")
        p = os.path.join(path, f"{stem}_plot.dat")
        _write(p, "\n".join(lines) + "\n")
        written.append(p)

    p = os.path.join(path, "summary.txt")
    _write(p, summary_text(results))
    written.append(p)
    return written


def load_report(path):
    """Read a ``report.json`` back into :class:`SweepResult` objects."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read report {path}: {exc}") from exc
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise UsageError(f"{path}: unsupported schema_version")
    return [SweepResult.from_dict(d) for d in doc["results"]]


def spectrum_report(cfg):
    """Spectrum plus the predicted exponents, as a JSON-ready dict."""
    weight = _spectral_weight(cfg)
    basis = solve_spectrum(weight, k=cfg.spectral_k)
    out = {
        "n": cfg.n, "grid": list(weight.shape),
        "eigenvalues": basis.eigenvalues, "error_bars": basis.error_bars,
        "clusters": [list(c) for c in basis.clusters],
        "lambda1": basis.lambda1, "lambda1_error": basis.lambda1_error,
        "lambda1_multiplicity": basis.lambda1_multiplicity,
    }
    has_odd, tags = {}, {}
    for axis in range(1, cfg.n):
        try:
            rep = classify_parity(basis, axis)
            has_odd[str(axis)], tags[str(axis)] = rep.lambda1_has_odd, rep.tags
        except InapplicableError:
            has_odd[str(axis)] = tags[str(axis)] = None
    out["lambda1_has_odd"] = has_odd
    out["parity_tags"] = tags
    return out, basis


def prediction_report(cfg):
    out, basis = spectrum_report(cfg)
    rep = predict_rate(basis)
    out["prediction"] = rep.to_dict()
    return out


def sweep_config_copy(cfg, **kw):
    """A modified copy of ``cfg`` (validated)."""
    return cfg.replace(**copy.deepcopy(kw))


__all__ = ["ExperimentConfig", "PowerFit", "SeriesFit", "SweepResult", "fit_exponent",
           "judge", "run_upper_sweep", "run_lower_pipeline", "emit_report", "dump_json",
           "load_report", "summary_text", "spectrum_report", "prediction_report",
           "alpha_of", "check_spd"]

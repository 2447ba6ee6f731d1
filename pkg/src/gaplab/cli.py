"""Command line entry point: ``gaplab <command> [--config cfg.json] [--out dir]``.

Exit codes: 0 when every verdict is PASS, 2 on a numerical failure (a
FAIL verdict, an aborted or inapplicable run), 1 on a usage error.
"""
import argparse
import csv
import json
import logging
import os
import sys

import numpy as np

from . import __version__
from .errors import GaplabError, InapplicableError, SweepAborted, UsageError
from .validation import check_int, check_keys, check_real

log = logging.getLogger("gaplab")

EXIT_OK, EXIT_USAGE, EXIT_FAIL = 0, 1, 2
LOG_LEVELS = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}
COMMANDS = ("spectrum", "predict", "solve-reduced", "gap", "ode", "sweep-upper",
            "sweep-lower", "report")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser():
    p = _Parser(prog="gaplab", description="Gradient blow-up experiments for insulated "
                "conductivity problems.")
    p.add_argument("--version", action="version", version=f"gaplab {__version__}")
    sub = p.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    sub.required = True
    helps = {
        "spectrum": "eigenvalues of the sphere weight",
        "predict": "lambda_1, alpha and the predicted exponents",
        "solve-reduced": "one reduced solve at config.epsilon",
        "gap": "one full-gap solve at config.epsilon",
        "ode": "reduction-of-order particular solution of L v = H",
        "sweep-upper": "epsilon sweep of max gradient and omega(sqrt eps)",
        "sweep-lower": "epsilon sweep of the odd-mode amplitude",
        "report": "re-summarize an existing report.json",
    }
    for name in COMMANDS:
        s = sub.add_parser(name, help=helps[name])
        if name == "ode":
            s.add_argument("--spec", required=True, help="ODE spec JSON")
        elif name == "report":
            s.add_argument("--report", help="report.json (default <out>/report.json)")
        else:
            s.add_argument("--config", help="experiment config JSON (defaults if omitted)")
        s.add_argument("--out", help="output directory (or .csv file for ode/solve-reduced/gap)")
        s.add_argument("--workers", type=int, default=1)
        s.add_argument("--seed", type=int, default=None)
    return p


def _configure_logging():
    level = os.environ.get("GAPLAB_LOG", "error").lower()
    if level not in LOG_LEVELS:
        raise UsageError(f"GAPLAB_LOG must be one of {sorted(LOG_LEVELS)}, got {level!r}")
    logging.basicConfig(level=LOG_LEVELS[level], stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def _load_config(args):
    from .harness import ExperimentConfig
    cfg = ExperimentConfig.from_json(args.config) if args.config else ExperimentConfig()
    if args.seed is not None:
        if not 0 <= args.seed < 2 ** 64:
            raise UsageError("--seed must be an unsigned 64-bit integer")
        cfg = cfg.replace(seed=args.seed)
    return cfg


def _out_paths(out, default_stem):
    """``(csv_path, json_path)`` for single-solve commands."""
    if out is None:
        return None, None
    if out.endswith(".csv"):
        d = os.path.dirname(out)
        if d:
            os.makedirs(d, exist_ok=True)
        return out, out[:-4] + ".json"
    os.makedirs(out, exist_ok=True)
    return os.path.join(out, default_stem + ".csv"), os.path.join(out, default_stem + ".json")


def _write_csv(path, header, rows):
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for row in rows:
                w.writerow([repr(float(v)) for v in row])
    except OSError as exc:
        raise GaplabError(f"cannot write {path}: {exc}") from exc


def _emit_json(doc, path):
    from .harness import dump_json
    text = dump_json(doc)
    if path is None:
        sys.stdout.write(text)
        return
    try:
        with open(path, "w") as fh:
            fh.write(text)
    except OSError as exc:
        raise GaplabError(f"cannot write {path}: {exc}") from exc


def _json_in_dir(out, name):
    """``--out`` may name the JSON file itself or a directory for it."""
    if out is None:
        return None
    if out.endswith(".json"):
        d = os.path.dirname(out)
        if d:
            os.makedirs(d, exist_ok=True)
        return out
    os.makedirs(out, exist_ok=True)
    return os.path.join(out, name)


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------
def cmd_spectrum(args):
    from .harness import spectrum_report
    doc, basis = spectrum_report(_load_config(args))
    path = _json_in_dir(args.out, "spectrum.json")
    _emit_json(doc, path)
    if path is not None and basis.weight.n == 3:
        Y = basis.eigenfunctions
        _write_csv(path[:-5] + "_eigenfunctions.csv",
                   ["theta"] + [f"Y{k}" for k in range(Y.shape[1])],
                   np.column_stack([basis.weight.theta, Y]))
    return EXIT_OK


def cmd_predict(args):
    from .harness import prediction_report
    doc = prediction_report(_load_config(args))
    _emit_json(doc, _json_in_dir(args.out, "prediction.json"))
    return EXIT_OK


def _reduced_boundary(cfg, weight):
    from .harness import _boundary_data
    from .spectral import solve_spectrum
    basis = solve_spectrum(weight, k=cfg.spectral_k, extrapolate=False)
    return _boundary_data(cfg, basis, weight.theta), basis


def cmd_solve_reduced(args):
    from .geometry import build_weight
    from .reduced import omega_profile, project_mode, solve_reduced
    cfg = _load_config(args)
    if cfg.n != 3:
        raise UsageError("solve-reduced needs n = 3")
    weight = build_weight(cfg.matrix, cfg.n_theta)
    bnd, basis = _reduced_boundary(cfg, weight)
    field = solve_reduced(weight, cfg.epsilon, R=cfg.R, boundary=bnd, grid=cfg.disk_grid(),
                          tol=cfg.cg_tol)
    gmax, loc = field.max_gradient()
    summary = {"epsilon": cfg.epsilon, "max_gradient": gmax, "gradient_location": list(loc),
               "center_value": field.center_value, "residual": field.residual,
               "grid": list(field.grid.shape)}
    omega = omega_profile(field)
    summary["omega_profile"] = {"rho": omega.rho, "omega": omega.values}
    lo, hi = basis.lambda1_cluster
    summary["mode_profiles"] = {f"Y{k}": project_mode(field, basis.eigenfunction(k)).values
                                for k in range(lo, hi)}
    csv_path, json_path = _out_paths(args.out, "reduced")
    if csv_path:
        _write_csv(csv_path, ["r", "theta", "u"], field.to_rows())
    _emit_json(summary, json_path)
    return EXIT_OK


def cmd_gap(args):
    from .gapfull import map_strip, solve_gap
    cfg = _load_config(args)
    geom = cfg.geometry(cfg.epsilon)
    rho = min(cfg.R, cfg.R0)
    strip = map_strip(geom, rho=rho, n_theta=cfg.n_theta, n_z=cfg.n_z, ratio=cfg.ratio,
                      cells_below=cfg.cells_below, n_lateral=cfg.n_r)
    if cfg.boundary_kind == "custom":
        phi = np.array(cfg.boundary_samples)
    elif cfg.boundary_kind == "Y1_ramp" and cfg.n == 3:
        from .geometry import build_weight
        phi = _reduced_boundary(cfg, build_weight(cfg.matrix, cfg.n_theta))[0]
    else:
        axis = cfg.boundary_axis - 1
        phi = lambda x: x[:, axis]  # noqa: E731
    sol = solve_gap(strip, phi=phi, tol=min(cfg.cg_tol, 1e-10))
    gmax, loc = sol.max_gradient()
    fl = sol.fluxes
    summary = {"n": cfg.n, "epsilon": cfg.epsilon, "max_gradient": gmax,
               "gradient_location": {"x": list(loc[0]), "eta": loc[1]},
               "residual": sol.residual,
               "fluxes": {k: fl[k] for k in ("in", "out", "net", "top", "bottom")},
               "shape": list(strip.shape)}
    csv_path, json_path = _out_paths(args.out, "gap")
    if csv_path:
        header = ["x", "eta", "u"] if cfg.n == 2 else ["r", "theta", "eta", "u"]
        _write_csv(csv_path, header, sol.to_rows())
    _emit_json(summary, json_path)
    return EXIT_OK


_ODE_KEYS = {"n", "lambda", "H", "grid"}
_ODE_H_KEYS = {"coeff", "exponent", "r", "values"}
_ODE_GRID_KEYS = {"r_min", "r_max", "size"}


def load_ode_spec(path):
    """Parse an ODE spec.

    ``{"n": 3, "lambda": 1.0, "H": {"coeff": 1, "exponent": 1.41},
    "grid": {"r_min": 1e-5, "r_max": 1, "size": 400}}``; ``H`` may instead
    give samples ``{"r": [...], "values": [...]}``.  ``exponent`` may be the
    string ``"1+alpha"``.
    """
    from .exponents import alpha_of
    from .radialode import RadialFunction, geometric_grid
    try:
        with open(path) as fh:
            spec = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read ODE spec {path}: {exc}") from exc
    check_keys(spec, _ODE_KEYS, "ode spec")
    n = check_int(spec.get("n", 3), "n", 3)
    lam = check_real(spec.get("lambda", n - 2), "lambda")
    H = check_keys(spec.get("H", {}), _ODE_H_KEYS, "H")
    g = check_keys(spec.get("grid", {}), _ODE_GRID_KEYS, "grid")
    if "r" in H or "values" in H:
        return n, lam, RadialFunction(np.array(H["r"], float), np.array(H["values"], float))
    r = geometric_grid(check_real(g.get("r_min", 1e-5), "grid.r_min", positive=True),
                       check_real(g.get("r_max", 1.0), "grid.r_max", positive=True),
                       check_int(g.get("size", 400), "grid.size", 5))
    p = H.get("exponent", "1+alpha")
    if isinstance(p, str):
        alpha = alpha_of(lam, n)
        table = {"alpha": alpha, "1+alpha": 1 + alpha, "2+alpha": 2 + alpha}
        if p not in table:
            raise UsageError(f"H.exponent string must be one of {sorted(table)}")
        p = table[p]
    p = check_real(p, "H.exponent")
    c = check_real(H.get("coeff", 1.0), "H.coeff")
    return n, lam, RadialFunction(r, c * r ** p)


def cmd_ode(args):
    from .exponents import alpha_of
    from .radialode import apply_L, extract_leading, reduction_of_order
    n, lam, H = load_ode_spec(args.spec)
    v = reduction_of_order(H, lam, n)
    LV = apply_L(v, lam, n)
    alpha = alpha_of(lam, n)
    summary = {"n": n, "lambda": lam, "alpha": alpha, "error_estimate": v.error_estimate,
               "nodes": int(v.r.size)}
    try:
        fit = extract_leading(v, alpha, r_max=max(0.1, v.r[min(v.r.size - 1, 5)]))
        summary["remainder_slope"] = fit.remainder_slope
    except UsageError:
        pass
    csv_path, json_path = _out_paths(args.out, "profile")
    if csv_path:
        _write_csv(csv_path, ["r", "H", "v", "Lv"], np.column_stack([v.r, H.values, v.values,
                                                                     LV.values]))
    _emit_json(summary, json_path)
    return EXIT_OK


def _sweep(args, runner):
    from .harness import emit_report
    cfg = _load_config(args)
    out = args.out or "gaplab-out"
    try:
        res = runner(cfg, workers=args.workers)
    except SweepAborted as exc:
        if exc.partial is not None:
            emit_report([exc.partial], out)
        raise
    written = emit_report([res], out)
    with open(written[-1]) as fh:
        sys.stdout.write(fh.read())
    return EXIT_OK if res.verdict == "PASS" else EXIT_FAIL


def cmd_sweep_upper(args):
    from .harness import run_upper_sweep
    return _sweep(args, run_upper_sweep)


def cmd_sweep_lower(args):
    from .harness import run_lower_pipeline
    return _sweep(args, run_lower_pipeline)


def cmd_report(args):
    from .harness import emit_report, load_report
    path = args.report or os.path.join(args.out or ".", "report.json")
    results = load_report(path)
    out = args.out or os.path.dirname(os.path.abspath(path))
    written = emit_report(results, out)
    with open(written[-1]) as fh:
        sys.stdout.write(fh.read())
    return EXIT_OK if all(r.verdict == "PASS" for r in results) else EXIT_FAIL


HANDLERS = {
    "spectrum": cmd_spectrum, "predict": cmd_predict, "solve-reduced": cmd_solve_reduced,
    "gap": cmd_gap, "ode": cmd_ode, "sweep-upper": cmd_sweep_upper,
    "sweep-lower": cmd_sweep_lower, "report": cmd_report,
}


def main(argv=None):
    try:
        _configure_logging()
        args = build_parser().parse_args(argv)
        if args.workers < 1:
            raise UsageError("--workers must be >= 1")
        return HANDLERS[args.command](args)
    except UsageError as exc:
        print(f"gaplab: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InapplicableError as exc:
        print(f"gaplab: inapplicable: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except GaplabError as exc:
        print(f"gaplab: numerical failure: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())

"""Command-line experiment runner.

Every subcommand reads a JSON config (see :mod:`jumpsupport.config`), writes
its CSV tables, a ``summary.json``, the resolved ``config.json`` and a
``manifest.json`` into ``--out``.  Outputs depend only on the resolved
config and seed, never on ``--jobs`` or ``--out``.

Exit codes: 0 success, 1 configuration error, 2 numerical failure,
3 negative verdict when ``--expect-positive`` is given.
"""
from __future__ import annotations

import argparse
import csv
import io
import os
import platform
import sys
from functools import partial

import numpy as np
import scipy

from . import __version__
from . import levy as lv
from . import support as sp
from .config import OPERATIONS, dumps, load
from .errors import ConfigError, JumpSupportError, NumericalError
from .metric import skorokhod_distance_upper
from .paths import CadlagPath
from .rng import Streams, map_paths
from .sde import CoefficientSet, euler_simulate
from .skeleton import ControlFunction, JumpPlan, solve_skeleton
from .tilt import control_to_tilt

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_NEGATIVE = 0, 1, 2, 3


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def csv_text(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if np.isfinite(f) else str(f)
    return obj


class Run:
    """Collects the files one subcommand writes."""

    def __init__(self):
        self.files = {}
        self.summary = {}
        self.positive = None

    def table(self, name, header, rows):
        self.files[name] = csv_text(header, rows)

    def text(self, name, text):
        self.files[name] = text


# --------------------------------------------------------------------------
# config sections

def _model(cfg):
    try:
        return lv.model_from_dict(cfg.model)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"model: {exc}") from None


def _coeffs(cfg):
    try:
        return CoefficientSet.from_dict(cfg.coefficients)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"coefficients: {exc}") from None


def _small_jumps(params):
    try:
        return lv.SmallJumpConfig(**params.get("small_jumps", {}))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"params.small_jumps: {exc}") from None


def _skeleton_specs(cfg, model):
    out = []
    for i, spec in enumerate(cfg.skeletons or []):
        try:
            T = float(spec.get("T", 1.0))
            x0 = np.asarray(spec["x0"], dtype=float).ravel()
            if "control" in spec:
                f = ControlFunction.from_dict(spec["control"])
            else:
                f = ControlFunction.constant(spec.get("f", np.zeros(model.dim)), T)
            plan = JumpPlan.from_dict(spec.get("plan", []))
            out.append({"name": str(spec.get("name", f"skeleton_{i}")), "x0": x0, "T": T, "f": f, "plan": plan,
                        "h": float(spec.get("h", 1e-3)), "shift": spec.get("shift")})
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"skeletons[{i}]: {exc}") from None
    return out


def _solve(spec, coeffs, model):
    sk = solve_skeleton(spec["x0"], coeffs, model, spec["f"], spec["plan"], spec["T"], spec["h"])
    path = sk.path
    if spec["shift"] is not None:
        shift = np.asarray(spec["shift"], dtype=float)
        path = CadlagPath(path.times, path.values + shift, path.jump_times, path.jump_pre + shift,
                          path.jump_post + shift)
    return sk, path


# --------------------------------------------------------------------------
# subcommands

def cmd_analyze_levy(cfg, jobs, run):
    model = _model(cfg)
    p = cfg.params
    eta = float(p.get("eta", 0.1))
    L = lv.integrability_subspace(model)
    summary = {"L": L.to_dict(), "eta": eta, "upsilon_eta": lv.upsilon_eta(model, eta),
               "tail_mass": lv.tail_mass(model, eta), "beta_moments": {}}
    for beta in p.get("betas", [2.0]):
        summary["beta_moments"][_fmt(float(beta))] = lv.beta_moment(model, float(beta))
    if p.get("scaling", model.support_kind != "atoms"):
        rep = sp.check_scaling_condition(model, p.get("eps_grid"), p.get("direction_grid"))
        summary["scaling"] = rep.to_dict()
        run.table("scaling.csv", [*[f"l_{k + 1}" for k in range(model.dim)], "implied_alpha", "misfit"],
                  [(*ell, a, mf) for ell, a, mf in zip(rep.directions, rep.implied_alpha, rep.max_misfit)])
    run.summary = summary


def cmd_skeleton(cfg, jobs, run):
    model, coeffs = _model(cfg), _coeffs(cfg)
    out = []
    for spec in _skeleton_specs(cfg, model):
        _, path = _solve(spec, coeffs, model)
        run.text(f"{spec['name']}.csv", path.to_csv())
        out.append({"name": spec["name"], "terminal": path.terminal, "n_jumps": path.n_jumps})
    run.summary = {"skeletons": out}


def _simulate_worker(i, rng, coeffs, model, x0, T, n_steps, eta, config):
    return euler_simulate(coeffs, model, x0, T, n_steps, eta, rng, config).to_csv()


def cmd_simulate(cfg, jobs, run):
    model, coeffs = _model(cfg), _coeffs(cfg)
    p = cfg.params
    x0 = np.asarray(p.get("x0", np.zeros(coeffs.m)), dtype=float)
    n_paths = int(p.get("n_paths", 1))
    worker = partial(_simulate_worker, coeffs=coeffs, model=model, x0=x0, T=float(p.get("T", 1.0)),
                     n_steps=int(p.get("n_steps", 200)), eta=float(p.get("eta", 0.1)), config=_small_jumps(p))
    texts = map_paths(worker, n_paths, cfg.seed, "simulate", jobs)
    width = len(str(max(n_paths - 1, 0)))
    for i, text in enumerate(texts):
        run.text(f"path_{i:0{width}d}.csv", text)
    run.summary = {"n_paths": n_paths}


def cmd_support_check(cfg, jobs, run):
    model, coeffs = _model(cfg), _coeffs(cfg)
    p = cfg.params
    eps = p.get("eps", 0.3)
    eps_list = list(eps) if isinstance(eps, list) else [eps]
    rows, reports = [], []
    streams = Streams(cfg.seed)
    for k, spec in enumerate(_skeleton_specs(cfg, model)):
        _, path = _solve(spec, coeffs, model)
        eps_k = eps_list
        if isinstance(cfg.skeletons[k].get("eps"), (int, float, list)):
            e = cfg.skeletons[k]["eps"]
            eps_k = list(e) if isinstance(e, list) else [e]
        seed = int(streams.generator("support-check", k).integers(0, 2**63))
        reps = sp.mc_support_probability(coeffs, model, path, [float(e) for e in eps_k], int(p.get("N", 10000)),
                                         float(p.get("eta", 0.1)), seed, int(p.get("n_steps", 200)),
                                         _small_jumps(p), jobs, spec["name"], p.get("metric", "skorokhod"))
        expect = cfg.skeletons[k].get("expect", "positive")
        for r in reps:
            rows.append((r.target, r.eps, r.n, r.hits, r.estimate, r.ci_low, r.ci_high, int(r.positive), expect))
            reports.append((expect, r))
    run.table("support.csv", ["skeleton", "eps", "n", "hits", "estimate", "ci_low", "ci_high", "positive", "expect"],
              rows)
    run.positive = all(r.positive if ex == "positive" else r.hits == 0 for ex, r in reports)
    run.summary = {"reports": [r.to_dict() | {"expect": ex} for ex, r in reports], "verdict_positive": run.positive}


def cmd_inclusion_check(cfg, jobs, run):
    model, coeffs = _model(cfg), _coeffs(cfg)
    p = cfg.params
    etas = p.get("eta", 0.2)
    etas = list(etas) if isinstance(etas, list) else [etas]
    x0 = np.asarray(p.get("x0", np.zeros(coeffs.m)), dtype=float)
    T = float(p.get("T", 1.0))
    n_steps = int(p.get("n_steps", 200))
    min_rate = float(p.get("min_pass_rate", 0.9))
    streams = Streams(cfg.seed)
    rows, out = [], []
    for k, eta in enumerate(float(e) for e in etas):
        tol = p.get("tol", "auto")
        if tol == "auto":
            tol = sp.neglected_variance_tolerance(coeffs, model, eta, T, float(p.get("k", 4.0)), x0)
        seed = int(streams.generator("inclusion-check", k).integers(0, 2**63))
        rep = sp.forward_inclusion_check(coeffs, model, eta, int(p.get("n_paths", 1000)), float(tol), seed, x0, T,
                                         n_steps, _small_jumps(p), jobs)
        rows.append((eta, rep.tol, rep.n_paths, rep.passed, rep.pass_rate, rep.median_segment_deviation,
                     rep.jump_failures))
        out.append(rep.to_dict() | {"eta": eta})
    run.table("inclusion.csv", ["eta", "tol", "n_paths", "passed", "pass_rate", "median_segment_deviation",
                                "jump_failures"], rows)
    run.positive = all(r[4] >= min_rate for r in rows)
    run.summary = {"reports": out, "min_pass_rate": min_rate, "verdict_positive": run.positive}


def cmd_tilt_check(cfg, jobs, run):
    model, coeffs = _model(cfg), _coeffs(cfg)
    p = cfg.params
    eta = float(p.get("eta", 0.1))
    T = float(p.get("T", 1.0))
    L = lv.integrability_subspace(model)
    try:
        f = ControlFunction.from_dict(p["control"], L) if "control" in p else \
            ControlFunction.constant(p.get("f", np.zeros(model.dim)), T, L)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"params.control: {exc}") from None
    g = control_to_tilt(f, model, eta, L)
    summary = {"tilt": g.to_dict(), "eta": eta}
    run.positive = True
    if model.dim == 1 and int(p.get("N", 0)) > 0:
        x0 = np.asarray(p.get("x0", np.zeros(coeffs.m)), dtype=float)
        rep = sp.girsanov_check(coeffs, model, x0, g, eta, int(p["N"]), cfg.seed, int(p.get("n_steps", 10)),
                                int(p.get("n_radial_bins", 5)), _small_jumps(p), jobs)
        edges = rep.bin_edges
        lows = np.concatenate([edges[: edges.size // 2], edges[edges.size // 2:-1]])
        highs = np.concatenate([edges[1: edges.size // 2 + 1], edges[edges.size // 2 + 1:]])
        run.table("girsanov_bins.csv", ["lo", "hi", "observed", "expected", "z"],
                  zip(lows, highs, rep.observed, rep.expected, rep.bin_z))
        summary["girsanov"] = rep.to_dict()
        run.positive = abs(rep.density_z) <= 3.0 and bool(np.all(np.abs(rep.bin_z) <= 3.0))
    summary["verdict_positive"] = run.positive
    run.summary = summary


def cmd_reach(cfg, jobs, run):
    model, coeffs = _model(cfg), _coeffs(cfg)
    p = cfg.params
    try:
        x, y = p["x"], p["y"]
    except KeyError as exc:
        raise ConfigError(f"params: missing {exc}") from None
    T = float(p.get("T", 1.0))
    h = float(p.get("h", 1e-3))
    eps = float(p.get("eps", 0.05))
    route = p.get("route", "cone")
    if route == "cone":
        cert = sp.reach_cone(model, coeffs, x, y, T, eps, p.get("theta"), int(p.get("max_jumps", 256)), h)
    elif route == "control":
        cert = sp.reach_control(coeffs, model, x, y, T, int(p.get("n_pieces", 64)), h)
    else:
        raise ConfigError(f"params.route must be 'cone' or 'control', got {route!r}")
    sk, err = cert.replay(coeffs, model)
    run.text("reach_path.csv", sk.path.to_csv())
    run.positive = err <= eps
    run.summary = {"certificate": cert.to_dict(), "replay_error": err, "verdict_positive": run.positive}


def cmd_metric(cfg, jobs, run):
    paths = []
    for i, src in enumerate(cfg.paths):
        try:
            paths.append(CadlagPath.from_csv(src) if isinstance(src, str) else
                         CadlagPath(src["times"], src["values"], src.get("jump_times"), src.get("jump_pre"),
                                    src.get("jump_post")))
        except (OSError, KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"paths[{i}]: {exc}") from None
    if len(paths) < 2:
        raise ConfigError("metric needs at least two paths")
    rows, out = [], []
    for j in range(1, len(paths)):
        rep = skorokhod_distance_upper(paths[0], paths[j], int(cfg.params.get("exhaustive_max", 8)))
        rows.append((0, j, rep.uniform, rep.skorokhod_upper, rep.slope_term, rep.sup_term))
        out.append({"pair": [0, j], "uniform": rep.uniform, "skorokhod_upper": rep.skorokhod_upper,
                    "anchors": [list(a) for a in rep.anchors]})
    run.table("metric.csv", ["p", "q", "uniform", "skorokhod_upper", "slope_term", "sup_term"], rows)
    run.summary = {"distances": out}


COMMANDS = {
    "analyze-levy": cmd_analyze_levy,
    "skeleton": cmd_skeleton,
    "simulate": cmd_simulate,
    "support-check": cmd_support_check,
    "inclusion-check": cmd_inclusion_check,
    "tilt-check": cmd_tilt_check,
    "reach": cmd_reach,
    "metric": cmd_metric,
}


# --------------------------------------------------------------------------
# driver

def build_parser():
    parser = argparse.ArgumentParser(prog="jumpsupport", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in OPERATIONS:
        s = sub.add_parser(name)
        s.add_argument("--config", required=True, help="JSON experiment config")
        s.add_argument("--seed", type=int, default=None, help="master seed, overrides the config")
        s.add_argument("--out", default=".", help="output directory")
        s.add_argument("--jobs", type=int, default=1, help="worker processes (does not change results)")
        s.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", dest="overrides",
                       help="dotted override, value parsed as JSON when possible")
        s.add_argument("--expect-positive", action="store_true", help="exit 3 on a negative verdict")
    return parser


def manifest(cfg, command, expect_positive, files):
    invocation = ["jumpsupport", command, "--config", "config.json", "--seed", str(cfg.seed)]
    if expect_positive:
        invocation.append("--expect-positive")
    return {
        "command": command,
        "config_sha256": cfg.digest(),
        "seed": cfg.seed,
        "invocation": invocation,
        "files": sorted(files),
        "versions": {"jumpsupport": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
                     "python": platform.python_version()},
    }


def run(argv=None, stderr=None):
    """Run one subcommand; returns the exit code."""
    stderr = stderr or sys.stderr
    args = build_parser().parse_args(argv)
    try:
        cfg = load(args.config, args.overrides, args.seed, args.command)
        cfg.out = None
        result = Run()
        COMMANDS[args.command](cfg, max(1, args.jobs), result)
    except ConfigError as exc:
        print(f"config error: {exc}", file=stderr)
        return EXIT_CONFIG
    except (NumericalError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=stderr)
        return EXIT_NUMERICAL
    except (JumpSupportError, ValueError, TypeError) as exc:
        print(f"config error: {type(exc).__name__}: {exc}", file=stderr)
        return EXIT_CONFIG
    os.makedirs(args.out, exist_ok=True)
    result.files["summary.json"] = dumps(_jsonable(result.summary))
    result.files["config.json"] = cfg.dumps()
    result.files["manifest.json"] = dumps(manifest(cfg, args.command, args.expect_positive,
                                                   list(result.files) + ["manifest.json"]))
    for name, text in result.files.items():
        with open(os.path.join(args.out, name), "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    if args.expect_positive and result.positive is False:
        print("verdict: negative", file=stderr)
        return EXIT_NEGATIVE
    return EXIT_OK


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()

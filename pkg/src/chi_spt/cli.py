"""Command-line front end.

Exit codes: 0 success, 1 numerical/check failure, 2 usage or config error
(always raised before any numerical work starts).
"""

from __future__ import annotations

import argparse
import datetime as _dt
import hashlib
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .analysis import TARGETS, default_grid, report_from_sweep, run_sweep
from .errors import AssumptionError, ChiError, CertificateError, ConfigError
from .lyapunov import build_certificates, check_full_system_stability
from .manifold import ManifoldSolverConfig, solve_h
from .model.assumptions import validate_assumptions
from .model.builtins import BUILTIN_CONFIGS
from .model.config import parse_config
from .report import SCHEMA_VERSION, atomic_write, dumps
from .simulate import simulate_boundary_layer, simulate_full, simulate_reduced

DEFAULT_MUS = [1e-1, 1e-2, 1e-3, 1e-4]
DEFAULT_TARGETS = ["slow_error", "fast_composite_error"]
SLOPE_RANGE = (0.9, 1.1)
MIN_R2 = 0.99


class UsageError(Exception):
    pass


def _vector(text, name):
    try:
        values = [float(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"--{name} must be a comma-separated list of numbers, got {text!r}") from None
    if not all(math.isfinite(v) for v in values):
        raise UsageError(f"--{name} must be finite")
    return values


def _load(config):
    """Return (config text, SystemConfig) for a path or ``builtin:NAME``."""
    if config.startswith("builtin:"):
        name = config.split(":", 1)[1].upper()
        if name not in BUILTIN_CONFIGS:
            raise UsageError(f"unknown built-in {name!r}; choose from {sorted(BUILTIN_CONFIGS)}")
        text = BUILTIN_CONFIGS[name]
    else:
        try:
            with open(config, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise UsageError(f"cannot read config {config!r}: {exc.strerror}") from None
    try:
        cfg = parse_config(text)
    except ConfigError as exc:
        raise UsageError(f"{config}: {exc}") from None
    return text, cfg


def _build(config, cfg, mu=None):
    if mu is not None:
        if not (mu > 0 and math.isfinite(mu)):
            raise UsageError(f"mu must be positive, got {mu}")
        cfg.mu = mu
    try:
        return cfg.build()
    except (AssumptionError, ChiError, ValueError) as exc:
        raise UsageError(f"{config}: {exc}") from None


def _dims(vec, dim, name):
    if len(vec) == 1 and dim > 1:
        vec = vec * dim
    if len(vec) != dim:
        raise UsageError(f"--{name} needs {dim} component(s), got {len(vec)}")
    return vec


def _solver(cfg):
    try:
        return ManifoldSolverConfig(**cfg.solver)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"invalid solver override: {exc}") from None


def _solver_dict(solver):
    return {"tol": solver.tol, "max_iter": solver.max_iter, "fd_step": solver.fd_step,
            "initial_guess_policy": solver.initial_guess_policy}


def _manifest(args, text, params, outputs, status, exit_code, error=None):
    return {
        "schema_version": SCHEMA_VERSION,
        "command": args.command,
        "argv": args.argv,
        "config": args.config,
        "config_sha256": hashlib.sha256(text.encode("utf-8")).hexdigest(),
        "parameters": params,
        "tool_version": __version__,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "outputs": outputs,
        "status": status,
        "exit_code": exit_code,
        "error": error,
    }


def _error_info(exc):
    return {"type": type(exc).__name__, "message": str(exc), "index": getattr(exc, "index", None)}


def _system_info(sys_):
    return {"name": sys_.name, "n_x": sys_.n_x, "m_z": sys_.m_z, "mu": sys_.mu}


def _finish(args, text, params, files, code, error=None):
    """Write output files plus the manifest; return ``code``."""
    out = args.out
    written = []
    for name, content in files.items():
        atomic_write(os.path.join(out, name), content)
        written.append(name)
    status = "ok" if code == 0 else "failed"
    atomic_write(os.path.join(out, "manifest.json"), dumps(_manifest(args, text, params, written, status, code, error)))
    return code


# --- commands ---------------------------------------------------------------

def cmd_validate(args):
    text, cfg = _load(args.config)
    sys_ = _build(args.config, cfg)
    n_samples = args.samples or cfg.analysis.get("n_samples", 1000)
    seed = args.seed
    params = {"n_samples": n_samples, "seed": seed}
    try:
        rep = validate_assumptions(sys_, n_samples, seed)
    except ChiError as exc:
        print(f"validation failed: {exc}", file=sys.stderr)
        if args.out:
            return _finish(args, text, params, {}, 1, _error_info(exc))
        return 1
    rows = [
        ("(a) invertibility margin of dg/dz - I", f"{rep.invertibility_margin:.6g}", f"> {rep.invertibility_threshold:g}", rep.invertibility_ok),
        ("(b) Lipschitz f (estimate)", f"{rep.lipschitz_f:.6g}", "finite", rep.lipschitz_ok),
        ("(b) Lipschitz g (estimate)", f"{rep.lipschitz_g:.6g}", "finite", rep.lipschitz_ok),
        ("(c) |f(0)|", f"{rep.origin_residual_f:.3g}", f"<= {rep.origin_tol:g}", rep.origin_ok),
        ("(c) |g(0,0,0)|", f"{rep.origin_residual_g:.3g}", f"<= {rep.origin_tol:g}", rep.origin_ok),
    ]
    for label, value, thresh, ok in rows:
        print(f"{label:<40} {value:>14}  {thresh:<10} {'PASS' if ok else 'FAIL'}")
    doc = {
        "schema_version": SCHEMA_VERSION, "command": "validate", "tool_version": __version__,
        "system": _system_info(sys_), "parameters": params, "passed": rep.ok, "results": rep.to_dict(),
    }
    body = dumps(doc)
    print(body, end="")
    code = 0 if rep.ok else 1
    if args.out:
        return _finish(args, text, params, {"report.json": body}, code)
    return code


def cmd_simulate(args):
    text, cfg = _load(args.config)
    sys_ = _build(args.config, cfg, args.mu)
    N = args.N if args.N is not None else 100
    if N < 1:
        raise UsageError("--N must be positive")
    x0 = _dims(_vector(args.x0, "x0"), sys_.n_x, "x0")
    z0 = _dims(_vector(args.z0, "z0"), sys_.m_z, "z0") if args.z0 is not None else None
    y0 = _dims(_vector(args.y0, "y0"), sys_.m_z, "y0") if args.y0 is not None else None
    if args.model == "full" and z0 is None:
        z0 = [0.0] * sys_.m_z
    solver = _solver(cfg)
    params = {"model": args.model, "x0": x0, "z0": z0, "y0": y0, "N": N, "mu": sys_.mu,
              "freeze_slow_state": args.freeze_slow_state, "solver": _solver_dict(solver)}
    try:
        if args.model == "full":
            X, Z = simulate_full(sys_, x0, z0, N)
            files = {"x.csv": X.to_csv(), "z.csv": Z.to_csv()}
        elif args.model == "reduced":
            Xs, Zs = simulate_reduced(sys_, x0, N, solver)
            files = {"xs.csv": Xs.to_csv(), "zs.csv": Zs.to_csv()}
        else:
            Xs, Zs = simulate_reduced(sys_, x0, N, solver)
            if y0 is None:
                y0 = (np.asarray(z0) - Zs.states[0]).tolist() if z0 is not None else [0.0] * sys_.m_z
                params["y0"] = y0
            Y = simulate_boundary_layer(sys_, Xs, y0, N, solver, zs=Zs, freeze_slow_state=args.freeze_slow_state)
            files = {"xs.csv": Xs.to_csv(), "zs.csv": Zs.to_csv(), "y.csv": Y.to_csv()}
    except ChiError as exc:
        print(f"simulation failed: {exc}", file=sys.stderr)
        return _finish(args, text, params, {}, 1, _error_info(exc))
    print(f"{args.model} simulation of {sys_.name}: {N + 1} states written to {args.out}")
    return _finish(args, text, params, files, 0)


def cmd_verify_scaling(args):
    text, cfg = _load(args.config)
    sys_ = _build(args.config, cfg)
    mus = _vector(args.mu, "mu") if args.mu else cfg.analysis.get("mu_values", DEFAULT_MUS)
    if len(set(mus)) < 2:
        raise UsageError("--mu needs at least two distinct values to fit a slope")
    if any(m <= 0 for m in mus):
        raise UsageError("--mu values must be positive")
    mus = sorted(set(mus), reverse=True)
    N = args.N if args.N is not None else cfg.analysis.get("N", 2000)
    if N < 1:
        raise UsageError("--N must be positive")
    targets = list(TARGETS) if args.target == "all" else (args.target.split(",") if args.target else DEFAULT_TARGETS)
    bad = [t for t in targets if t not in TARGETS]
    if bad:
        raise UsageError(f"unknown target(s) {bad}; choose from {list(TARGETS)} or 'all'")
    x0 = _dims(_vector(args.x0, "x0"), sys_.n_x, "x0")
    z0 = _dims(_vector(args.z0, "z0"), sys_.m_z, "z0")
    solver = _solver(cfg)
    params = {"mu_values": mus, "N": N, "targets": targets, "x0": x0, "z0": z0, "seed": args.seed,
              "slope_range": list(SLOPE_RANGE), "min_r2": MIN_R2, "solver": _solver_dict(solver)}
    try:
        points = run_sweep(sys_, x0, z0, mus, N, solver, want_tail="fast_tail_error" in targets)
        reports = [report_from_sweep(points, t) for t in targets]
    except ChiError as exc:
        print(f"scaling sweep failed: {exc}", file=sys.stderr)
        return _finish(args, text, params, {}, 1, _error_info(exc))
    passed = all(r.passes(*SLOPE_RANGE, MIN_R2) for r in reports)
    for r in reports:
        print(f"{r.target:<22} slope={r.slope:.4f} r2={r.r2:.5f} {'PASS' if r.passes(*SLOPE_RANGE, MIN_R2) else 'FAIL'}")
    doc = {
        "schema_version": SCHEMA_VERSION, "command": "verify-scaling", "tool_version": __version__,
        "system": _system_info(sys_), "parameters": params, "passed": passed,
        "results": {"reports": [r.to_dict() for r in reports]},
    }
    header = "mu," + ",".join(targets) + "\n"
    rows = "".join(
        "%.17g," % mu + ",".join("%.17g" % r.sup_errors[i] for r in reports) + "\n" for i, mu in enumerate(mus)
    )
    return _finish(args, text, params, {"report.json": dumps(doc), "sweep.csv": header + rows}, 0 if passed else 1)


def cmd_stability(args):
    text, cfg = _load(args.config)
    mu = args.mu if args.mu is not None else cfg.mu
    sys_ = _build(args.config, cfg, mu)
    N = args.N if args.N is not None else cfg.analysis.get("N", 2000)
    if N < 1 or args.grid < 1 or args.samples < 1:
        raise UsageError("--N, --grid and --samples must be positive")
    solver = _solver(cfg)
    params = {"mu": sys_.mu, "N": N, "grid": args.grid, "n_samples": args.samples, "seed": args.seed,
              "solver": _solver_dict(solver)}
    doc = {
        "schema_version": SCHEMA_VERSION, "command": "stability", "tool_version": __version__,
        "system": _system_info(sys_), "parameters": params, "passed": False,
        "results": {"reduced": None, "boundary": None, "composite": None, "stability": None,
                    "linearization": None, "error": None},
    }
    res = doc["results"]
    try:
        bundle = build_certificates(sys_, args.samples, args.seed, solver)
        res["linearization"] = {"A_reduced": bundle.A_reduced, "A_boundary": bundle.A_boundary,
                                "P_reduced": bundle.V.P, "P_boundary": bundle.W.P}
        res["reduced"] = bundle.reduced.to_dict()
        res["boundary"] = bundle.boundary.to_dict()
        res["composite"] = bundle.composite.to_dict()
        st = check_full_system_stability(sys_, bundle.composite, default_grid(sys_, args.grid), N, solver)
        res["stability"] = st.to_dict()
        doc["passed"] = st.passed
    except (CertificateError, ChiError) as exc:
        res["error"] = str(exc)
        print(f"stability check failed: {exc}", file=sys.stderr)
        return _finish(args, text, params, {"report.json": dumps(doc)}, 1, _error_info(exc))
    comp = bundle.composite
    print(f"composite certificate: gamma in [{comp.gamma_lo:.6g}, {comp.gamma_hi:.6g}], sigma={comp.sigma:.6g}")
    print(f"full system: max fitted rho={st.max_rho}, {'PASS' if st.passed else 'FAIL'}")
    return _finish(args, text, params, {"report.json": dumps(doc)}, 0 if st.passed else 1)


def cmd_replay(args):
    try:
        with open(args.manifest, encoding="utf-8") as fh:
            manifest = json.load(fh)
        argv = list(manifest["argv"])
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"cannot read manifest {args.manifest!r}: {exc}") from None
    if args.out:
        argv = _replace_out(argv, args.out)
    return main(argv)


def _replace_out(argv, out):
    argv = list(argv)
    for i, a in enumerate(argv):
        if a == "--out" and i + 1 < len(argv):
            argv[i + 1] = out
            return argv
        if a.startswith("--out="):
            argv[i] = f"--out={out}"
            return argv
    return argv + ["--out", out]


# --- argument parsing -------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="chi-spt", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, out_default):
        sp.add_argument("config", help="config file path, or builtin:LIN1 / builtin:SAT1")
        sp.add_argument("--seed", type=int, default=42, help="seed for all sampling (default 42)")
        sp.add_argument("--out", default=out_default, help="output directory")

    sp = sub.add_parser("validate", help="check the standing assumptions")
    common(sp, None)
    sp.add_argument("--samples", type=int, default=None)
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("simulate", help="simulate the full, reduced or boundary-layer model")
    common(sp, "chi_spt_out/simulate")
    sp.add_argument("--model", choices=["full", "reduced", "boundary"], default="full")
    sp.add_argument("--x0", required=True)
    sp.add_argument("--z0")
    sp.add_argument("--y0")
    sp.add_argument("--N", type=int, default=None)
    sp.add_argument("--mu", type=float, default=None)
    sp.add_argument("--freeze-slow-state", action="store_true")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("verify-scaling", help="fit the O(mu) error order over a mu sweep")
    common(sp, "chi_spt_out/verify-scaling")
    sp.add_argument("--mu", help="comma-separated mu values (default 1e-1,1e-2,1e-3,1e-4)")
    sp.add_argument("--N", type=int, default=None)
    sp.add_argument("--target", help=f"comma-separated subset of {','.join(TARGETS)}, or 'all'")
    sp.add_argument("--x0", default="1")
    sp.add_argument("--z0", default="1")
    sp.set_defaults(func=cmd_verify_scaling)

    sp = sub.add_parser("stability", help="build Lyapunov certificates and test full-system stability")
    common(sp, "chi_spt_out/stability")
    sp.add_argument("--mu", type=float, default=None)
    sp.add_argument("--grid", type=int, default=3, help="points per axis of the initial-condition grid")
    sp.add_argument("--N", type=int, default=None)
    sp.add_argument("--samples", type=int, default=1000)
    sp.set_defaults(func=cmd_stability)

    sp = sub.add_parser("replay", help="re-run the command recorded in a manifest")
    sp.add_argument("manifest")
    sp.add_argument("--out", default=None, help="override the recorded output directory")
    sp.set_defaults(func=cmd_replay)
    return p


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    args.argv = argv
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"chi-spt: error: {exc}", file=sys.stderr)
        return 2
    except ChiError as exc:
        print(f"chi-spt: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Command-line orchestration of the verification families.

One binary, one subcommand per verification family:

    verify-bellman   sampled size / concavity / monotonicity suite
    aux-bounds       auxiliary-function certificates on an (r, s) grid
    a2               Poisson flow characteristic of a weight
    riesz-norm       weighted operator norm of the Riesz shift
    embedding        bilinear space-time estimate for one (f, g, weight)
    repr-check       Riesz representation identity
    sweep            weight-family sweep (CSV)

Configuration precedence: built-in defaults, then an optional JSON config
file (--config), then explicit flags.  Unknown config keys are rejected.
Reports embed the fully resolved configuration; identical configurations
(same seed) reproduce identical reports except for the timestamp.

Exit codes: 0 all checks passed, 1 at least one check failed, 2 usage or
configuration error (nothing is written in that case).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile

import numpy as np

from . import __version__
from .bellman import DomainError, QContext
from .estimates import (
    EstimateError,
    bilinear_lhs,
    representation_check,
    rows_to_csv,
    sweep_problems,
    sweep_report,
    weighted_riesz_norm,
)
from .gauss import (
    FlowGrid,
    HermiteFunction,
    ModelError,
    OneForm,
    SUBORDINATION_ORDER,
    WeightSpec,
    default_flow_grid,
    q2_characteristic,
)
from .report import CheckResult, Measurement, VerificationReport
from .verify import SuiteConfig, run_aux_grid, run_suite

EMBED_TOL = 1e-6
REPR_TOL = 1e-6
RIESZ_NORM_TOL = 1e-6


class UsageError(Exception):
    """Bad flags or configuration; maps to exit code 2."""


def _floats(text: str) -> list:
    try:
        return [float(v) for v in text.split(",") if v.strip() != ""]
    except ValueError as exc:
        raise UsageError(f"cannot parse number list {text!r}") from exc


def _ints(text: str) -> list:
    try:
        return [int(v) for v in text.split(",") if v.strip() != ""]
    except ValueError as exc:
        raise UsageError(f"cannot parse integer list {text!r}") from exc


def _hermite_sum(text: str) -> HermiteFunction:
    """Parse h<k>[+h<k>]* into a coefficient vector."""
    idx = []
    for part in text.split("+"):
        part = part.strip()
        if not part.startswith("h") or not part[1:].isdigit():
            raise UsageError(f"cannot parse Hermite sum {text!r}; use e.g. h1+h3")
        idx.append(int(part[1:]))
    size = max(idx) + 1
    coeffs = [0.0] * size
    for i in idx:
        coeffs[i] += 1.0
    return HermiteFunction(tuple(coeffs))


def _oneform_sum(text: str) -> OneForm:
    f = _hermite_sum(text)
    return OneForm(f.coeffs)


def _parse_weight(text: str) -> WeightSpec:
    try:
        return WeightSpec.parse(text)
    except (ModelError, ValueError) as exc:
        raise UsageError(str(exc)) from exc


DEFAULTS = {
    "verify-bellman": {
        "q": "1,2,10,100", "samples": 1000, "eta_dim": 1, "seed": 0,
        "fd_step": 1e-4, "pi_exclusion": 1e-3, "directions": 64,
        "mollify_eps": 0.0, "mc_samples": 0, "aux_grid_n": 40,
    },
    "aux-bounds": {"q": "1,2,10,100", "grid_n": 200, "fd_step": 1e-4},
    "a2": {"weight": "exp:a=1", "gl_order": SUBORDINATION_ORDER,
           "x_max": 8.0, "x_step": 0.25, "t_min": 1e-3, "t_max": 32.0,
           "t_nodes": 40},
    "riesz-norm": {"weight": "const:c=1", "n": 32,
                   "gl_order": SUBORDINATION_ORDER},
    "embedding": {"f": "h1", "g": "h0", "weight": "const:c=1",
                  "gl_order": SUBORDINATION_ORDER},
    "repr-check": {"n": "1,2,4,9"},
    "sweep": {"family": "exp", "params": "0,0.5,1,1.5,2", "n": 32,
              "gl_order": SUBORDINATION_ORDER},
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gaussbell",
        description="Bellman-function and Gauss-space weighted-estimate "
                    "verification")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add_common(p):
        p.add_argument("--config", help="JSON config file (defaults < file < flags)")
        p.add_argument("--out", help="output path (stdout when omitted)")
        p.add_argument("--format", choices=("json", "csv"))

    p = sub.add_parser("verify-bellman", help="sampled Bellman property suite")
    p.add_argument("--q", help="comma list of Q values (each >= 1)")
    p.add_argument("--samples", type=int)
    p.add_argument("--eta-dim", dest="eta_dim", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--fd-step", dest="fd_step", type=float)
    p.add_argument("--pi-exclusion", dest="pi_exclusion", type=float)
    p.add_argument("--directions", type=int)
    p.add_argument("--mollify-eps", dest="mollify_eps", type=float)
    p.add_argument("--mc-samples", dest="mc_samples", type=int)
    p.add_argument("--aux-grid-n", dest="aux_grid_n", type=int)
    add_common(p)

    p = sub.add_parser("aux-bounds", help="auxiliary-function certificates")
    p.add_argument("--q")
    p.add_argument("--grid-n", dest="grid_n", type=int)
    p.add_argument("--fd-step", dest="fd_step", type=float)
    add_common(p)

    p = sub.add_parser("a2", help="Poisson flow characteristic")
    p.add_argument("--weight")
    p.add_argument("--gl-order", dest="gl_order", type=int)
    p.add_argument("--x-max", dest="x_max", type=float)
    p.add_argument("--x-step", dest="x_step", type=float)
    p.add_argument("--t-min", dest="t_min", type=float)
    p.add_argument("--t-max", dest="t_max", type=float)
    p.add_argument("--t-nodes", dest="t_nodes", type=int)
    add_common(p)

    p = sub.add_parser("riesz-norm", help="weighted Riesz operator norm")
    p.add_argument("--weight")
    p.add_argument("--n", type=int)
    p.add_argument("--gl-order", dest="gl_order", type=int)
    add_common(p)

    p = sub.add_parser("embedding", help="bilinear space-time estimate")
    p.add_argument("--f")
    p.add_argument("--g")
    p.add_argument("--weight")
    p.add_argument("--gl-order", dest="gl_order", type=int)
    add_common(p)

    p = sub.add_parser("repr-check", help="representation identity")
    p.add_argument("--n")
    add_common(p)

    p = sub.add_parser("sweep", help="weight-family sweep (CSV rows)")
    p.add_argument("--family", choices=("exp", "const"))
    p.add_argument("--params")
    p.add_argument("--n", type=int)
    p.add_argument("--gl-order", dest="gl_order", type=int)
    add_common(p)
    return parser


def _resolve(args: argparse.Namespace) -> dict:
    """defaults < config file < explicit flags, unknown keys rejected."""
    cmd = args.subcommand
    merged = dict(DEFAULTS[cmd])
    if args.config:
        try:
            with open(args.config) as fh:
                file_cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config file: {exc}") from exc
        unknown = set(file_cfg) - set(merged)
        if unknown:
            raise UsageError(f"unknown config keys {sorted(unknown)} "
                             f"for {cmd}")
        merged.update(file_cfg)
    for key in merged:
        val = getattr(args, key, None)
        if val is not None:
            merged[key] = val
    merged["subcommand"] = cmd
    merged["out"] = args.out
    merged["format"] = args.format or ("csv" if cmd == "sweep" else "json")
    if merged["format"] == "csv" and cmd != "sweep":
        raise UsageError("csv output is only defined for the sweep subcommand")
    return merged


def _write_output(text: str, out_path: str | None) -> None:
    if out_path is None:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
        return
    directory = os.path.dirname(os.path.abspath(out_path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".gaussbell-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, out_path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _report(cfg: dict, checks, measurements) -> VerificationReport:
    echo = {k: v for k, v in cfg.items() if k not in ("out",)}
    return VerificationReport(tool_version=__version__, config_echo=echo,
                              checks=checks, measurements=measurements)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _cmd_verify_bellman(cfg: dict) -> VerificationReport:
    try:
        suite = SuiteConfig(
            q_list=tuple(_floats(str(cfg["q"]))),
            samples_per_q=int(cfg["samples"]),
            eta_dim=int(cfg["eta_dim"]),
            seed=int(cfg["seed"]),
            fd_step=float(cfg["fd_step"]),
            pi_exclusion=float(cfg["pi_exclusion"]),
            directions_per_point=int(cfg["directions"]),
            mollify_eps=float(cfg["mollify_eps"]),
            mc_samples=int(cfg["mc_samples"]),
            aux_grid_n=int(cfg["aux_grid_n"]),
        )
    except DomainError as exc:
        raise UsageError(str(exc)) from exc
    report = run_suite(suite, tool_version=__version__)
    report.config_echo = {k: v for k, v in cfg.items() if k != "out"}
    return report


def _cmd_aux_bounds(cfg: dict) -> VerificationReport:
    checks = []
    for q in _floats(str(cfg["q"])):
        try:
            ctx = QContext(q)
        except DomainError as exc:
            raise UsageError(str(exc)) from exc
        res = run_aux_grid(ctx, int(cfg["grid_n"]), float(cfg["fd_step"]))
        checks.append(CheckResult(
            name=f"aux_size[Q={q:g}]", count=res["count"],
            failures=res["size_failures"], worst_margin=res["size_worst"],
            argmax_location=res["size_worst_at"]))
        checks.append(CheckResult(
            name=f"aux_hessian[Q={q:g}]", count=res["count"],
            failures=res["hessian_failures"],
            worst_margin=res["hessian_worst"],
            argmax_location=res["hessian_worst_at"]))
    return _report(cfg, checks, [])


def _cmd_a2(cfg: dict) -> VerificationReport:
    w = _parse_weight(str(cfg["weight"]))
    try:
        xs = np.arange(-float(cfg["x_max"]), float(cfg["x_max"]) + 1e-9,
                       float(cfg["x_step"]))
        ts = np.logspace(math.log10(float(cfg["t_min"])),
                         math.log10(float(cfg["t_max"])), int(cfg["t_nodes"]))
        grid = FlowGrid(tuple(xs), tuple(ts), int(cfg["gl_order"]))
    except (ModelError, ValueError) as exc:
        raise UsageError(str(exc)) from exc
    res = q2_characteristic(w, grid)
    argt = "inf" if math.isinf(res.argmax_t) else res.argmax_t
    checks = [CheckResult(
        name="flow_product_ge_1", count=res.node_count,
        failures=res.below_one_count,
        worst_margin=res.min_product - 1.0,
    )]
    measurements = [
        Measurement("q2_lower", res.value,
                    {"x": res.argmax_x, "t": argt}),
        Measurement("q2_t_limit", res.limit),
    ]
    return _report(cfg, checks, measurements)


def _cmd_riesz_norm(cfg: dict) -> VerificationReport:
    w = _parse_weight(str(cfg["weight"]))
    grid = default_flow_grid(int(cfg["gl_order"]))
    try:
        res = weighted_riesz_norm(w, int(cfg["n"]), grid=grid)
    except EstimateError as exc:
        raise UsageError(str(exc)) from exc
    slack = 80.0 * res.q2 + RIESZ_NORM_TOL - res.weighted_norm
    checks = [CheckResult(name="riesz_norm_bound", count=1,
                          failures=int(slack < 0), worst_margin=slack)]
    measurements = [Measurement("weighted_norm", res.weighted_norm),
                    Measurement("q2_lower", res.q2),
                    Measurement("bound_ratio", res.bound_ratio)]
    return _report(cfg, checks, measurements)


def _cmd_embedding(cfg: dict) -> VerificationReport:
    w = _parse_weight(str(cfg["weight"]))
    f = _hermite_sum(str(cfg["f"]))
    g = _oneform_sum(str(cfg["g"]))
    grid = default_flow_grid(int(cfg["gl_order"]))
    try:
        res = bilinear_lhs(f, g, w, grid)
    except EstimateError as exc:
        raise UsageError(str(exc)) from exc
    slack = res.bound + EMBED_TOL - res.lhs
    checks = [CheckResult(name="embedding_bound", count=1,
                          failures=int(slack < 0), worst_margin=slack)]
    measurements = [Measurement(k, v) for k, v in res.as_dict().items()]
    cfg = dict(cfg)
    cfg["f_coeffs"] = list(f.coeffs)      # functions serialize as arrays
    cfg["g_coeffs"] = list(g.coeffs)
    return _report(cfg, checks, measurements)


def _cmd_repr_check(cfg: dict) -> VerificationReport:
    checks = []
    measurements = []
    for n in _ints(str(cfg["n"])):
        if n < 1:
            raise UsageError("repr-check n values must be >= 1")
        res = representation_check(n)
        checks.append(CheckResult(
            name=f"representation[n={n}]", count=1,
            failures=int(res["abs_gap"] > REPR_TOL),
            worst_margin=REPR_TOL - res["abs_gap"]))
        measurements.append(Measurement(f"repr_rhs[n={n}]", res["rhs"],
                                        {"tail_bound": res["tail_bound"]}))
    return _report(cfg, checks, measurements)


def _run_sweep(cfg: dict):
    grid = default_flow_grid(int(cfg["gl_order"]))
    rows = sweep_report(str(cfg["family"]), _floats(str(cfg["params"])),
                        int(cfg["n"]), grid, strict=False)
    return rows, sweep_problems(rows)


def run(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors, 0 for --help
        return int(exc.code or 0)
    try:
        cfg = _resolve(args)
        cmd = args.subcommand
        if cmd == "sweep":
            rows, problems = _run_sweep(cfg)
            if cfg["format"] == "csv":
                _write_output(rows_to_csv(rows), cfg["out"])
            else:
                _write_output(json.dumps(
                    {"rows": rows, "problems": problems}, indent=2),
                    cfg["out"])
            for p in problems:
                print(f"sweep: {p}", file=sys.stderr)
            return 1 if problems else 0
        handler = {
            "verify-bellman": _cmd_verify_bellman,
            "aux-bounds": _cmd_aux_bounds,
            "a2": _cmd_a2,
            "riesz-norm": _cmd_riesz_norm,
            "embedding": _cmd_embedding,
            "repr-check": _cmd_repr_check,
        }[cmd]
        report = handler(cfg)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (DomainError, ModelError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    _write_output(report.dumps(), cfg["out"])
    return 0 if report.total_failures == 0 else 1


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()

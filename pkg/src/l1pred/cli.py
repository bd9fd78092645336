"""Command-line front end.

Subcommands write CSV with ``#``-prefixed metadata lines that record the
full configuration, so every output can be regenerated exactly.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 validation failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, oracle
from .errors import (
    ConvergenceError,
    InconsistentDataError,
    ModelError,
    NoValidDensityError,
    PreconditionError,
    SpecParseError,
)
from .loss import parse_gamma
from .models import Estimator, make_normal, make_uniform_ball, parse_model
from .quadrature import McSpec, QuadSpec
from .risk import c1_inf, constant_risk, optimal_c, restricted_risk
from .uniform import (
    UniformBayesInput,
    bayes_uniform_predictive,
    multivariate_uniform_risk,
    univariate_uniform_risk,
)

__all__ = ["main", "parse_grid", "RunConfig"]

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_VALIDATION = 0, 2, 3, 4

log = logging.getLogger("l1pred")


class ConfigError(ValueError):
    """Invalid command-line configuration."""


def parse_grid(text: str, name: str = "grid") -> np.ndarray:
    """Parse ``a:b:step`` into the inclusive grid ``a, a + step, ..., b``."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"{name} must look like a:b:step, got {text!r}")
    try:
        a, b, step = (float(p) for p in parts)
    except ValueError as exc:
        raise ConfigError(f"{name} has a non-numeric field: {text!r}") from exc
    if not all(math.isfinite(v) for v in (a, b, step)):
        raise ConfigError(f"{name} fields must be finite: {text!r}")
    if step <= 0:
        raise ConfigError(f"{name} step must be positive: {text!r}")
    if b < a:
        raise ConfigError(f"{name} is empty: upper end {b:g} is below lower end {a:g}")
    n = int(math.floor((b - a) / step + 1e-9))
    return np.round(a + step * np.arange(n + 1), 12)


def _parse_list(text: str, name: str, kind=float) -> list:
    try:
        out = [kind(v) for v in text.replace(",", " ").split()]
    except ValueError as exc:
        raise ConfigError(f"{name} must be a comma-separated list, got {text!r}") from exc
    if not out:
        raise ConfigError(f"{name} is empty")
    return out


@dataclass
class RunConfig:
    """Resolved configuration of one CLI run, echoed into the output header."""

    command: str
    settings: dict = field(default_factory=dict)

    def header(self) -> list[str]:
        lines = [f"# l1pred {__version__} {self.command}"]
        lines += [f"# {k} = {v}" for k, v in self.settings.items()]
        return lines


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".12g")
    return str(v)


def _emit(config: RunConfig, columns: list[str], rows: list[list], out: str | None) -> None:
    buf = io.StringIO()
    for line in config.header():
        buf.write(line + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    text = buf.getvalue()
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _quad(args) -> QuadSpec:
    try:
        return QuadSpec(nodes=args.quad_nodes, check_convergence=args.check_convergence)
    except ModelError as exc:
        raise ConfigError(str(exc)) from exc


def _mc(args) -> McSpec:
    try:
        return McSpec(n=args.mc_n, seed=args.seed)
    except ModelError as exc:
        raise ConfigError(str(exc)) from exc


def _estimator(args) -> Estimator:
    if args.estimator == "raw":
        return Estimator.raw()
    if not args.m > 0:
        raise ConfigError("--m must be positive for the mle-ball estimator")
    return Estimator.mle_ball(args.m)


# --------------------------------------------------------------------------
# Subcommands
# --------------------------------------------------------------------------


def cmd_risk_curve(args) -> int:
    p = parse_model(args.p)
    q = parse_model(args.q) if args.q else p
    gamma = parse_gamma(args.gamma)
    grid = parse_grid(args.c_grid, "--c-grid")
    if grid[0] <= 0:
        raise ConfigError("scale factors must be positive")
    quad = _quad(args)
    r1 = constant_risk(p, q, 1.0, gamma, quad)
    rows = []
    for c in grid:
        r = r1 if c == 1.0 else constant_risk(p, q, float(c), gamma, quad)
        rows.append([float(c), r, 0.0, r / r1])
    best = min(rows, key=lambda row: row[1])
    config = RunConfig("risk-curve", {
        "p": p.describe(), "q": q.describe(), "gamma": gamma.describe(),
        "c_grid": args.c_grid, "quad_nodes": quad.nodes, "seed": args.seed,
        "std_err": "0 (deterministic quadrature)", "R1": _fmt(r1),
        "grid_argmin_c": _fmt(best[0]),
    })
    _emit(config, ["c", "risk", "std_err", "ratio_to_R1"], rows, args.out)
    return EXIT_OK


def cmd_restricted_curve(args) -> int:
    p = parse_model(args.p)
    q = parse_model(args.q) if args.q else p
    gamma = parse_gamma(args.gamma)
    lams = parse_grid(args.lambda_grid, "--lambda-grid")
    if lams[0] < 0:
        raise ConfigError("--lambda-grid must be nonnegative")
    est = _estimator(args)
    quad, mc = _quad(args), _mc(args)
    if args.c1 is not None:
        c1 = args.c1
        c1_source = "given"
    else:
        res = c1_inf(p, q, est, args.m, np.linspace(0.0, args.m, 11), gamma, mc, quad)
        c1 = res.c1
        c1_source = f"c1_inf over 11 lambdas in [0, {args.m:g}]"
    opt = optimal_c(p, q, gamma, quad)
    raw_c1 = constant_risk(p, q, c1, gamma, quad)
    rows = []
    for lam in lams:
        a = restricted_risk(p, q, c1, est, float(lam), gamma, mc, quad)
        b = restricted_risk(p, q, 1.0, est, float(lam), gamma, mc, quad)
        rows.append([float(lam), a.risk, b.risk, opt.risk, raw_c1, a.std_err, b.std_err])
    config = RunConfig("restricted-curve", {
        "p": p.describe(), "q": q.describe(), "gamma": gamma.describe(),
        "estimator": est.describe(), "m": _fmt(args.m), "lambda_grid": args.lambda_grid,
        "c1": _fmt(c1), "c1_source": c1_source, "c_star_raw": _fmt(opt.c_star),
        "quad_nodes": quad.nodes, "mc_n": mc.n, "seed": mc.seed,
        "note": "restricted risks share draws across lambda (common random numbers)",
    })
    cols = ["lambda", "risk_c1", "risk_plugin", "risk_rawx_cstar", "risk_rawx_c1",
            "std_err_c1", "std_err_plugin"]
    _emit(config, cols, rows, args.out)
    return EXIT_OK


def _x_model(name: str, d: int, scale: float):
    if name == "uniball":
        return make_uniform_ball(d, scale)
    if name == "normal":
        return make_normal(d, scale * scale)
    return parse_model(f"{name},d={d}" if ":" in name else f"{name}:d={d}")


def cmd_uniform(args) -> int:
    dims = _parse_list(args.dims, "--dims", int)
    laws = [s.strip() for s in args.x.split(";") if s.strip()]
    grid = parse_grid(args.c_grid, "--c-grid")
    if grid[0] <= 0:
        raise ConfigError("scale factors must be positive")
    if not (args.A > 0 and args.m > 0):
        raise ConfigError("--A and --m must be positive")
    if 1.0 not in grid:
        grid = np.unique(np.append(grid, 1.0))
    rows = []
    for d in dims:
        for name in laws:
            x = _x_model(name, d, args.A)
            method = "closed form"
            try:
                if d == 1:
                    vals = [univariate_uniform_risk(x.norm, c, B=args.m) for c in grid]
                else:
                    vals = [multivariate_uniform_risk(x.norm, d, c, m=args.m) for c in grid]
            except (PreconditionError, ModelError) as exc:
                log.warning("closed form unavailable for X=%s, d=%d (%s); using the oracle",
                            name, d, exc)
                method = "oracle"
                y = make_uniform_ball(d, args.m)
                vals = [oracle.mc_risk(x, y, Estimator.raw(), c, np.zeros(d),
                                       n_x=max(args.mc_n, 1000), n_y=1000, seed=args.seed).value
                        for c in grid]
            r1 = vals[int(np.flatnonzero(grid == 1.0)[0])]
            rows += [[d, name, float(c), v, r1 / v, method] for c, v in zip(grid, vals)]
    config = RunConfig("uniform", {
        "target": f"uniform ball of radius {args.m:g}", "x_laws": args.x,
        "x_scale_A": _fmt(args.A), "dims": args.dims, "c_grid": args.c_grid, "seed": args.seed,
    })
    _emit(config, ["d", "x_law", "c", "risk", "ratio_R1_over_Rc", "method"], rows, args.out)
    return EXIT_OK


def _read_sample(args) -> list[float]:
    if args.values and args.sample_file:
        raise ConfigError("give either --values or --sample-file, not both")
    if args.values:
        return _parse_list(args.values, "--values")
    if args.sample_file:
        try:
            text = Path(args.sample_file).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read {args.sample_file}: {exc}") from exc
        return _parse_list(text, "sample file")
    raise ConfigError("bayes-uniform needs --values or --sample-file")


def cmd_bayes_uniform(args) -> int:
    sample = _read_sample(args)
    data = UniformBayesInput(tuple(sample), args.A, args.B)
    dens = bayes_uniform_predictive(data)
    text = (f"{dens}\n# n = {len(sample)}, midrange = {_fmt(data.midrange)}, "
            f"range = {_fmt(data.range)}, A = {_fmt(args.A)}, B = {_fmt(args.B)}\n")
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_validate(args) -> int:
    from .validate import run_validation

    numbers = _parse_list(args.criteria, "--criteria", int) if args.criteria else None

    def progress(rep):
        print(rep.summary(), flush=True)
        for chk in rep.failures():
            print(chk.line(), flush=True)

    reports = run_validation(args.tier, numbers, progress)
    n_fail = sum(not r.passed for r in reports)
    print(f"{len(reports) - n_fail}/{len(reports)} criteria passed ({args.tier} tier)")
    if args.out:
        lines = []
        for rep in reports:
            lines.append(rep.summary())
            lines += [chk.line() for chk in rep.checks]
        Path(args.out).write_text("\n".join(lines) + "\n")
    return EXIT_OK if n_fail == 0 else EXIT_VALIDATION


# --------------------------------------------------------------------------
# Argument parsing
# --------------------------------------------------------------------------


def _common(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--gamma", default="identity", help="loss transform: identity or power:k")
    sp.add_argument("--quad-nodes", type=int, default=QuadSpec.nodes)
    sp.add_argument("--check-convergence", action="store_true",
                    help="recompute with doubled nodes and fail on disagreement")
    sp.add_argument("--mc-n", type=int, default=McSpec.n)
    sp.add_argument("--seed", type=int, default=McSpec.seed)
    sp.add_argument("--out", help="output path (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="l1pred",
        description="Integrated L1 risk of scale-expanded plug-in predictive densities.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("risk-curve", help="constant risk R(c) over a grid of scale factors")
    sp.add_argument("--p", required=True, help="model of X, e.g. normal:d=3,var=1")
    sp.add_argument("--q", help="model of Y (default: same as --p)")
    sp.add_argument("--c-grid", default="1:1.4:0.005")
    _common(sp)
    sp.set_defaults(func=cmd_risk_curve)

    sp = sub.add_parser("restricted-curve", help="risks over ||theta|| for a ball-restricted mean")
    sp.add_argument("--p", required=True)
    sp.add_argument("--q")
    sp.add_argument("--lambda-grid", default="0:2.2:0.1")
    sp.add_argument("--m", type=float, default=1.0, help="radius of the parameter ball")
    sp.add_argument("--estimator", choices=["raw", "mle-ball"], default="mle-ball")
    sp.add_argument("--c1", type=float, help="expansion for the restricted curve "
                    "(default: computed by c1_inf)")
    _common(sp)
    sp.set_defaults(func=cmd_restricted_curve)

    sp = sub.add_parser("uniform", help="risk ratios R(1)/R(c) for a uniform-ball target")
    sp.add_argument("--dims", default="1,2,3,4,5")
    sp.add_argument("--x", default="uniball;normal",
                    help="';'-separated X laws: built-in names (uniball, normal) or model specs without d")
    sp.add_argument("--A", type=float, default=1.0, help="scale of X (radius or std. dev.)")
    sp.add_argument("--m", type=float, default=1.0, help="radius of the target ball")
    sp.add_argument("--c-grid", default="0.2:4:0.01")
    _common(sp)
    sp.set_defaults(func=cmd_uniform)

    sp = sub.add_parser("bayes-uniform", help="posterior-median predictive density, uniform model")
    sp.add_argument("--values", help="comma-separated sample")
    sp.add_argument("--sample-file", help="file of whitespace/comma separated values")
    sp.add_argument("--A", type=float, required=True, help="half-width of the sampling law")
    sp.add_argument("--B", type=float, required=True, help="half-width of the target law")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_bayes_uniform)

    sp = sub.add_parser("validate", help="run the cross-validation suite")
    sp.add_argument("--tier", choices=["quick", "full"], default="quick")
    sp.add_argument("--criteria", help="comma-separated criterion numbers (default: all in tier)")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SpecParseError as exc:
        print(f"error: {exc} (offending token: {exc.token!r})", file=sys.stderr)
        return EXIT_CONFIG
    except (ConfigError, ModelError, PreconditionError, NoValidDensityError,
            InconsistentDataError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConvergenceError, FloatingPointError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())

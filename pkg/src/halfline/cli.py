"""Command-line front end.

Subcommands: simulate, shoot, match-alpha, phase-portrait, rates, sweep,
report.  Configuration uses plain key = value files with [section] headers
(see README for the grammar); command-line flags override the file.  Exit
codes: 0 all checks passed, 1 some check failed, 2 configuration error.
"""

from __future__ import annotations

import argparse
import configparser
import math
import os
import sys

import numpy as np

from . import experiments, phaseplane, profiles, rates
from .core import (
    CompactBump,
    DomainPolicy,
    LogCorrectedTail,
    PowerTail,
    ProblemSpec,
    ReactionSupport,
    SolverTolerances,
    Uniform,
)
from .pde import Regime, run

__all__ = ["main", "load_config", "spec_from_config", "theoretical_rate"]


class ConfigError(ValueError):
    pass


def load_config(path):
    cp = configparser.ConfigParser()
    read = cp.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path}")
    return cp


def _support_from(text):
    text = text.strip().lower()
    if text in ("half_line", "halfline", "half-line"):
        return ReactionSupport.half_line()
    if text.startswith("interval"):
        try:
            L = float(text.split(":", 1)[1])
        except (IndexError, ValueError):
            raise ConfigError("interval support needs a width, e.g. interval:1.5")
        return ReactionSupport.interval(L)
    if text == "global":
        return ReactionSupport.global_()
    if text == "none":
        return ReactionSupport.none()
    raise ConfigError(f"unknown support {text!r}")


def _datum_from(section, m):
    kind = section.get("datum", "bump").strip().lower()
    g = lambda key, default: float(section.get(key, default))
    if kind == "bump":
        return CompactBump(center=g("datum.center", 0.0),
                           width=g("datum.width", 2.0),
                           height=g("datum.height", 1.0),
                           pedestal=g("datum.pedestal", 0.0))
    if kind == "power_tail":
        return PowerTail(gamma=g("datum.gamma", 2.0), scale=g("datum.scale", 1.0))
    if kind == "log_tail":
        return LogCorrectedTail(m=m, scale=g("datum.scale", 1.0))
    if kind == "uniform":
        return Uniform(height=g("datum.height", 1.0))
    raise ConfigError(f"unknown datum {kind!r}")


def spec_from_config(cfg, dx=None, tmax=None) -> ProblemSpec:
    """Build a ProblemSpec from the [problem], [domain], [solver] sections."""
    try:
        prob = cfg["problem"] if cfg.has_section("problem") else {}
        dom = cfg["domain"] if cfg.has_section("domain") else {}
        sol = cfg["solver"] if cfg.has_section("solver") else {}
        m = float(prob.get("m", 1.0))
        p = float(prob.get("p", 2.0))
        domain = DomainPolicy(
            x_min=float(dom.get("x_min", -20.0)),
            x_max=float(dom.get("x_max", 20.0)),
            dx=dx if dx is not None else float(dom.get("dx", 0.1)),
            max_nodes=int(dom.get("max_nodes", 1 << 18)),
            allow_expansion=str(dom.get("expand", "true")).lower() != "false",
        )
        tol = SolverTolerances(
            max_time=tmax if tmax is not None else float(sol.get("max_time", 10.0)),
            cfl_safety=float(sol.get("cfl_safety", 0.45)),
            reaction_safety=float(sol.get("reaction_safety", 0.02)),
            blowup_threshold=float(sol.get("blowup_threshold", 1e8)),
            snapshot_stride=float(sol.get("snapshot_stride", 1.0)),
        )
        return ProblemSpec(
            m=m, p=p,
            support=_support_from(prob.get("support", "half_line")),
            datum=_datum_from(prob, m),
            domain=domain,
            tolerances=tol,
            boundary=prob.get("boundary", "auto"),
        )
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc


def theoretical_rate(m, p, location):
    """(law, exponent-or-rate) the classification predicts at a probe point.

    Grow-up rates depend on the side for p > m (distinct rates inside and
    outside the reaction support); blow-up always carries 1/(p-1).
    """
    left = not isinstance(location, str) and float(location) < 0
    if p > 1:
        return "blowup_power", 1.0 / (p - 1.0)
    if p == 1:
        if m > 1:
            return "exponential", float(profiles.find_alpha_star(m).alpha_star)
        if m == 1 or not left:
            return "exponential", 1.0
        return "power", 1.0 / (1.0 - m)
    if m >= p or not left:
        return "power", 1.0 / (1.0 - p)
    return "power", 1.0 / (1.0 - m)


def _cmd_simulate(args):
    cfg = load_config(args.config) if args.config else configparser.ConfigParser()
    spec = spec_from_config(cfg, args.dx, args.tmax)
    res = experiments.preset_custom(args.out, spec=spec)
    _finish(res, args.out)
    return 0


def _cmd_rates(args):
    cfg = load_config(args.config) if args.config else configparser.ConfigParser()
    spec = spec_from_config(cfg, args.dx, args.tmax)
    tr = run(spec)
    rows = []
    targets = [("sup", None)] + [(x, None) for x in spec.probes]
    for loc, _ in targets:
        try:
            law, value = theoretical_rate(spec.m, spec.p, loc)
            if law == "power":
                fit = rates.fit_power(tr, loc)
            elif law == "exponential":
                fit = rates.fit_exponential(tr, loc)
            else:
                if tr.regime is not Regime.BLOW_UP or loc != "sup":
                    continue
                fit = rates.fit_blowup(tr, tr.blowup_time_estimate)
            verdict = "PASS" if fit.reliable and \
                abs(fit.fitted - value) <= 0.15 * abs(value) else "FAIL"
            rows.append(dict(m=spec.m, p=spec.p, support=spec.support.kind,
                             location=str(loc), law=law,
                             theoretical_exponent=float(value),
                             fitted=float(fit.fitted),
                             residual=float(fit.residual), verdict=verdict))
        except ValueError as exc:
            rows.append(dict(m=spec.m, p=spec.p, support=spec.support.kind,
                             location=str(loc), law="", theoretical_exponent="",
                             fitted="", residual="", verdict=f"skipped: {exc}"))
    os.makedirs(args.out, exist_ok=True)
    experiments._write_csv(os.path.join(args.out, "rates.csv"), rows,
                           ["m", "p", "support", "location", "law",
                            "theoretical_exponent", "fitted", "residual",
                            "verdict"])
    bad = [r for r in rows if r["verdict"] == "FAIL"]
    for r in rows:
        print(f"{r['location']:>6} {r['law']:<14} fitted={r['fitted']}"
              f" target={r['theoretical_exponent']} -> {r['verdict']}")
    return 1 if bad else 0


def _cmd_shoot(args):
    rows = []
    for alpha in args.alpha:
        lp = lm = math.nan
        if 1.0 / args.m < alpha <= 2.0 / (args.m + 1.0):
            lp = profiles.find_lambda_plus(args.m, alpha)
        if 0.0 < alpha < 2.0 / (args.m + 1.0):
            lm = profiles.find_lambda_minus(args.m, alpha)
        gap = lp - lm if not (math.isnan(lp) or math.isnan(lm)) else math.nan
        rows.append(dict(m=args.m, alpha=alpha, lambda_plus=lp, lambda_minus=lm,
                         gap=gap))
        print(f"alpha={alpha:.6f}: lambda+ = {lp:.8f}  lambda- = {lm:.8f}")
    os.makedirs(args.out, exist_ok=True)
    experiments._write_csv(os.path.join(args.out, "shooting.csv"), rows,
                           ["m", "alpha", "lambda_plus", "lambda_minus", "gap"])
    return 0


def _cmd_match_alpha(args):
    res = experiments.run_experiment("alpha-star", args.out, m=args.m)
    _finish(res, args.out)
    return 0 if res.all_pass else 1


def _cmd_phase_portrait(args):
    res = experiments.run_experiment("phase-portrait", args.out, m=args.m,
                                     alpha=args.alpha)
    _finish(res, args.out)
    return 0 if res.all_pass else 1


def _cmd_sweep(args):
    cfg = load_config(args.config) if args.config else None
    if cfg is None or not cfg.has_section("sweep"):
        raise ConfigError("sweep needs a config file with a [sweep] section")
    sw = cfg["sweep"]

    def grid(key, default):
        text = sw.get(key, default)
        return [float(v) for v in text.replace(",", " ").split()]

    rows = run_sweep_safe(grid("m", "1"), grid("p", "2"), grid("height", "1"),
                          args.out, args.jobs)
    n_err = sum(1 for r in rows if r["error"])
    print(f"sweep: {len(rows)} cells, {n_err} recorded errors")
    return 0


def run_sweep_safe(ms, ps, heights, out, jobs):
    return experiments.run_sweep(ms, ps, heights, out_dir=out, jobs=jobs)


def _cmd_report(args):
    kwargs = {}
    res = experiments.run_experiment(args.preset, args.out, **kwargs)
    _finish(res, args.out)
    return 0 if res.all_pass else 1


def _finish(res, out):
    for line in res.report_lines():
        print(line)
    if out:
        print(f"wrote {len(res.files)} files to {out}")
        missing = [f for f in res.files if not os.path.exists(f)]
        if missing:
            print(f"WARNING: missing files: {missing}", file=sys.stderr)


def main(argv=None):
    ap = argparse.ArgumentParser(
        prog="halfline",
        description="numerical laboratory for diffusion with a half-line reaction")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, out_default="out"):
        p.add_argument("--config", help="key = value config file")
        p.add_argument("--out", default=out_default, help="output directory")
        p.add_argument("--jobs", type=int, default=1)
        p.add_argument("--dx", type=float, default=None)
        p.add_argument("--tmax", type=float, default=None)

    p = sub.add_parser("simulate", help="run one problem and dump its trace")
    common(p)
    p.set_defaults(fn=_cmd_simulate)

    p = sub.add_parser("shoot", help="threshold slopes of the growth profiles")
    common(p)
    p.add_argument("--m", type=float, default=2.0)
    p.add_argument("--alpha", type=float, nargs="+", default=[0.6])
    p.set_defaults(fn=_cmd_shoot)

    p = sub.add_parser("match-alpha", help="matched growth exponent alpha*")
    common(p)
    p.add_argument("--m", type=float, default=2.0)
    p.set_defaults(fn=_cmd_match_alpha)

    p = sub.add_parser("phase-portrait", help="orbit classification portrait")
    common(p)
    p.add_argument("--m", type=float, default=2.0)
    p.add_argument("--alpha", type=float, default=0.6)
    p.set_defaults(fn=_cmd_phase_portrait)

    p = sub.add_parser("rates", help="run a problem and fit its rate laws")
    common(p)
    p.set_defaults(fn=_cmd_rates)

    p = sub.add_parser("sweep", help="grid of runs from the [sweep] section")
    common(p)
    p.set_defaults(fn=_cmd_sweep)

    p = sub.add_parser("report", help="run a named preset and report PASS/FAIL")
    common(p)
    p.add_argument("--preset", required=True,
                   choices=sorted(experiments.PRESETS))
    p.set_defaults(fn=_cmd_report)

    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

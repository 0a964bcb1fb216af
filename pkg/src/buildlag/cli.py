"""Command-line front end.

Subcommands: boundary (threshold tables), simulate (trajectories), cost
(Monte Carlo cost report), statics (sensitivity tables), verify (the full
check battery).  Every dataset the project ships can be regenerated from
here; see the epilog of --help for the recipes.

Exit codes: 0 success, 2 configuration error, 3 numeric failure,
4 verification failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import replace

import numpy as np

from . import scenarios
from .boundary import Boundary, cir_asymptote, cir_kink, cir_tangent, gbm_constants, generic_boundary
from .demand import ABM, CIR, GBM, TimeGrid, beta0, sample_path, sample_paths
from .errors import (
    DomainError,
    GridError,
    NumericsError,
    ParameterError,
    StepError,
    TruncationError,
)
from .montecarlo import (
    PolicySpec,
    _base_rule,
    dominance_test,
    equilibrium_check,
    estimate_F,
    identity_check,
)
from .policy import lag_steps, pipeline_levels, simulate
from .statics import abm_partials, finite_diff_check, gbm_elasticity, gbm_statics_table

_EPILOG = """\
dataset recipes (each is deterministic under a fixed seed):
  boundary --scenario cir-fast                      threshold with tangent, asymptote, diagonal
  boundary --scenario cir-fast --lag 1 --sigma 0.05 lag/volatility variants of the same table
  boundary --scenario abm-power --sweep-sigma       volatility markdown at lag 1 vs lag 8
  simulate --scenario gbm-growth                    one path: t, D, C, K, dI, p
  simulate --scenario cir-slow --paths 2000         mean and quantile bands across paths
  cost --scenario gbm-growth --policy shift=50      cost of a deliberately shifted threshold
  statics --scenario gbm-growth                     elasticity table with sign verdicts
  verify --scenario cir-fast                        oracle, identity, dominance, equilibrium,
                                                    sensitivity checks; exit 4 on any FAIL

scripts/make_figure_data.py regenerates the full set under out/.
"""


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 2
    try:
        return args.func(args)
    except (ParameterError, DomainError, GridError, StepError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (NumericsError, TruncationError, OverflowError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="buildlag",
        description="Irreversible capacity investment under a construction lag: "
        "boundaries, simulation, cost estimates, verification.",
        epilog=_EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, paths=False, horizon=False):
        p.add_argument("--scenario", help="named parameter set (default: gbm-growth)")
        p.add_argument("--config", help="JSON run configuration file")
        p.add_argument("--seed", type=int, help="override the Monte Carlo seed")
        p.add_argument("--out", help="output file (default: stdout)")
        p.add_argument("--format", choices=("csv", "json"), help="output format")
        if paths:
            p.add_argument("--paths", type=int, help="number of Monte Carlo paths")
        if horizon:
            p.add_argument("--horizon", type=float, help="time horizon in years")

    b = sub.add_parser("boundary", help="tabulate the investment threshold")
    common(b)
    b.add_argument("--d-min", type=float, help="lowest demand level")
    b.add_argument("--d-max", type=float, help="highest demand level")
    b.add_argument("--points", type=int, default=201, help="grid size (default 201)")
    b.add_argument("--lag", type=float, help="override the construction lag h")
    b.add_argument("--sigma", type=float, help="override the demand volatility")
    b.add_argument(
        "--sweep-sigma",
        action="store_true",
        help="additive model only: tabulate the threshold bias over volatility "
        "at lag 1 and lag 8 instead of over demand",
    )
    b.set_defaults(func=_cmd_boundary)

    s = sub.add_parser("simulate", help="simulate the optimal policy along demand paths")
    common(s, paths=True, horizon=True)
    s.set_defaults(func=_cmd_simulate)

    c = sub.add_parser("cost", help="Monte Carlo estimate of the discounted total cost")
    common(c, paths=True, horizon=True)
    c.add_argument(
        "--policy",
        default="optimal",
        help="'optimal', 'shift=X' (threshold moved by X), or 'const=X' "
        "(committed capacity jumps to X and stays)",
    )
    c.add_argument(
        "--tail-check",
        action="store_true",
        help="fail (exit 3) if the truncated tail exceeds 1%% of the estimate",
    )
    c.set_defaults(func=_cmd_cost)

    t = sub.add_parser("statics", help="sensitivity table for the threshold")
    common(t)
    t.set_defaults(func=_cmd_statics)

    v = sub.add_parser("verify", help="run the full verification battery")
    common(v, paths=True, horizon=True)
    v.add_argument(
        "--debug-scale-boundary",
        type=float,
        default=1.0,
        metavar="FACTOR",
        help="multiply the threshold by FACTOR before the Monte Carlo checks; "
        "a negative control, dominance must FAIL for FACTOR != 1",
    )
    v.set_defaults(func=_cmd_verify)
    return parser


# ---------------------------------------------------------------------------
# Config plumbing and output helpers
# ---------------------------------------------------------------------------


def _load_config(args) -> scenarios.RunConfig:
    if args.config and args.scenario:
        raise ParameterError("give either --config or --scenario, not both")
    if args.config:
        cfg = scenarios.load(args.config)
    else:
        cfg = scenarios.get(args.scenario or "gbm-growth")
    mc = cfg.mc
    if args.seed is not None:
        mc = replace(mc, seed=args.seed)
    if getattr(args, "paths", None) is not None:
        mc = replace(mc, n_paths=args.paths)
    if getattr(args, "horizon", None) is not None:
        mc = replace(mc, horizon=args.horizon)
    out = cfg.outputs
    if args.out is not None:
        out = replace(out, path=args.out)
    if args.format is not None:
        out = replace(out, format=args.format)
    return replace(cfg, mc=mc, outputs=out)


def _cell(v) -> str:
    if isinstance(v, float):
        return "%.17g" % v
    return str(v)


def _emit_table(header, rows, outputs) -> None:
    if outputs.format == "json":
        text = json.dumps(
            [dict(zip(header, row)) for row in rows], indent=2, sort_keys=True
        ) + "\n"
    else:
        lines = [",".join(header)]
        lines.extend(",".join(_cell(v) for v in row) for row in rows)
        text = "\n".join(lines) + "\n"
    _emit(text, outputs.path)


def _emit_json(obj, outputs) -> None:
    _emit(json.dumps(obj, indent=2, sort_keys=True) + "\n", outputs.path)


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


# ---------------------------------------------------------------------------
# boundary
# ---------------------------------------------------------------------------


def _cmd_boundary(args) -> int:
    cfg = _load_config(args)
    sc = cfg.scenario
    model = sc.model
    if args.sigma is not None:
        model = replace(model, sigma=args.sigma)
    h = sc.h if args.lag is None else float(args.lag)
    if args.sweep_sigma:
        return _boundary_sigma_sweep(cfg, model, args)

    bound = Boundary(model, sc.rho, h, sc.q0)
    is_cir = isinstance(model, CIR)
    lo = args.d_min
    hi = args.d_max
    if hi is None:
        hi = 2.0 * (model.delta if is_cir else sc.d)
    if lo is None:
        lo = 0.0
    if isinstance(model, GBM) and lo <= 0.0:
        shifted = 1e-9 * max(hi, 1.0)
        print(
            f"note: d-grid start {lo:g} is outside the state space; using {shifted:g}",
            file=sys.stderr,
        )
        lo = shifted
    if not hi > lo:
        raise ParameterError(f"need d-max > d-min, got [{lo}, {hi}]")
    if args.points < 2:
        raise ParameterError(f"need at least 2 grid points, got {args.points}")

    d = np.linspace(lo, hi, args.points)
    b0 = beta0(model, d, h)
    bs = bound.precautionary(d)
    chat = b0 - bound.discounting_bias - bs
    header = ["d", "c_hat", "beta0", "b_rho", "b_sigma"]
    cols = [d, chat, b0, np.full_like(d, bound.discounting_bias), bs]
    if is_cir:
        header += ["tangent", "asymptote", "diagonal"]
        cols += [
            cir_tangent(model, sc.rho, h, sc.q0, d),
            cir_asymptote(model, sc.rho, h, sc.q0, d),
            d,
        ]
    rows = [tuple(float(c[i]) for c in cols) for i in range(len(d))]
    _emit_table(header, rows, cfg.outputs)
    return 0


def _boundary_sigma_sweep(cfg, model, args) -> int:
    """Threshold bias c_hat(d) - d against volatility, at lags 1 and 8.

    The bias does not depend on d for the additive model, and the lag and
    volatility enter it through separate terms, so the gap between the two
    curves is constant in sigma."""
    sc = cfg.scenario
    if not isinstance(model, ABM):
        raise ParameterError("--sweep-sigma applies to the additive model only")
    lo = args.d_min if args.d_min is not None else 0.25 * model.sigma
    hi = args.d_max if args.d_max is not None else 2.0 * model.sigma
    if not 0.0 < lo < hi:
        raise ParameterError(f"need 0 < min < max for the sigma grid, got [{lo}, {hi}]")
    sigmas = np.linspace(lo, hi, args.points)
    rows = []
    for s in sigmas:
        m = replace(model, sigma=float(s))
        b1 = float(Boundary(m, sc.rho, 1.0, sc.q0).eval(np.asarray(sc.d)) - sc.d)
        b8 = float(Boundary(m, sc.rho, 8.0, sc.q0).eval(np.asarray(sc.d)) - sc.d)
        rows.append((float(s), b1, b8, b8 - b1))
    _emit_table(["sigma", "bias_h1", "bias_h8", "gap"], rows, cfg.outputs)
    return 0


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------


def _sim_grid(cfg) -> TimeGrid:
    grid = cfg.grid
    if cfg.mc.horizon is not None:
        n = int(round(cfg.mc.horizon / grid.dt))
        if n < 1:
            raise ParameterError(
                f"horizon {cfg.mc.horizon} shorter than one step dt={grid.dt}"
            )
        grid = TimeGrid(t0=0.0, dt=grid.dt, n_steps=n)
    return grid


def _cmd_simulate(args) -> int:
    cfg = _load_config(args)
    sc = cfg.scenario
    grid = _sim_grid(cfg)
    bound = Boundary(sc.model, sc.rho, sc.h, sc.q0)
    rule = _base_rule(sc, bound)

    # the config's n_paths is sized for Monte Carlo estimates; trajectory
    # output is one path unless --paths says otherwise
    n_paths = args.paths if args.paths is not None else 1
    if n_paths == 1:
        path = sample_path(sc.model, sc.d, grid, cfg.mc.seed, max_refine="bridge")
        traj = simulate(sc, rule, path)
        t = grid.times()
        rows = [
            (
                float(t[i]),
                float(traj.demand[i]),
                float(traj.committed[i]),
                float(traj.installed[i]),
                float(traj.investment_increments[i]),
                float(traj.price[i]),
            )
            for i in range(len(t))
        ]
        _emit_table(["t", "D", "C", "K", "dI", "p"], rows, cfg.outputs)
        return 0

    vals, rmax = sample_paths(
        sc.model, sc.d, grid, cfg.mc.seed, n_paths, max_refine="bridge"
    )
    lag = lag_steps(grid, sc.h)
    c0 = sc.committed_start
    committed = np.maximum.accumulate(np.maximum(c0, rule(rmax)), axis=1)
    increments = np.empty_like(committed)
    increments[:, 0] = committed[:, 0] - c0
    increments[:, 1:] = np.diff(committed, axis=1)
    t = grid.times()
    installed = np.empty_like(committed)
    # nothing ordered on the grid arrives before node `lag`; with a horizon
    # shorter than the lag the pipeline levels cover the whole window
    cut = min(lag, committed.shape[1])
    installed[:, :cut] = pipeline_levels(sc.k, sc.pipeline, sc.h, t[:cut])
    if committed.shape[1] > lag:
        installed[:, lag:] = committed[:, : committed.shape[1] - lag]
    price = sc.eta + sc.theta * (vals - installed)

    q = lambda a, p: np.quantile(a, p, axis=0)
    header = [
        "t",
        "d_mean", "d_q05", "d_q50", "d_q95",
        "c_mean", "c_q05", "c_q95",
        "k_mean", "k_q05", "k_q95",
        "di_mean", "p_mean",
    ]
    cols = [
        t,
        vals.mean(axis=0), q(vals, 0.05), q(vals, 0.5), q(vals, 0.95),
        committed.mean(axis=0), q(committed, 0.05), q(committed, 0.95),
        installed.mean(axis=0), q(installed, 0.05), q(installed, 0.95),
        increments.mean(axis=0), price.mean(axis=0),
    ]
    rows = [tuple(float(c[i]) for c in cols) for i in range(len(t))]
    _emit_table(header, rows, cfg.outputs)
    return 0


# ---------------------------------------------------------------------------
# cost
# ---------------------------------------------------------------------------


def _parse_policy(text: str) -> PolicySpec:
    if text == "optimal":
        return PolicySpec.optimal()
    for prefix, ctor in (("shift=", PolicySpec.shifted), ("const=", PolicySpec.constant)):
        if text.startswith(prefix):
            try:
                return ctor(float(text[len(prefix):]))
            except ValueError as exc:
                raise ParameterError(f"bad policy value in {text!r}: {exc}") from exc
    raise ParameterError(f"policy must be 'optimal', 'shift=X' or 'const=X', got {text!r}")


def _cmd_cost(args) -> int:
    cfg = _load_config(args)
    policy = _parse_policy(args.policy)
    est = estimate_F(
        cfg.scenario,
        policy=policy,
        horizon=cfg.mc.horizon,
        n_paths=cfg.mc.n_paths,
        seed=cfg.mc.seed,
        tail_check=args.tail_check,
    )
    small = est.tail_bound <= 0.01 * abs(est.mean)
    report = {
        "estimate": est.mean,
        "se": est.std_error,
        "n_paths": est.n_paths,
        "horizon": est.horizon,
        "tail_bound": est.tail_bound,
        "policy": args.policy,
        "verdict": "ok" if small else "tail-above-1pct",
    }
    _emit_json(report, cfg.outputs)
    return 0


# ---------------------------------------------------------------------------
# statics
# ---------------------------------------------------------------------------


def _cmd_statics(args) -> int:
    cfg = _load_config(args)
    sc = cfg.scenario
    header = ["quantity", "wrt", "value", "kind", "verdict"]
    rows: list[tuple] = []
    if isinstance(sc.model, GBM):
        for e, verdict in gbm_statics_table(sc.model.mu, sc.model.sigma, sc.rho, sc.h):
            kind = "partial" if (e.quantity, e.wrt) == ("c_hat", "q0") else "elasticity"
            rows.append((e.quantity, e.wrt, e.value, kind, verdict))
    elif isinstance(sc.model, ABM):
        p = abm_partials(sc.model.mu, sc.model.sigma, sc.rho, sc.h, sc.q0)
        sign_mu = "ok" if p.d_mu > 0 else "violated"
        sign_sigma = "ok" if p.d_sigma < 0 else "violated"
        rows = [
            ("c_hat", "mu", p.d_mu, "partial", sign_mu),
            ("c_hat", "sigma", p.d_sigma, "partial", sign_sigma),
            ("c_hat", "h", p.d_h, "partial", "ambiguous"),
            ("c_hat", "rho", p.d_rho, "partial", "ambiguous"),
            ("c_hat", "h*sigma", p.cross_h_sigma, "cross-partial",
             "ok" if p.cross_h_sigma == 0.0 else "violated"),
        ]
    elif isinstance(sc.model, CIR):
        model = sc.model
        one = np.asarray(1.0)
        zero = np.asarray(0.0)
        t_slope = float(cir_tangent(model, sc.rho, sc.h, sc.q0, one) - cir_tangent(model, sc.rho, sc.h, sc.q0, zero))
        t_int = float(cir_tangent(model, sc.rho, sc.h, sc.q0, zero))
        a_slope = float(cir_asymptote(model, sc.rho, sc.h, sc.q0, one) - cir_asymptote(model, sc.rho, sc.h, sc.q0, zero))
        a_int = float(cir_asymptote(model, sc.rho, sc.h, sc.q0, zero))
        kd, kc = cir_kink(model, sc.rho, sc.h, sc.q0)
        rows = [
            ("tangent", "slope", t_slope, "geometry", "n/a"),
            ("tangent", "intercept", t_int, "geometry", "n/a"),
            ("asymptote", "slope", a_slope, "geometry", "n/a"),
            ("asymptote", "intercept", a_int, "geometry", "n/a"),
            ("kink", "d", kd, "geometry", "n/a"),
            ("kink", "c_hat", kc, "geometry", "n/a"),
        ]
    _emit_table(header, rows, cfg.outputs)
    return 0


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

_EQ_HORIZON = {ABM: 100.0, GBM: 200.0, CIR: 150.0}


def _cmd_verify(args) -> int:
    cfg = _load_config(args)
    sc = cfg.scenario
    mc = cfg.mc
    scale = args.debug_scale_boundary
    checks = []

    checks.append(_check_oracle(sc))
    checks.append(_check_identity(sc, mc, scale))
    checks.append(_check_dominance(sc, mc, scale))
    checks.append(_check_equilibrium(sc, mc, scale))
    checks.append(_check_sensitivities(sc))

    passed = all(c["status"] == "PASS" for c in checks)
    report = {
        "scenario": args.scenario or args.config or "gbm-growth",
        "debug_scale_boundary": scale,
        "checks": checks,
        "passed": passed,
    }
    _emit_json(report, cfg.outputs)
    return 0 if passed else 4


def _check_oracle(sc) -> dict:
    bound = Boundary(sc.model, sc.rho, sc.h, sc.q0)
    points = [0.5 * sc.d, sc.d, 2.0 * sc.d]
    if isinstance(sc.model, CIR):
        points.append(sc.model.delta)
    worst = 0.0
    for d in points:
        closed = float(bound.eval(np.asarray(d)))
        oracle = generic_boundary(sc.model, sc.rho, sc.h, sc.q0, d)
        worst = max(worst, abs(closed - oracle) / max(1.0, abs(oracle)))
    return {
        "name": "boundary-oracle",
        "status": "PASS" if worst <= 1e-5 else "FAIL",
        "max_rel_err": worst,
        "points": [float(p) for p in points],
    }


def _check_identity(sc, mc, scale) -> dict:
    rep = identity_check(
        sc, n_paths=mc.n_paths, seed=mc.seed, rule_scale=scale
    )
    return {
        "name": "cost-identity",
        "status": "PASS" if rep.passed else "FAIL",
        "f": rep.f.mean,
        "g_plus_j": rep.gj.mean,
        "gap": rep.f.mean - rep.gj.mean,
        "tolerance": rep.tolerance,
    }


def _check_dominance(sc, mc, scale) -> dict:
    if isinstance(sc.model, ABM):
        offsets = [-300.0, -100.0, 0.0, 100.0, 300.0]
    else:
        ref = abs(float(Boundary(sc.model, sc.rho, sc.h, sc.q0).eval(np.asarray(sc.d))))
        unit = max(ref, 1.0)
        offsets = [f * unit for f in (-0.15, -0.05, 0.0, 0.05, 0.15)]
    horizon = mc.horizon if mc.horizon is not None else 150.0
    rep = dominance_test(
        sc, offsets, horizon=horizon, n_paths=mc.n_paths, seed=mc.seed, rule_scale=scale
    )
    return {
        "name": "dominance",
        "status": "PASS" if rep.passed else "FAIL",
        "offsets": offsets,
        "deltas": [r.delta for r in rep.rows],
        "paired_se": [r.paired_se for r in rep.rows],
    }


def _check_equilibrium(sc, mc, scale) -> dict:
    default = _EQ_HORIZON[type(sc.model)]
    horizon = mc.horizon if mc.horizon is not None else default
    rep = equilibrium_check(
        sc, horizon=horizon, n_paths=mc.n_paths, seed=mc.seed, rule_scale=scale
    )
    return {
        "name": "equilibrium",
        "status": "PASS" if rep.passed else "FAIL",
        "mode": rep.mode,
        "revenue": rep.revenue,
        "se": rep.std_error,
        "q0": rep.q0,
    }


def _check_sensitivities(sc) -> dict:
    """Closed-form sensitivities against central finite differences, or the
    small/large-demand geometry for the square-root model."""
    entries = []
    if isinstance(sc.model, GBM):
        mu, sigma, rho, h = sc.model.mu, sc.model.sigma, sc.rho, sc.h

        def A_of(**kw):
            p = dict(mu=mu, sigma=sigma, rho=rho, h=h)
            p.update(kw)
            return gbm_constants(p["mu"], p["sigma"], p["rho"], p["h"])[1]

        def bs_of(**kw):
            p = dict(mu=mu, sigma=sigma, rho=rho, h=h)
            p.update(kw)
            b = Boundary(GBM(p["mu"], p["sigma"]), p["rho"], p["h"], sc.q0)
            return b.decompose(sc.d).precautionary_bias

        for quantity, base in (("A", A_of), ("b_sigma", bs_of)):
            for wrt in ("h", "sigma", "mu", "rho"):
                x0 = dict(h=h, sigma=sigma, mu=mu, rho=rho)[wrt]
                el = gbm_elasticity(quantity, wrt, mu, sigma, rho, h).value
                deriv = el * base() / x0
                rep = finite_diff_check(
                    lambda x, w=wrt: base(**{w: x}), x0, deriv, rel_step=1e-6
                )
                entries.append((f"{quantity}/{wrt}", rep.passed, rep.abs_err))
        dq = gbm_elasticity("c_hat", "q0", mu, sigma, rho, h).value
        rep = finite_diff_check(
            lambda q: float(Boundary(sc.model, rho, h, q).eval(np.asarray(sc.d))),
            sc.q0, dq, rel_step=1e-6,
        )
        entries.append(("c_hat/q0", rep.passed, rep.abs_err))
    elif isinstance(sc.model, ABM):
        mu, sigma, rho, h, q0 = sc.model.mu, sc.model.sigma, sc.rho, sc.h, sc.q0
        parts = abm_partials(mu, sigma, rho, h, q0)

        def chat(**kw):
            p = dict(mu=mu, sigma=sigma, rho=rho, h=h, q0=q0)
            p.update(kw)
            b = Boundary(ABM(p["mu"], p["sigma"]), p["rho"], p["h"], p["q0"])
            return float(b.eval(np.asarray(sc.d)))

        for wrt, val in (
            ("mu", parts.d_mu),
            ("sigma", parts.d_sigma),
            ("h", parts.d_h),
            ("rho", parts.d_rho),
        ):
            x0 = dict(mu=mu, sigma=sigma, rho=rho, h=h)[wrt]
            rep = finite_diff_check(
                lambda x, w=wrt: chat(**{w: x}), x0, val, rel_step=1e-7
            )
            entries.append((f"c_hat/{wrt}", rep.passed, rep.abs_err))
        rep = finite_diff_check(
            lambda hh: abm_partials(mu, sigma, rho, hh, q0).d_sigma,
            h, parts.cross_h_sigma, rel_step=1e-6,
        )
        entries.append(("c_hat/h*sigma", rep.passed, rep.abs_err))
    else:
        model = sc.model
        bound = Boundary(model, sc.rho, sc.h, sc.q0)
        dl = model.delta
        tol = 1e-3 * dl
        near = 1e-4 * dl
        far = 1e3 * dl
        gap_t = abs(
            float(bound.eval(np.asarray(near)) - cir_tangent(model, sc.rho, sc.h, sc.q0, near))
        )
        gap_a = abs(
            float(bound.eval(np.asarray(far)) - cir_asymptote(model, sc.rho, sc.h, sc.q0, far))
        )
        kd, kc = cir_kink(model, sc.rho, sc.h, sc.q0)
        cross = abs(
            float(
                cir_tangent(model, sc.rho, sc.h, sc.q0, kd)
                - cir_asymptote(model, sc.rho, sc.h, sc.q0, kd)
            )
        )
        entries = [
            ("tangent-at-origin", gap_t <= tol, gap_t),
            ("asymptote-at-infinity", gap_a <= tol, gap_a),
            ("kink-on-both-lines", cross <= 1e-9 * max(1.0, abs(kc)), cross),
        ]
    return {
        "name": "sensitivities",
        "status": "PASS" if all(ok for _, ok, _ in entries) else "FAIL",
        "entries": [
            {"name": n, "status": "PASS" if ok else "FAIL", "abs_err": e}
            for n, ok, e in entries
        ],
    }


if __name__ == "__main__":
    sys.exit(main())

"""Command line interface.

Exit status: 0 on success, 1 when a validation or threshold check fails,
2 on usage or runtime errors.
"""

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import analysis
from .errors import TriodFlowError
from .flow import FlowState, evolve
from .functionals import has_junction
from .junction import compatibility_report
from .scenarios import ScenarioConfig, build_scenario, read_series, write_series, write_snapshot

log = logging.getLogger("triodflow")


def _common(p):
    p.add_argument("--config", type=Path, help="scenario JSON file")
    p.add_argument("--out", type=Path, help="output directory (overrides the scenario's)")
    p.add_argument("--seed", type=int, help="random seed (overrides the scenario's)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="triodflow", description="Curvature flow of planar triods.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="evolve a scenario and write series.csv and snapshots")
    _common(p)

    p = sub.add_parser("validate", help="check compatibility conditions of the initial data")
    _common(p)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--strict", action="store_true", help="also fail on order-2 conditions")

    p = sub.add_parser("analyze", help="blow-up fit and Hamilton rescaling of a trajectory")
    _common(p)
    p.add_argument("--series", type=Path, help="analyze an existing series CSV (fit only)")

    p = sub.add_parser("steiner", help="flow toward the Steiner configuration and report distances")
    _common(p)
    p.add_argument("--hausdorff-tol", type=float, default=None)
    p.add_argument("--gap-tol", type=float, default=None)

    p = sub.add_parser("selfsimilar", help="generate a self-similar solution and its residual")
    _common(p)
    p.add_argument("--family", choices=("grim_reaper", "halflines", "circle"), default="grim_reaper")
    p.add_argument("--w", type=float, nargs=2, default=(1.0, 0.0), metavar=("WX", "WY"))
    p.add_argument("--ymax", type=float, default=1.3)
    p.add_argument("--n", type=int, default=257)
    p.add_argument("--tol", type=float, default=1e-3)
    return parser


def _load(args) -> ScenarioConfig:
    if args.config is None:
        raise TriodFlowError(f"{args.command} needs --config")
    cfg = ScenarioConfig.load(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out is not None:
        cfg.out = str(args.out)
    return cfg


def _outdir(cfg) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _run(cfg):
    state = cfg.build()
    traj = evolve(state, cfg.flow, cfg.probes)
    return state, traj


def cmd_run(args) -> int:
    cfg = _load(args)
    state, traj = _run(cfg)
    out = _outdir(cfg)
    write_series(traj, out / "series.csv")
    write_snapshot(state, out / "initial.json", cfg.family, cfg.seed)
    write_snapshot(traj.final, out / "final.json", cfg.family, cfg.seed)
    first, last = traj.records[0], traj.records[-1]
    print(f"family {cfg.family}: stopped at t={last.t:.6g} ({traj.stop_reason})")
    print(f"  length {first.L_total:.10g} -> {last.L_total:.10g}")
    print(f"  max|k| {first.k_max_abs:.4g} -> {last.k_max_abs:.4g}, E {first.E:.6g} -> {last.E:.6g}")
    print(f"  wrote {out / 'series.csv'}, {out / 'final.json'}")
    return 0


def cmd_validate(args) -> int:
    cfg = _load(args)
    state = cfg.build()
    if not has_junction(state):
        print("single curve: compatibility conditions concern triods only")
        return 0
    rep = compatibility_report(state.triod, tol=args.tol)
    for order, ok in (("0", rep.order0), ("1", rep.order1), ("2a", rep.order2a), ("2b", rep.order2b)):
        print(f"order {order}: {'pass' if ok else 'FAIL'}")
    for m in rep.messages:
        print(f"  {m}")
    failed = not (rep.order0 and rep.order1) or (args.strict and not rep.order2)
    return 1 if failed else 0


def cmd_analyze(args) -> int:
    if args.series is not None:
        data = read_series(args.series)
        t, k2 = data["t"], data["k_max_abs"] ** 2
        fit = analysis.estimate_blowup(t, k2)
        _print_fit(fit)
        return 0
    cfg = _load(args)
    cfg.flow = replace(cfg.flow, record_states=True)
    _, traj = _run(cfg)
    out = _outdir(cfg)
    write_series(traj, out / "series.csv")
    fit = analysis.estimate_blowup(traj.times, traj.series("k_max_abs") ** 2)
    _print_fit(fit)
    result = {
        "stop_reason": traj.stop_reason,
        "T_est": fit.T_est,
        "C_est": fit.C_est,
        "fit_residual": fit.residual,
        "classification": fit.classification.value,
        "trend": fit.trend,
        "hamilton": [],
    }
    if fit.classification != analysis.Classification.NO_BLOWUP:
        for n, snaps in analysis.hamilton_rescale(traj.states, fit.T_est):
            s = snaps[0]
            kmax = max(float(np.max(np.abs(k))) for k in analysis._state_curvature(s.geometry))
            result["hamilton"].append({"n": n, "factor": s.factor, "origin": list(s.origin), "max_abs_k": kmax})
            print(f"  hamilton n={n}: factor {s.factor:.4g}, rescaled max|k| {kmax:.4g}")
    (out / "analysis.json").write_text(json.dumps(result, indent=1) + "\n", encoding="utf-8")
    return 0


def _print_fit(fit):
    print(f"blow-up fit: {fit.classification.value}  T={fit.T_est:.6g}  C={fit.C_est:.6g}  residual={fit.residual:.3g}")


def cmd_steiner(args) -> int:
    cfg = _load(args)
    state, traj = _run(cfg)
    P = state.triod.endpoints
    S = analysis.steiner_point(*P)
    if S is None:
        print(f"no Steiner point: some angle of the triangle is >= 120 degrees (run stopped: {traj.stop_reason})")
        return 1
    h, gap = analysis.steiner_distance(traj.final, *P)
    out = _outdir(cfg)
    write_series(traj, out / "series.csv")
    write_snapshot(traj.final, out / "final.json", cfg.family, cfg.seed)
    print(f"Fermat point ({S[0]:.12g}, {S[1]:.12g}); junction ({traj.final.triod.junction[0]:.12g}, "
          f"{traj.final.triod.junction[1]:.12g})")
    print(f"hausdorff {h:.3e}  length_gap {gap:.3e}  at t={traj.final.t:.6g} ({traj.stop_reason})")
    ok = (args.hausdorff_tol is None or h < args.hausdorff_tol) and (args.gap_tol is None or abs(gap) < args.gap_tol)
    return 0 if ok else 1


def cmd_selfsimilar(args) -> int:
    if args.family == "grim_reaper":
        curve = analysis.grim_reaper(args.w, args.n, args.ymax)
        res = analysis.translator_residual(curve, args.w)
        print(f"grim reaper w=({args.w[0]:g}, {args.w[1]:g}) n={args.n} y_max={args.ymax:g}: translator residual {res:.3e}")
        geom = curve
    elif args.family == "halflines":
        geom = analysis.halfline_star(extent=args.ymax, n=args.n)
        res = analysis.shrinker_residual(geom)
        print(f"three halflines at 120 degrees: shrinker residual {res:.3e}")
    else:
        th = np.linspace(0.0, 2 * np.pi * (1 - 1 / args.n), args.n)
        from .geometry import DiscreteCurve

        geom = DiscreteCurve(np.column_stack((np.cos(th), np.sin(th))))
        res = analysis.shrinker_residual(geom)
        print(f"unit circle arc: shrinker residual {res:.3e}")
    if args.out is not None:
        write_snapshot(FlowState(geom), Path(args.out) / f"{args.family}.json", args.family, args.seed or 0)
    return 0 if res < args.tol else 1


COMMANDS = {
    "run": cmd_run,
    "validate": cmd_validate,
    "analyze": cmd_analyze,
    "steiner": cmd_steiner,
    "selfsimilar": cmd_selfsimilar,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return COMMANDS[args.command](args)
    except (TriodFlowError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

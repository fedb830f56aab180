"""Command-line entry point.

Subcommands: gains, feasible, plan, simulate. Exit codes: 0 success,
2 configuration/usage error, 3 planner failure. DRAGPLAN_OUT overrides
the default output directory.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path


from .orbital import DEFAULT_CUBESAT, WGS84, orbital_period
from .environment import DEFAULT_ATMOSPHERE, reference_drag_accel
from .relative import FormationState, RelativePairState, compute_gains, feasible_raan, spherical_distance
from .planner import FormationTarget, PlanConfig, PlanningError, plan
from .scenario import ScenarioError, load_scenario
from .mpc import run_closed_loop
from .report import write_report

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PLANNER = 3


def _gains_for(alt_km: float, inc_deg: float):
    a = WGS84.r_eq + alt_km * 1e3
    inc = math.radians(inc_deg)
    d_ref = reference_drag_accel(a, inc, DEFAULT_CUBESAT, DEFAULT_ATMOSPHERE, WGS84)
    return compute_gains(a, inc, d_ref, WGS84), a, inc


def _cmd_gains(args) -> int:
    g, _, _ = _gains_for(args.alt_km, args.inc_deg)
    print(json.dumps({
        "k1": g.k1,
        "k2": g.k2,
        "k3": g.k3,
        "k4": g.k4,
        "deg_raan_per_rev": g.deg_raan_per_rev,
    }, indent=2))
    return EXIT_OK


def _cmd_feasible(args) -> int:
    g, a, inc = _gains_for(args.alt_km, args.inc_deg)
    d_theta = math.radians(args.dtheta_deg)
    ladder = []
    for ell in range(-args.ell_range, args.ell_range + 1):
        d_raan = feasible_raan(d_theta, ell, g)
        ladder.append({
            "ell": ell,
            "d_raan_deg": math.degrees(d_raan),
            "spherical_distance_km": spherical_distance(d_theta, d_raan, inc, a) / 1e3,
        })
    print(json.dumps({"alt_km": args.alt_km, "inc_deg": args.inc_deg,
                      "dtheta_deg": args.dtheta_deg, "ladder": ladder}, indent=2))
    return EXIT_OK


def _out_dir(args) -> Path:
    if args.out is not None:
        return Path(args.out)
    return Path(os.environ.get("DRAGPLAN_OUT", "out"))


def _cmd_plan(args) -> int:
    cfg = load_scenario(args.config)
    a0 = cfg.constants.r_eq + cfg.deployment.altitude_km * 1e3
    inc = math.radians(cfg.deployment.i_deg)
    d_ref = reference_drag_accel(a0, inc, cfg.spacecraft, cfg.atmosphere, cfg.constants)
    gains = compute_gains(a0, inc, d_ref, cfg.constants)
    x0 = FormationState(
        chief_id=0,
        deputies=tuple(RelativePairState(0.0, 0.0) for _ in range(cfg.n_sats - 1)),
    )
    target = FormationTarget(
        d_theta_f=tuple(math.radians(v) for v in cfg.target_d_theta_f_deg),
        ell=tuple(cfg.target_ell),
    )
    plan_cfg = PlanConfig(
        n_stages=cfg.mpc.total_horizon_orbits,
        dt=orbital_period(a0, cfg.constants),
        d_a_min=cfg.plan.d_a_min_km * 1e3,
        d_a_max=cfg.plan.d_a_max_km * 1e3,
        u_min=cfg.plan.u_min,
        u_max=cfg.plan.u_max,
        w_theta=cfg.plan.w_theta,
        w_u=cfg.plan.w_u,
    )
    sol = plan(x0, target, plan_cfg, gains)

    out = _out_dir(args)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "plan_controls.csv", "w") as f:
        f.write("stage,sat_id,u\n")
        for i in range(sol.u.shape[0]):
            for q in range(sol.u.shape[1]):
                f.write(f"{i + 1},{q + 1},{float(sol.u[i, q])!r}\n")
    with open(out / "plan_predicted.csv", "w") as f:
        f.write("stage,pair,d_theta_deg,d_a_m\n")
        for i in range(sol.d_theta.shape[0]):
            for p in range(sol.d_theta.shape[1]):
                f.write(f"{i + 1},1-{p + 2},{math.degrees(sol.d_theta[i, p])!r},"
                        f"{float(sol.d_a[i, p])!r}\n")
    print(f"plan written to {out} (objective {sol.objective:.6f}, "
          f"{sol.u.shape[0]} stages, {sol.u.shape[1]} satellites)")
    return EXIT_OK


def _cmd_simulate(args) -> int:
    cfg = load_scenario(args.config)
    report = run_closed_loop(cfg)
    out = _out_dir(args)
    report = write_report(report, out)
    print(f"report written to {out}")
    for p in report.pairs:
        print(f"  pair {p.pair}: d_theta_f {p.d_theta_f_deg:+.3f} deg, "
              f"d_raan_f {p.d_raan_f_deg:+.3f} deg, "
              f"distance {p.spherical_distance_km:.2f} km")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dragplan",
        description="Differential-drag formation maneuver planning and simulation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_gains = sub.add_parser("gains", help="print linearization gains for a reference orbit")
    p_gains.add_argument("--alt-km", type=float, required=True)
    p_gains.add_argument("--inc-deg", type=float, required=True)
    p_gains.set_defaults(func=_cmd_gains)

    p_feas = sub.add_parser("feasible", help="print the ladder of reachable node separations")
    p_feas.add_argument("--alt-km", type=float, required=True)
    p_feas.add_argument("--inc-deg", type=float, required=True)
    p_feas.add_argument("--dtheta-deg", type=float, default=0.0)
    p_feas.add_argument("--ell-range", type=int, default=3)
    p_feas.set_defaults(func=_cmd_feasible)

    p_plan = sub.add_parser("plan", help="solve one open-loop maneuver plan from a scenario")
    p_plan.add_argument("--config", required=True)
    p_plan.add_argument("--out", default=None)
    p_plan.set_defaults(func=_cmd_plan)

    p_sim = sub.add_parser("simulate", help="run the closed-loop simulation for a scenario")
    p_sim.add_argument("--config", required=True)
    p_sim.add_argument("--out", default=None)
    p_sim.set_defaults(func=_cmd_simulate)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors, 0 on --help
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"dragplan: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PlanningError as exc:
        print(f"dragplan: planner failure: {exc}", file=sys.stderr)
        return EXIT_PLANNER


if __name__ == "__main__":
    sys.exit(main())

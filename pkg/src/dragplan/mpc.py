"""Shrinking-horizon closed-loop controller.

Each epoch: measure trailing-orbit mean relative states from the
nonlinear simulation, re-linearize the gains at the chief's current mean
altitude, re-solve the maneuver LP over the remaining horizon, and apply
the first block of controls. The horizon shrinks to a fixed final orbit
count, so the terminal constraints keep their meaning across replans.
"""
from __future__ import annotations

import math
import sys
from dataclasses import dataclass, replace

import numpy as np

from .orbital import (
    CartesianState,
    EarthConstants,
    OrbitalElements,
    SpacecraftParams,
    elements_to_cartesian,
    orbital_period,
    wrap_half_open,
)
from .environment import AtmosphereTable, AltitudeBelowTableError, reference_drag_accel
from .propagator import (
    ForceModel,
    MeanElements,
    SatelliteSimState,
    Trajectory,
    extract_mean,
    propagate_orbits,
)
from .relative import (
    FormationState,
    GainSet,
    RelativePairState,
    compute_gains,
    relative_state,
    spherical_distance,
)
from .planner import FormationTarget, PlanConfig, PlanSolution, PlanningError, plan
from .scenario import ScenarioConfig
from .report import EpochRecord, PairResult, SimulationReport, TrajectoryStore
from . import __version__

# Within this many remaining stages the terminal tracking weight is
# boosted to force convergence of the along-track error.
ENDGAME_STAGES = 10
ENDGAME_BOOST = 10.0


@dataclass(frozen=True)
class MpcConfig:
    """Replan cadence and total horizon, both in chief orbits."""
    replan_interval_orbits: int
    total_horizon_orbits: int
    relinearize: bool = True

    def __post_init__(self) -> None:
        if self.replan_interval_orbits < 1:
            raise ValueError("replan interval must be >= 1 orbit")
        if self.replan_interval_orbits > self.total_horizon_orbits:
            raise ValueError("replan interval cannot exceed the total horizon")


@dataclass(frozen=True)
class ControllerState:
    """Progress through the horizon plus the last successful plan.

    plan_consumed counts the stages of last_plan already handed out, so a
    planner failure can fall back to executing the stale schedule from
    where it left off.
    """
    orbits_elapsed: int
    remaining_horizon: int
    last_plan: PlanSolution | None
    gains: GainSet
    plan_failures: int = 0
    plan_consumed: int = 0

    def __post_init__(self) -> None:
        if self.remaining_horizon < 0:
            raise ValueError("remaining horizon must be non-negative")


@dataclass(frozen=True)
class MpcContext:
    """Everything control_epoch needs besides the evolving state."""
    target: FormationTarget
    mpc: MpcConfig
    d_a_min: float
    d_a_max: float
    u_min: float
    u_max: float
    w_theta: float
    w_u: float
    spacecraft: SpacecraftParams
    atmosphere: AtmosphereTable
    constants: EarthConstants


def relinearized_gains(
    a_ref: float,
    i_ref: float,
    ctx: MpcContext,
) -> GainSet:
    """Gains at the current chief mean orbit, with the max-drag reference
    acceleration refreshed from the environment model."""
    d_ref = reference_drag_accel(a_ref, i_ref, ctx.spacecraft, ctx.atmosphere, ctx.constants)
    return compute_gains(a_ref, i_ref, d_ref, ctx.constants)


def control_epoch(
    measured: FormationState,
    ctl: ControllerState,
    ctx: MpcContext,
    chief_a_mean: float,
    chief_inc: float,
) -> tuple[np.ndarray, ControllerState]:
    """Plan over the remaining horizon and return the next control block.

    Returns (u_blocks, new_state) where u_blocks has shape (K_eff, n_sats)
    and K_eff = min(replan interval, remaining - 1). On planner failure
    the previous block is held (fail-operational) and the failure counted.
    """
    if ctl.remaining_horizon < 2:
        raise ValueError(
            f"remaining horizon {ctl.remaining_horizon} too short to plan (need >= 2)"
        )
    gains = (
        relinearized_gains(chief_a_mean, chief_inc, ctx)
        if ctx.mpc.relinearize
        else ctl.gains
    )
    n_stages = ctl.remaining_horizon
    boost = ENDGAME_BOOST if n_stages < ENDGAME_STAGES else 1.0
    cfg = PlanConfig(
        n_stages=n_stages,
        dt=orbital_period(chief_a_mean, ctx.constants),
        d_a_min=ctx.d_a_min,
        d_a_max=ctx.d_a_max,
        u_min=ctx.u_min,
        u_max=ctx.u_max,
        w_theta=ctx.w_theta,
        w_u=ctx.w_u,
        w_theta_terminal=ctx.w_theta * boost,
    )
    k_eff = min(ctx.mpc.replan_interval_orbits, n_stages - 1)
    n_sats = measured.n_pairs + 1

    try:
        sol = plan(measured, ctx.target, cfg, gains)
        blocks = sol.u[:k_eff].copy()
        new_ctl = ControllerState(
            orbits_elapsed=ctl.orbits_elapsed,
            remaining_horizon=ctl.remaining_horizon,
            last_plan=sol,
            gains=gains,
            plan_failures=ctl.plan_failures,
            plan_consumed=k_eff,
        )
    except PlanningError as exc:
        # fail-operational: keep flying the stale schedule from where it
        # left off (minimum drag if there never was one)
        if ctl.last_plan is not None:
            stale = ctl.last_plan.u
            rows = [
                stale[min(ctl.plan_consumed + k, stale.shape[0] - 1)]
                for k in range(k_eff)
            ]
            blocks = np.array(rows)
        else:
            blocks = np.full((k_eff, n_sats), ctx.u_min)
        print(f"dragplan: planner failed ({exc}); holding previous controls", file=sys.stderr)
        new_ctl = ControllerState(
            orbits_elapsed=ctl.orbits_elapsed,
            remaining_horizon=ctl.remaining_horizon,
            last_plan=ctl.last_plan,
            gains=gains,
            plan_failures=ctl.plan_failures + 1,
            plan_consumed=ctl.plan_consumed + k_eff,
        )
    return blocks, new_ctl


def _initial_states(cfg: ScenarioConfig) -> list[SatelliteSimState]:
    dep = cfg.deployment
    oe = OrbitalElements(
        a=cfg.constants.r_eq + dep.altitude_km * 1e3,
        e=dep.e,
        i=math.radians(dep.i_deg),
        raan=math.radians(dep.raan_deg),
        argp=math.radians(dep.aol_deg),
        nu=0.0,
    )
    cart = elements_to_cartesian(oe, cfg.constants)
    return [
        SatelliteSimState(cart=cart, t=0.0, theta_cum=oe.theta, raan_cum=oe.raan, u_applied=0.0)
        for _ in range(cfg.n_sats)
    ]


def _measure(
    traj: Trajectory,
    c: EarthConstants,
) -> tuple[FormationState, list[MeanElements]]:
    """Common-window trailing-orbit means for every satellite."""
    window = orbital_period(float(traj.sats[0].a[-1]), c)
    means = [extract_mean(traj, q, c, window=window) for q in range(len(traj.sats))]
    pairs = tuple(relative_state(means[0], means[q]) for q in range(1, len(means)))
    return FormationState(chief_id=0, deputies=pairs), means


def run_closed_loop(cfg: ScenarioConfig) -> SimulationReport:
    """Alternate propagation and replanning until the horizon is spent.

    Returns the pair-results report; the decimated trajectories and
    per-epoch series ride along for file emission. Aborts with a partial
    report if any satellite decays below the atmosphere floor.
    """
    constants = cfg.constants
    spacecraft = cfg.spacecraft
    atmosphere = cfg.atmosphere
    models = ForceModel(
        constants=constants,
        max_degree=cfg.sim.max_degree,
        spacecraft=spacecraft,
        atmosphere=atmosphere,
    )
    mpc_cfg = MpcConfig(
        replan_interval_orbits=cfg.mpc.replan_interval_orbits,
        total_horizon_orbits=cfg.mpc.total_horizon_orbits,
        relinearize=cfg.mpc.relinearize,
    )
    target = FormationTarget(
        d_theta_f=tuple(math.radians(v) for v in cfg.target_d_theta_f_deg),
        ell=tuple(cfg.target_ell),
    )
    ctx = MpcContext(
        target=target,
        mpc=mpc_cfg,
        d_a_min=cfg.plan.d_a_min_km * 1e3,
        d_a_max=cfg.plan.d_a_max_km * 1e3,
        u_min=cfg.plan.u_min,
        u_max=cfg.plan.u_max,
        w_theta=cfg.plan.w_theta,
        w_u=cfg.plan.w_u,
        spacecraft=spacecraft,
        atmosphere=atmosphere,
        constants=constants,
    )

    states = _initial_states(cfg)
    n_sats = cfg.n_sats
    a0 = constants.r_eq + cfg.deployment.altitude_km * 1e3
    i0 = math.radians(cfg.deployment.i_deg)
    gains0 = relinearized_gains(a0, i0, ctx)
    ctl = ControllerState(
        orbits_elapsed=0,
        remaining_horizon=mpc_cfg.total_horizon_orbits,
        last_plan=None,
        gains=gains0,
    )

    # deployment is identical across satellites, so the first measurement
    # is exactly zero without a warm-up orbit
    measured = FormationState(
        chief_id=0,
        deputies=tuple(RelativePairState(0.0, 0.0) for _ in range(n_sats - 1)),
    )
    chief_a_mean = a0
    chief_inc = i0

    store = TrajectoryStore.empty(n_sats, cfg.sim.sample_every)
    epoch_records: list[EpochRecord] = []
    means: list[MeanElements] = []
    traj: Trajectory | None = None
    aborted = False
    epoch = 0

    while ctl.remaining_horizon >= 2:
        blocks, ctl = control_epoch(measured, ctl, ctx, chief_a_mean, chief_inc)
        try:
            traj = propagate_orbits(states, blocks, models, cfg.sim.dt_s)
        except AltitudeBelowTableError as exc:
            if traj is None:
                raise  # decayed before any epoch completed: nothing to report
            print(f"dragplan: aborting, {exc}", file=sys.stderr)
            aborted = True
            break
        states = traj.final_states()
        store.append_block(traj)

        measured, means = _measure(traj, constants)
        chief_a_mean = means[0].a_mean
        chief_inc = float(traj.sats[0].inc[-1])
        k_applied = blocks.shape[0]
        ctl = replace(
            ctl,
            orbits_elapsed=ctl.orbits_elapsed + k_applied,
            remaining_horizon=ctl.remaining_horizon - k_applied,
        )
        epoch += 1
        t_now = states[0].t
        epoch_records.append(EpochRecord(
            t_s=t_now,
            orbits_elapsed=ctl.orbits_elapsed,
            u=tuple(float(v) for v in blocks[-1]),
            alt_km=tuple((m.a_mean - constants.r_eq) / 1e3 for m in means),
            d_theta_deg=tuple(math.degrees(p.d_theta) for p in measured.deputies),
            d_raan_deg=tuple(
                math.degrees(means[q + 1].raan_mean - means[0].raan_mean)
                for q in range(n_sats - 1)
            ),
            d_a_m=tuple(p.d_a for p in measured.deputies),
        ))
        print(
            f"dragplan: epoch {epoch} orbits {ctl.orbits_elapsed}/{mpc_cfg.total_horizon_orbits} "
            + " ".join(
                f"pair{q + 1}: dth={math.degrees(p.d_theta):.3f}deg da={p.d_a:.0f}m"
                for q, p in enumerate(measured.deputies)
            ),
            file=sys.stderr,
        )

    if traj is None:
        raise RuntimeError("horizon too short: no propagation performed")

    t_final = states[0].t
    pairs = []
    for q in range(1, n_sats):
        d_theta = means[q].theta_mean_cum - means[0].theta_mean_cum
        d_raan = means[q].raan_mean - means[0].raan_mean
        dist = spherical_distance(
            d_theta, d_raan, chief_inc, means[0].a_mean,
        )
        pairs.append(PairResult(
            pair=f"1-{q + 1}",
            t_f_months=t_final / (30.44 * 86400.0),
            d_theta_f_deg=math.degrees(wrap_half_open(d_theta)),
            d_raan_f_deg=math.degrees(d_raan),
            spherical_distance_km=dist / 1e3,
        ))

    chief_trk = traj.sats[0]
    tail = min(len(chief_trk.e), 50)
    final_orbit = {
        "altitude_km": (means[0].a_mean - constants.r_eq) / 1e3,
        "e": float(np.mean(chief_trk.e[-tail:])),
        "i_deg": math.degrees(float(np.mean(chief_trk.inc[-tail:]))),
    }

    return SimulationReport(
        code_version=__version__,
        config=cfg.to_dict(),
        pairs=pairs,
        final_chief_orbit=final_orbit,
        elapsed_s=t_final,
        orbits_completed=ctl.orbits_elapsed,
        epochs=epoch,
        plan_failures=ctl.plan_failures,
        aborted=aborted,
        trajectory_files=[],
        trajectories=store,
        epoch_records=epoch_records,
    )

"""Drag-maneuver trajectory optimization over the discrete pair dynamics.

Builds a bounds-constrained equality-form LP: variables are the stacked
relative states, per-satellite drag ratios, and L1 slack variables for
the along-track tracking cost; constraints are the pair dynamics, the
terminal same-altitude requirement, and per-stage altitude-difference
bounds. With L1 stage costs the optimal schedules are minimum-time
bang-bang profiles.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .orbital import TWO_PI
from .relative import DiscreteLinearModel, FormationState, GainSet, discretize
from . import lp as lp_mod


class PlanningError(RuntimeError):
    """Raised when the LP cannot be solved to optimality."""


@dataclass(frozen=True)
class FormationTarget:
    """Per-deputy final along-track targets.

    d_theta_f holds the wrapped part (|x| < 2*pi rad) and ell the whole
    revolutions; the total unwrapped target is d_theta_f + 2*pi*ell. The
    implied node separation always follows from the coupling ladder and
    is never specified independently.
    """
    d_theta_f: tuple[float, ...]    # rad, wrapped
    ell: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.d_theta_f) != len(self.ell):
            raise ValueError("d_theta_f and ell must have the same length")
        if not self.d_theta_f:
            raise ValueError("need at least one deputy target")
        for v in self.d_theta_f:
            if abs(v) >= TWO_PI:
                raise ValueError(f"wrapped target {v} must satisfy |x| < 2*pi")

    @property
    def totals(self) -> tuple[float, ...]:
        return tuple(v + TWO_PI * l for v, l in zip(self.d_theta_f, self.ell))


@dataclass(frozen=True)
class PlanConfig:
    """Horizon, stage duration, bounds, and cost weights for one plan."""
    n_stages: int       # state points; controls span n_stages - 1 stages
    dt: float           # stage duration, s (one chief orbital period)
    d_a_min: float      # m
    d_a_max: float      # m
    u_min: float
    u_max: float
    w_theta: float = 1.0
    w_u: float = 1.0
    w_theta_terminal: float | None = None   # defaults to w_theta

    def __post_init__(self) -> None:
        if self.n_stages < 2:
            raise ValueError(f"need at least 2 stages, got {self.n_stages}")
        if self.dt <= 0.0:
            raise ValueError(f"stage duration must be positive, got {self.dt}")
        if not (0.0 <= self.u_min < self.u_max <= 1.0):
            raise ValueError(
                f"drag bounds must satisfy 0 <= u_min < u_max <= 1, got "
                f"[{self.u_min}, {self.u_max}]"
            )
        if not self.d_a_min < 0.0 < self.d_a_max:
            raise ValueError(
                f"altitude-difference bounds must straddle zero, got "
                f"[{self.d_a_min}, {self.d_a_max}]"
            )
        if self.w_theta <= 0.0 or self.w_u < 0.0:
            raise ValueError("cost weights must be positive (w_theta) / non-negative (w_u)")

    @property
    def terminal_weight(self) -> float:
        return self.w_theta if self.w_theta_terminal is None else self.w_theta_terminal


@dataclass(frozen=True)
class LpLayout:
    """Column/row indexing of the planner LP (see build_lp)."""
    n_sats: int
    n_pairs: int
    n_states: int       # state points N
    n_controls: int     # control stages N-1
    off_controls: int
    off_slacks: int
    off_surplus: int

    def state(self, i: int, p: int, comp: int) -> int:
        return (i * self.n_pairs + p) * 2 + comp

    def control(self, i: int, q: int) -> int:
        return self.off_controls + i * self.n_sats + q

    def slack(self, i: int, p: int) -> int:
        return self.off_slacks + i * self.n_pairs + p


@dataclass(frozen=True)
class PlanSolution:
    """Decoded schedules and model-predicted relative states."""
    u: np.ndarray               # (N-1, n_sats) drag ratios
    d_theta: np.ndarray         # (N, n_pairs) predicted unwrapped rad
    d_a: np.ndarray             # (N, n_pairs) predicted m
    objective: float
    iterations: int
    dt: float

    @property
    def n_stages(self) -> int:
        return self.d_theta.shape[0]


def _layout(n_sats: int, n_states: int) -> LpLayout:
    n_pairs = n_sats - 1
    n_controls = n_states - 1
    off_controls = 2 * n_pairs * n_states
    off_slacks = off_controls + n_sats * n_controls
    off_surplus = off_slacks + n_pairs * n_states
    return LpLayout(
        n_sats=n_sats, n_pairs=n_pairs, n_states=n_states, n_controls=n_controls,
        off_controls=off_controls, off_slacks=off_slacks, off_surplus=off_surplus,
    )


def build_lp(
    x0: FormationState,
    target: FormationTarget,
    cfg: PlanConfig,
    model: DiscreteLinearModel,
) -> tuple[lp_mod.StandardLp, LpLayout]:
    """Assemble the trajectory-optimization LP.

    Columns: states [d_theta, d_a] per pair per stage, then controls per
    satellite per control stage, then tracking slacks per pair per stage,
    then the two surplus columns that fold each |d_theta - target| pair of
    inequalities into equality rows.

    Rows: pair dynamics (2 per pair per control stage), terminal d_a = 0
    (1 per pair), then 2 slack rows per pair per stage. Altitude-difference
    and drag limits are variable bounds, not rows.
    """
    if x0.n_pairs != len(target.ell):
        raise ValueError(
            f"state has {x0.n_pairs} deputies but target has {len(target.ell)}"
        )
    if abs(model.dt - cfg.dt) > 1e-9 * cfg.dt:
        raise ValueError(f"model dt {model.dt} does not match config dt {cfg.dt}")

    n_pairs = x0.n_pairs
    n_sats = n_pairs + 1
    n = cfg.n_stages
    lay = _layout(n_sats, n)
    num_vars = lay.off_surplus + 2 * n_pairs * n
    n_rows = 2 * n_pairs * lay.n_controls + n_pairs + 2 * n_pairs * n

    k1dt = model.ad[0][1]
    b_theta, b_a = model.bd
    totals = target.totals

    rows: list[int] = []
    cols: list[int] = []
    vals: list[float] = []
    b = np.zeros(n_rows)

    def add(r: int, ccol: int, v: float) -> None:
        rows.append(r)
        cols.append(ccol)
        vals.append(v)

    # dynamics: x_{i+1} = Ad x_i + Bd (u_i^dep - u_i^chief) per pair
    r = 0
    for i in range(lay.n_controls):
        for p in range(n_pairs):
            u_dep = lay.control(i, p + 1)
            u_chief = lay.control(i, 0)
            # theta row
            add(r, lay.state(i + 1, p, 0), 1.0)
            add(r, lay.state(i, p, 0), -1.0)
            add(r, lay.state(i, p, 1), -k1dt)
            add(r, u_dep, -b_theta)
            add(r, u_chief, b_theta)
            r += 1
            # altitude row
            add(r, lay.state(i + 1, p, 1), 1.0)
            add(r, lay.state(i, p, 1), -1.0)
            add(r, u_dep, -b_a)
            add(r, u_chief, b_a)
            r += 1

    # terminal same-altitude rows
    for p in range(n_pairs):
        add(r, lay.state(n - 1, p, 1), 1.0)
        r += 1

    # tracking slacks: s >= |d_theta - target| as two equality rows each
    w_idx = lay.off_surplus
    for i in range(n):
        for p in range(n_pairs):
            s_col = lay.slack(i, p)
            th_col = lay.state(i, p, 0)
            add(r, th_col, 1.0)
            add(r, s_col, -1.0)
            add(r, w_idx, 1.0)
            b[r] = totals[p]
            r += 1
            w_idx += 1
            add(r, th_col, -1.0)
            add(r, s_col, -1.0)
            add(r, w_idx, 1.0)
            b[r] = -totals[p]
            r += 1
            w_idx += 1

    lb = np.full(num_vars, -np.inf)
    ub = np.full(num_vars, np.inf)
    cvec = np.zeros(num_vars)

    for i in range(n):
        for p in range(n_pairs):
            lb[lay.state(i, p, 1)] = cfg.d_a_min
            ub[lay.state(i, p, 1)] = cfg.d_a_max
    # pin the initial state to the measurement
    for p, pair in enumerate(x0.deputies):
        lb[lay.state(0, p, 0)] = ub[lay.state(0, p, 0)] = pair.d_theta
        lb[lay.state(0, p, 1)] = ub[lay.state(0, p, 1)] = pair.d_a

    for i in range(lay.n_controls):
        for q in range(n_sats):
            col = lay.control(i, q)
            lb[col] = cfg.u_min
            ub[col] = cfg.u_max
            cvec[col] = cfg.w_u

    for i in range(n):
        w = cfg.terminal_weight if i == n - 1 else cfg.w_theta
        for p in range(n_pairs):
            col = lay.slack(i, p)
            lb[col] = 0.0
            cvec[col] = w
    lb[lay.off_surplus:] = 0.0

    lp = lp_mod.StandardLp(
        num_vars=num_vars,
        n_rows=n_rows,
        c=cvec,
        a_rows=np.asarray(rows, dtype=int),
        a_cols=np.asarray(cols, dtype=int),
        a_vals=np.asarray(vals, dtype=float),
        b=b,
        lb=lb,
        ub=ub,
    )
    return lp, lay


def simulate_schedule(
    x0: FormationState,
    u: np.ndarray,
    model: DiscreteLinearModel,
) -> tuple[np.ndarray, np.ndarray]:
    """Roll the discrete pair dynamics forward under a control schedule."""
    n_controls, n_sats = u.shape
    n_pairs = n_sats - 1
    n = n_controls + 1
    d_theta = np.empty((n, n_pairs))
    d_a = np.empty((n, n_pairs))
    for p, pair in enumerate(x0.deputies):
        d_theta[0, p] = pair.d_theta
        d_a[0, p] = pair.d_a
    k1dt = model.ad[0][1]
    b_theta, b_a = model.bd
    for i in range(n_controls):
        du = u[i, 1:] - u[i, 0]
        d_theta[i + 1] = d_theta[i] + k1dt * d_a[i] + b_theta * du
        d_a[i + 1] = d_a[i] + b_a * du
    return d_theta, d_a


def plan(
    x0: FormationState,
    target: FormationTarget,
    cfg: PlanConfig,
    gains: GainSet,
) -> PlanSolution:
    """Solve the maneuver LP and decode drag-ratio schedules.

    Predicted states are regenerated by rolling the discrete model under
    the decoded schedule, so they satisfy the dynamics exactly.
    """
    model = discretize(gains, cfg.dt)
    problem, lay = build_lp(x0, target, cfg, model)
    result = lp_mod.solve(problem)
    if result.status != lp_mod.STATUS_OPTIMAL:
        raise PlanningError(
            f"maneuver LP returned status '{result.status}' "
            f"(stages={cfg.n_stages}, pairs={x0.n_pairs}, iterations={result.iterations})"
        )

    u = np.empty((lay.n_controls, lay.n_sats))
    for i in range(lay.n_controls):
        for q in range(lay.n_sats):
            u[i, q] = result.x[lay.control(i, q)]
    np.clip(u, cfg.u_min, cfg.u_max, out=u)

    d_theta, d_a = simulate_schedule(x0, u, model)
    return PlanSolution(
        u=u,
        d_theta=d_theta,
        d_a=d_a,
        objective=float(result.objective),
        iterations=result.iterations,
        dt=cfg.dt,
    )

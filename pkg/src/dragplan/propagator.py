"""Nonlinear truth-model propagation of a satellite formation.

Fixed-step RK4 on the ECI state under zonal gravity and co-rotating
drag, with per-step bookkeeping of the unwrapped argument of latitude
and node angle that the controller consumes. Runs are deterministic:
fixed step, no adaptivity, no randomness.
"""
from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .orbital import (
    CartesianState,
    EarthConstants,
    SpacecraftParams,
    WGS84,
    TWO_PI,
    orbital_period,
)
from .environment import AtmosphereTable, AltitudeBelowTableError

# Hard floor on steps per orbit; large steps would also break the
# shortest-path angle unwrapping.
MIN_STEPS_PER_ORBIT = 50


class InsufficientWindowError(ValueError):
    """Raised when too few trailing samples exist for a one-orbit mean."""


class ScheduleGapError(ValueError):
    """Raised when a control schedule does not cover the requested span."""


@dataclass(frozen=True)
class ForceModel:
    """Force configuration for a propagation run.

    max_degree < 2 disables zonal terms (pure two-body); atmosphere or
    spacecraft set to None disables drag.
    """
    constants: EarthConstants = WGS84
    max_degree: int = 6
    spacecraft: SpacecraftParams | None = None
    atmosphere: AtmosphereTable | None = None

    @property
    def drag_enabled(self) -> bool:
        return self.spacecraft is not None and self.atmosphere is not None


@dataclass(frozen=True)
class SatelliteSimState:
    """One satellite's simulation state at an instant."""
    cart: CartesianState
    t: float            # s since epoch
    theta_cum: float    # unwrapped argument of latitude, rad
    raan_cum: float     # unwrapped node angle, rad
    u_applied: float    # drag ratio currently commanded


@dataclass(frozen=True)
class MeanElements:
    """Trailing-orbit averages with unwrapped angles."""
    a_mean: float           # m
    raan_mean: float        # rad, unwrapped
    theta_mean_cum: float   # rad, unwrapped
    window: float           # averaging span, s
    t: float                # window end epoch, s


@dataclass(frozen=True)
class SatTrack:
    """Per-satellite sampled series over one propagation."""
    pos: np.ndarray         # (S, 3) m
    vel: np.ndarray         # (S, 3) m/s
    a: np.ndarray           # (S,) osculating semi-major axis, m
    e: np.ndarray           # (S,) osculating eccentricity
    inc: np.ndarray         # (S,) osculating inclination, rad
    raan_cum: np.ndarray    # (S,) unwrapped node angle, rad
    theta_cum: np.ndarray   # (S,) unwrapped argument of latitude, rad
    u: np.ndarray           # (S,) applied drag ratio


@dataclass(frozen=True)
class Trajectory:
    """Uniformly sampled multi-satellite propagation output."""
    times: np.ndarray           # (S,) s, strictly increasing, uniform step
    sats: tuple[SatTrack, ...]

    def final_states(self) -> list[SatelliteSimState]:
        out = []
        t = float(self.times[-1])
        for trk in self.sats:
            out.append(SatelliteSimState(
                cart=CartesianState(r=tuple(trk.pos[-1]), v=tuple(trk.vel[-1])),
                t=t,
                theta_cum=float(trk.theta_cum[-1]),
                raan_cum=float(trk.raan_cum[-1]),
                u_applied=float(trk.u[-1]),
            ))
        return out


def make_accel(models: ForceModel) -> Callable[[float, float, float, float, float, float, float], tuple[float, float, float]]:
    """Build the acceleration closure a(x, y, z, vx, vy, vz, u).

    Everything the hot loop touches is bound to locals here: constants,
    trimmed zonal coefficients, atmosphere layer arrays, drag factor.
    """
    c = models.constants
    mu = c.mu
    r_eq = c.r_eq
    deg = models.max_degree if models.max_degree >= 2 else 0
    j_coeffs = tuple(c.j[: max(0, deg - 1)])
    drag_on = models.drag_enabled
    if drag_on:
        p = models.spacecraft
        atm = models.atmosphere
        bases = tuple(layer[0] for layer in atm.layers)
        rhos = tuple(layer[1] for layer in atm.layers)
        scales = tuple(layer[2] for layer in atm.layers)
        floor = bases[0]
        drag_factor = -0.5 * p.c_d * p.area_max / p.mass
        omega = c.omega_earth
    sqrt = math.sqrt
    exp = math.exp

    def accel(x: float, y: float, z: float, vx: float, vy: float, vz: float, u: float) -> tuple[float, float, float]:
        r2 = x * x + y * y + z * z
        r = sqrt(r2)
        ax = ay = az = 0.0

        if deg:
            s = z / r
            # Legendre recurrences for P_n(s) and P_n'(s), n up to deg
            p_nm2, p_nm1 = 1.0, s
            dp_nm2, dp_nm1 = 0.0, 1.0
            ratio = r_eq / r
            pow_ratio = ratio
            du_dr = -mu / r2
            du_ds = 0.0
            for n in range(2, deg + 1):
                pn = ((2 * n - 1) * s * p_nm1 - (n - 1) * p_nm2) / n
                dpn = dp_nm2 + (2 * n - 1) * p_nm1
                pow_ratio *= ratio
                jn = j_coeffs[n - 2]
                du_dr += mu / r2 * jn * (n + 1) * pow_ratio * pn
                du_ds -= mu / r * jn * pow_ratio * dpn
                p_nm2, p_nm1 = p_nm1, pn
                dp_nm2, dp_nm1 = dp_nm1, dpn
            radial = (du_dr - s * du_ds / r) / r
            ax = radial * x
            ay = radial * y
            az = radial * z + du_ds / r
        else:
            coeff = -mu / (r2 * r)
            ax = coeff * x
            ay = coeff * y
            az = coeff * z

        if drag_on and u > 0.0:
            h_km = (r - r_eq) * 1e-3
            idx = bisect_right(bases, h_km) - 1
            if idx < 0:
                raise AltitudeBelowTableError(
                    f"altitude {h_km:.1f} km fell below the atmosphere floor {floor} km"
                )
            rho = rhos[idx] * exp(-(h_km - bases[idx]) / scales[idx])
            rx = vx + omega * y
            ry = vy - omega * x
            v_rel = sqrt(rx * rx + ry * ry + vz * vz)
            cd = drag_factor * rho * u * v_rel
            ax += cd * rx
            ay += cd * ry
            az += cd * vz

        return (ax, ay, az)

    return accel


def _osc_geometry(x: float, y: float, z: float, vx: float, vy: float, vz: float, mu: float) -> tuple[float, float, float, float, float]:
    """Osculating (theta, raan, a, e, i) from an ECI state, two-body defs."""
    r = math.sqrt(x * x + y * y + z * z)
    v2 = vx * vx + vy * vy + vz * vz
    hx = y * vz - z * vy
    hy = z * vx - x * vz
    hz = x * vy - y * vx
    h = math.sqrt(hx * hx + hy * hy + hz * hz)
    a = -mu / (v2 - 2.0 * mu / r)
    inc = math.acos(min(1.0, max(-1.0, hz / h)))
    ex = (vy * hz - vz * hy) / mu - x / r
    ey = (vz * hx - vx * hz) / mu - y / r
    ez = (vx * hy - vy * hx) / mu - z / r
    ecc = math.sqrt(ex * ex + ey * ey + ez * ez)
    nx, ny = -hy, hx
    n = math.hypot(nx, ny)
    if n < 1e-12 * h:
        raan = 0.0
        theta = math.atan2(y if hz >= 0.0 else -y, x)
    else:
        raan = math.atan2(ny, nx)
        ct = (nx * x + ny * y) / (n * r)
        theta = math.acos(min(1.0, max(-1.0, ct)))
        if z < 0.0:
            theta = -theta
    return theta, raan, a, ecc, inc


def _angle_increment(new: float, old: float) -> float:
    """Shortest-path angle difference for unwrap accumulation."""
    d = math.fmod(new - old, TWO_PI)
    if d >= math.pi:
        d -= TWO_PI
    elif d < -math.pi:
        d += TWO_PI
    return d


class _SatRunner:
    """Mutable per-satellite integration state for the hot loop."""

    __slots__ = ("x", "y", "z", "vx", "vy", "vz", "theta_cum", "raan_cum",
                 "theta_raw", "raan_raw", "a", "e", "inc")

    def __init__(self, s: SatelliteSimState, mu: float) -> None:
        self.x, self.y, self.z = s.cart.r
        self.vx, self.vy, self.vz = s.cart.v
        theta, raan, a, e, inc = _osc_geometry(
            self.x, self.y, self.z, self.vx, self.vy, self.vz, mu)
        self.theta_raw = theta
        self.raan_raw = raan
        self.theta_cum = s.theta_cum
        self.raan_cum = s.raan_cum
        self.a = a
        self.e = e
        self.inc = inc

    def rk4(self, dt: float, u: float, accel) -> None:
        x, y, z, vx, vy, vz = self.x, self.y, self.z, self.vx, self.vy, self.vz
        ax1, ay1, az1 = accel(x, y, z, vx, vy, vz, u)
        hdt = 0.5 * dt

        x2 = x + hdt * vx
        y2 = y + hdt * vy
        z2 = z + hdt * vz
        vx2 = vx + hdt * ax1
        vy2 = vy + hdt * ay1
        vz2 = vz + hdt * az1
        ax2, ay2, az2 = accel(x2, y2, z2, vx2, vy2, vz2, u)

        x3 = x + hdt * vx2
        y3 = y + hdt * vy2
        z3 = z + hdt * vz2
        vx3 = vx + hdt * ax2
        vy3 = vy + hdt * ay2
        vz3 = vz + hdt * az2
        ax3, ay3, az3 = accel(x3, y3, z3, vx3, vy3, vz3, u)

        x4 = x + dt * vx3
        y4 = y + dt * vy3
        z4 = z + dt * vz3
        vx4 = vx + dt * ax3
        vy4 = vy + dt * ay3
        vz4 = vz + dt * az3
        ax4, ay4, az4 = accel(x4, y4, z4, vx4, vy4, vz4, u)

        sixth = dt / 6.0
        self.x = x + sixth * (vx + 2.0 * (vx2 + vx3) + vx4)
        self.y = y + sixth * (vy + 2.0 * (vy2 + vy3) + vy4)
        self.z = z + sixth * (vz + 2.0 * (vz2 + vz3) + vz4)
        self.vx = vx + sixth * (ax1 + 2.0 * (ax2 + ax3) + ax4)
        self.vy = vy + sixth * (ay1 + 2.0 * (ay2 + ay3) + ay4)
        self.vz = vz + sixth * (az1 + 2.0 * (az2 + az3) + az4)

    def update_geometry(self, mu: float) -> None:
        theta, raan, a, e, inc = _osc_geometry(
            self.x, self.y, self.z, self.vx, self.vy, self.vz, mu)
        self.theta_cum += _angle_increment(theta, self.theta_raw)
        self.raan_cum += _angle_increment(raan, self.raan_raw)
        self.theta_raw = theta
        self.raan_raw = raan
        self.a = a
        self.e = e
        self.inc = inc


def _check_dt(dt: float, a: float, c: EarthConstants) -> None:
    if dt <= 0.0:
        raise ValueError(f"step size must be positive, got {dt}")
    period = orbital_period(a, c)
    if dt > period / MIN_STEPS_PER_ORBIT:
        raise ValueError(
            f"step size {dt} s exceeds period/{MIN_STEPS_PER_ORBIT} = "
            f"{period / MIN_STEPS_PER_ORBIT:.1f} s"
        )


def state_derivative(
    s: SatelliteSimState,
    u: float,
    models: ForceModel,
) -> tuple[tuple[float, float, float], tuple[float, float, float]]:
    """Time derivative (velocity, acceleration) of one satellite state."""
    if not 0.0 <= u <= 1.0:
        raise ValueError(f"drag ratio must be in [0, 1], got {u}")
    accel = make_accel(models)
    x, y, z = s.cart.r
    vx, vy, vz = s.cart.v
    return ((vx, vy, vz), accel(x, y, z, vx, vy, vz, u))


def step(s: SatelliteSimState, u: float, dt: float, models: ForceModel) -> SatelliteSimState:
    """Advance one satellite by a single RK4 step of dt seconds."""
    if not 0.0 <= u <= 1.0:
        raise ValueError(f"drag ratio must be in [0, 1], got {u}")
    mu = models.constants.mu
    runner = _SatRunner(s, mu)
    _check_dt(dt, runner.a, models.constants)
    accel = make_accel(models)
    runner.rk4(dt, u, accel)
    runner.update_geometry(mu)
    return SatelliteSimState(
        cart=CartesianState(
            r=(runner.x, runner.y, runner.z),
            v=(runner.vx, runner.vy, runner.vz),
        ),
        t=s.t + dt,
        theta_cum=runner.theta_cum,
        raan_cum=runner.raan_cum,
        u_applied=u,
    )


def _run_steps(
    runners: list[_SatRunner],
    t0: float,
    n_steps: int,
    dt: float,
    u_of_step: Callable[[int], Sequence[float]],
    models: ForceModel,
) -> Trajectory:
    """March all satellites n_steps forward, recording every sample."""
    mu = models.constants.mu
    accel = make_accel(models)
    n_sats = len(runners)
    size = n_steps + 1

    times = np.empty(size)
    pos = [np.empty((size, 3)) for _ in range(n_sats)]
    vel = [np.empty((size, 3)) for _ in range(n_sats)]
    a_arr = [np.empty(size) for _ in range(n_sats)]
    e_arr = [np.empty(size) for _ in range(n_sats)]
    i_arr = [np.empty(size) for _ in range(n_sats)]
    raan_arr = [np.empty(size) for _ in range(n_sats)]
    theta_arr = [np.empty(size) for _ in range(n_sats)]
    u_arr = [np.empty(size) for _ in range(n_sats)]

    u_now = u_of_step(0)

    def record(k: int) -> None:
        times[k] = t0 + k * dt
        for q, rn in enumerate(runners):
            pos[q][k, 0] = rn.x
            pos[q][k, 1] = rn.y
            pos[q][k, 2] = rn.z
            vel[q][k, 0] = rn.vx
            vel[q][k, 1] = rn.vy
            vel[q][k, 2] = rn.vz
            a_arr[q][k] = rn.a
            e_arr[q][k] = rn.e
            i_arr[q][k] = rn.inc
            raan_arr[q][k] = rn.raan_cum
            theta_arr[q][k] = rn.theta_cum
            u_arr[q][k] = u_now[q]

    record(0)
    for k in range(n_steps):
        u_now = u_of_step(k)
        for q, rn in enumerate(runners):
            rn.rk4(dt, u_now[q], accel)
            rn.update_geometry(mu)
        record(k + 1)

    sats = tuple(
        SatTrack(pos=pos[q], vel=vel[q], a=a_arr[q], e=e_arr[q], inc=i_arr[q],
                 raan_cum=raan_arr[q], theta_cum=theta_arr[q], u=u_arr[q])
        for q in range(n_sats)
    )
    return Trajectory(times=times, sats=sats)


def propagate(
    states: Sequence[SatelliteSimState],
    control_schedule: Sequence[tuple[float, Sequence[float]]],
    duration: float,
    models: ForceModel,
    dt: float,
) -> Trajectory:
    """Propagate all satellites over a fixed span with scheduled controls.

    control_schedule holds (t_start, per-satellite u) entries in ascending
    t_start order; each entry applies until the next one (zero-order hold).
    The first entry must start at or before the common epoch.
    """
    if not states:
        raise ValueError("need at least one satellite")
    t0 = states[0].t
    for s in states[1:]:
        if s.t != t0:
            raise ValueError("all satellites must share an epoch")
    if duration <= 0.0:
        raise ValueError(f"duration must be positive, got {duration}")

    if not control_schedule:
        raise ScheduleGapError("empty control schedule")
    starts = [entry[0] for entry in control_schedule]
    if any(starts[k] >= starts[k + 1] for k in range(len(starts) - 1)):
        raise ScheduleGapError("schedule entries must have increasing start times")
    if starts[0] > t0:
        raise ScheduleGapError(
            f"schedule starts at {starts[0]} s but propagation begins at {t0} s"
        )
    n_sats = len(states)
    for t_start, u_vec in control_schedule:
        if len(u_vec) != n_sats:
            raise ValueError("schedule entry length must match satellite count")
        for u in u_vec:
            if not 0.0 <= u <= 1.0:
                raise ValueError(f"drag ratio must be in [0, 1], got {u}")

    mu = models.constants.mu
    runners = [_SatRunner(s, mu) for s in states]
    for rn in runners:
        _check_dt(dt, rn.a, models.constants)
    n_steps = int(round(duration / dt))
    if n_steps < 1:
        raise ValueError("duration shorter than one step")

    def u_of_step(k: int) -> Sequence[float]:
        t = t0 + k * dt
        idx = bisect_right(starts, t) - 1
        return control_schedule[idx][1]

    return _run_steps(runners, t0, n_steps, dt, u_of_step, models)


def propagate_orbits(
    states: Sequence[SatelliteSimState],
    u_blocks: Sequence[Sequence[float]],
    models: ForceModel,
    dt: float,
    chief_index: int = 0,
) -> Trajectory:
    """Propagate through len(u_blocks) chief orbits, one control block each.

    An orbit elapses when the chief's unwrapped argument of latitude
    crosses the next multiple of 2*pi past its starting value; blocks
    switch at the first sample past each crossing.
    """
    if not states:
        raise ValueError("need at least one satellite")
    t0 = states[0].t
    for s in states[1:]:
        if s.t != t0:
            raise ValueError("all satellites must share an epoch")
    n_sats = len(states)
    for blk in u_blocks:
        if len(blk) != n_sats:
            raise ValueError("control block length must match satellite count")

    mu = models.constants.mu
    runners = [_SatRunner(s, mu) for s in states]
    for rn in runners:
        _check_dt(dt, rn.a, models.constants)

    chief = runners[chief_index]
    theta_start = chief.theta_cum
    n_orbits = len(u_blocks)
    # Generous cap: blocks cannot take more than ~2 periods each
    max_steps = int(2.5 * n_orbits * orbital_period(chief.a, models.constants) / dt) + 10

    accel = make_accel(models)
    samples_t: list[float] = []
    recs = [([], [], [], [], [], [], [], []) for _ in range(n_sats)]  # pos,vel,a,e,i,raan,theta,u

    def record(k: int, u_now: Sequence[float]) -> None:
        samples_t.append(t0 + k * dt)
        for q, rn in enumerate(runners):
            pr, vr, ar, er, ir, rr, tr, ur = recs[q]
            pr.append((rn.x, rn.y, rn.z))
            vr.append((rn.vx, rn.vy, rn.vz))
            ar.append(rn.a)
            er.append(rn.e)
            ir.append(rn.inc)
            rr.append(rn.raan_cum)
            tr.append(rn.theta_cum)
            ur.append(u_now[q])

    block = 0
    u_now = u_blocks[0]
    record(0, u_now)
    k = 0
    while block < n_orbits:
        if k >= max_steps:
            raise RuntimeError("orbit crossing not reached; propagation runaway")
        for q, rn in enumerate(runners):
            rn.rk4(dt, u_now[q], accel)
            rn.update_geometry(mu)
        k += 1
        if chief.theta_cum >= theta_start + (block + 1) * TWO_PI:
            block += 1
            if block < n_orbits:
                u_now = u_blocks[block]
        record(k, u_now)

    sats = tuple(
        SatTrack(
            pos=np.array(recs[q][0]), vel=np.array(recs[q][1]),
            a=np.array(recs[q][2]), e=np.array(recs[q][3]),
            inc=np.array(recs[q][4]), raan_cum=np.array(recs[q][5]),
            theta_cum=np.array(recs[q][6]), u=np.array(recs[q][7]),
        )
        for q in range(n_sats)
    )
    return Trajectory(times=np.array(samples_t), sats=sats)


def extract_mean(
    traj: Trajectory,
    sat_index: int,
    c: EarthConstants = WGS84,
    window: float | None = None,
) -> MeanElements:
    """Trailing one-orbit arithmetic means of a, node angle, and AoL.

    Pass an explicit window (in seconds) to average several satellites
    over the identical sample range; otherwise the satellite's own
    current period is used. A shared window keeps the per-satellite
    half-orbit averaging lag identical, so it cancels in differences.
    """
    trk = traj.sats[sat_index]
    t_end = float(traj.times[-1])
    period = orbital_period(float(trk.a[-1]), c) if window is None else window
    i0 = int(np.searchsorted(traj.times, t_end - period, side="left"))
    if i0 > 0:
        # pick the boundary sample that lands the span closest to one period
        span_in = t_end - float(traj.times[i0])
        span_out = t_end - float(traj.times[i0 - 1])
        if abs(span_out - period) < abs(span_in - period):
            i0 -= 1
    span = t_end - float(traj.times[i0])
    if span < 0.95 * period:
        raise InsufficientWindowError(
            f"trailing window spans {span:.1f} s, need >= {0.95 * period:.1f} s"
        )
    return MeanElements(
        a_mean=float(np.mean(trk.a[i0:])),
        raan_mean=float(np.mean(trk.raan_cum[i0:])),
        theta_mean_cum=float(np.mean(trk.theta_cum[i0:])),
        window=span,
        t=t_end,
    )

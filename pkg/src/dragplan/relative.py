"""Linearized relative dynamics for a chief/deputy pair under drag control.

State is x = [d_theta, d_a]: the unwrapped mean argument-of-latitude
difference and the semi-major-axis difference, both deputy minus chief.
The drag-ratio difference drives d_a, d_a drives d_theta, and the
achievable node separation is slaved to d_theta through a dimensionless
coupling constant (written k4 here).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .orbital import EarthConstants, WGS84, TWO_PI


@dataclass(frozen=True)
class GainSet:
    """Linearization gains about a circular reference orbit.

    k1: d(theta_rate)/d(a), rad/s per m (always negative)
    k2: d(raan_rate)/d(a), rad/s per m (sign of cos i)
    k3: altitude rate per unit drag ratio, m/s (negative: drag lowers)
    k4: k2/k1, the along-track to cross-track coupling (dimensionless)
    """
    k1: float
    k2: float
    k3: float
    k4: float
    a_ref: float
    i_ref: float
    d_ref: float    # max-drag acceleration at the reference orbit, m/s^2

    def __post_init__(self) -> None:
        if self.k1 >= 0.0:
            raise ValueError(f"k1 must be negative, got {self.k1}")
        if self.k3 > 0.0:
            raise ValueError(f"k3 must be non-positive, got {self.k3}")

    @property
    def deg_raan_per_rev(self) -> float:
        """Node separation accrued per full revolution of d_theta, degrees."""
        return self.k4 * 360.0


@dataclass(frozen=True)
class RelativePairState:
    """Deputy-minus-chief mean state; d_theta carries whole revolutions."""
    d_theta: float  # rad, unwrapped
    d_a: float      # m

    def __post_init__(self) -> None:
        if not (math.isfinite(self.d_theta) and math.isfinite(self.d_a)):
            raise ValueError("relative state must be finite")


@dataclass(frozen=True)
class FormationState:
    """Relative states of every deputy with respect to one chief."""
    chief_id: int
    deputies: tuple[RelativePairState, ...]

    def __post_init__(self) -> None:
        if len(self.deputies) < 1:
            raise ValueError("a formation needs at least one deputy")

    @property
    def n_pairs(self) -> int:
        return len(self.deputies)


@dataclass(frozen=True)
class DiscreteLinearModel:
    """Exact zero-order-hold discretization of the pair dynamics.

    ad = [[1, k1*dt], [0, 1]], bd = [k1*k3*dt^2/2, k3*dt].
    """
    ad: tuple[tuple[float, float], tuple[float, float]]
    bd: tuple[float, float]
    dt: float


def compute_gains(
    a_ref: float,
    i_ref: float,
    d_ref: float,
    c: EarthConstants = WGS84,
) -> GainSet:
    """Linearization gains at a reference circular orbit.

    d_ref is the maximum (u=1) drag acceleration magnitude at the
    reference orbit; the altitude-rate gain is k3 = -2*sqrt(a^3/mu)*d_ref.
    """
    if a_ref <= c.r_eq:
        raise ValueError(f"reference semi-major axis {a_ref} must exceed r_eq")
    if d_ref <= 0.0:
        raise ValueError(f"reference drag acceleration must be positive, got {d_ref}")
    k1 = -1.5 * math.sqrt(c.mu / a_ref ** 5)
    k2 = (21.0 / 4.0) * c.j[0] * math.sqrt(c.mu / a_ref ** 9) * c.r_eq ** 2 * math.cos(i_ref)
    k3 = -2.0 * math.sqrt(a_ref ** 3 / c.mu) * d_ref
    return GainSet(k1=k1, k2=k2, k3=k3, k4=k2 / k1, a_ref=a_ref, i_ref=i_ref, d_ref=d_ref)


def discretize(g: GainSet, dt: float) -> DiscreteLinearModel:
    """Exact zero-order-hold discrete model over a stage of dt seconds."""
    if dt <= 0.0:
        raise ValueError(f"stage duration must be positive, got {dt}")
    return DiscreteLinearModel(
        ad=((1.0, g.k1 * dt), (0.0, 1.0)),
        bd=(0.5 * g.k1 * g.k3 * dt * dt, g.k3 * dt),
        dt=dt,
    )


def feasible_raan(d_theta_f: float, ell: int, g: GainSet) -> float:
    """Node separation reachable for a final d_theta_f plus ell revolutions.

    d_raan_f = k4 * (d_theta_f + 2*pi*ell); the ladder of achievable
    cross-track separations for a drag-only maneuver.
    """
    if abs(d_theta_f) >= TWO_PI:
        raise ValueError(f"d_theta_f must be wrapped (|x| < 2*pi), got {d_theta_f}")
    return g.k4 * (d_theta_f + TWO_PI * ell)


def select_ell(d_omega_desired: float, d_theta_f: float, g: GainSet) -> int:
    """Integer revolution count whose ladder rung is nearest the desired node
    separation; ties break toward smaller |ell|.
    """
    if g.k4 == 0.0:
        raise ValueError("polar reference orbit: no cross-track authority (k4 = 0)")
    exact = (d_omega_desired / g.k4 - d_theta_f) / TWO_PI
    lo = math.floor(exact)
    best = None
    for ell in (lo, lo + 1):
        err = abs(feasible_raan(d_theta_f, ell, g) - d_omega_desired)
        if best is None or err < best[0] - 1e-15 or (abs(err - best[0]) <= 1e-15 and abs(ell) < abs(best[1])):
            best = (err, ell)
    return best[1]


def relative_state(chief: "MeanElements", deputy: "MeanElements") -> RelativePairState:
    """Deputy-minus-chief differences of unwrapped mean AoL and mean a."""
    if chief.t != deputy.t:
        raise ValueError(f"epoch mismatch: chief t={chief.t}, deputy t={deputy.t}")
    return RelativePairState(
        d_theta=deputy.theta_mean_cum - chief.theta_mean_cum,
        d_a=deputy.a_mean - chief.a_mean,
    )


def spherical_distance(d_theta: float, d_raan: float, i: float, r: float) -> float:
    """Great-circle separation r * angle between two orbit positions.

    Both satellites are evaluated at the chief's node-crossing epoch: the
    chief at (raan=0, i, theta=0) and the other at (raan=d_raan, i,
    theta=d_theta mod 2*pi).
    """
    if r <= 0.0:
        raise ValueError(f"radius must be positive, got {r}")
    u1 = (1.0, 0.0, 0.0)
    co, so = math.cos(d_raan), math.sin(d_raan)
    ct, st = math.cos(d_theta), math.sin(d_theta)
    ci, si = math.cos(i), math.sin(i)
    u2 = (co * ct - so * st * ci, so * ct + co * st * ci, st * si)
    dot = min(1.0, max(-1.0, u1[0] * u2[0] + u1[1] * u2[1] + u1[2] * u2[2]))
    return r * math.acos(dot)

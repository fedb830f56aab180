"""Perturbation force models: atmosphere, drag, zonal gravity, mean rates.

The default atmosphere is a static piecewise-exponential table
(Vallado-style reference values, 200-900 km). Determinism is deliberate:
no solar-flux dependence, so regression values stay fixed.
"""
from __future__ import annotations

import csv
import math
from bisect import bisect_right
from dataclasses import dataclass
from pathlib import Path

from .orbital import CartesianState, EarthConstants, SpacecraftParams, WGS84


class AltitudeBelowTableError(ValueError):
    """Raised when an altitude falls below the atmosphere table floor."""


@dataclass(frozen=True)
class AtmosphereTable:
    """Piecewise-exponential density layers.

    Each layer is (base altitude km, base density kg/m^3, scale height km);
    a query uses the highest layer whose base is at or below the altitude.
    """
    layers: tuple[tuple[float, float, float], ...]

    def __post_init__(self) -> None:
        if not self.layers:
            raise ValueError("atmosphere table must have at least one layer")
        prev = -math.inf
        for h_base, rho_base, scale in self.layers:
            if h_base <= prev:
                raise ValueError("layer base altitudes must be strictly increasing")
            if rho_base <= 0.0 or scale <= 0.0:
                raise ValueError("layer densities and scale heights must be positive")
            prev = h_base

    @property
    def floor_km(self) -> float:
        return self.layers[0][0]


# Reference exponential-atmosphere layers, 200-900 km.
DEFAULT_ATMOSPHERE = AtmosphereTable(layers=(
    (200.0, 2.789e-10, 37.105),
    (250.0, 7.248e-11, 45.546),
    (300.0, 2.418e-11, 53.628),
    (350.0, 9.518e-12, 53.298),
    (400.0, 3.725e-12, 58.515),
    (450.0, 1.585e-12, 60.828),
    (500.0, 6.967e-13, 63.822),
    (600.0, 1.454e-13, 71.835),
    (700.0, 3.614e-14, 88.667),
    (800.0, 1.170e-14, 124.64),
    (900.0, 5.245e-15, 181.05),
))


def load_atmosphere_csv(path: str | Path) -> AtmosphereTable:
    """Load a table from CSV columns h_base_km, rho_kg_m3, scale_height_km."""
    layers: list[tuple[float, float, float]] = []
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        required = {"h_base_km", "rho_kg_m3", "scale_height_km"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise ValueError(
                f"atmosphere CSV must have columns {sorted(required)}, "
                f"got {reader.fieldnames}"
            )
        for row in reader:
            layers.append((
                float(row["h_base_km"]),
                float(row["rho_kg_m3"]),
                float(row["scale_height_km"]),
            ))
    return AtmosphereTable(layers=tuple(layers))


def density(h_km: float, atm: AtmosphereTable = DEFAULT_ATMOSPHERE) -> float:
    """Density in kg/m^3 at a geometric altitude in km.

    Altitudes above the top layer extrapolate on the top layer's scale
    height; below the table floor is an error (the orbit has decayed out
    of the model's validity range).
    """
    bases = [layer[0] for layer in atm.layers]
    idx = bisect_right(bases, h_km) - 1
    if idx < 0:
        raise AltitudeBelowTableError(
            f"altitude {h_km} km is below the table floor {atm.floor_km} km"
        )
    h_base, rho_base, scale = atm.layers[idx]
    return rho_base * math.exp(-(h_km - h_base) / scale)


def drag_acceleration(
    s: CartesianState,
    u: float,
    p: SpacecraftParams,
    atm: AtmosphereTable = DEFAULT_ATMOSPHERE,
    c: EarthConstants = WGS84,
) -> tuple[float, float, float]:
    """Drag acceleration with a co-rotating atmosphere.

    The commanded drag ratio u in [0, 1] scales the incident area
    linearly: A = u * area_max. Velocity is taken relative to air
    rotating with the Earth, v_rel = v - omega_earth * z_hat x r.
    """
    if not 0.0 <= u <= 1.0:
        raise ValueError(f"drag ratio must be in [0, 1], got {u}")
    x, y, z = s.r
    vx, vy, vz = s.v
    h_km = (s.r_mag() - c.r_eq) / 1000.0
    rho = density(h_km, atm)

    w = c.omega_earth
    rx = vx + w * y
    ry = vy - w * x
    rz = vz
    v_rel = math.sqrt(rx * rx + ry * ry + rz * rz)
    if v_rel == 0.0:
        return (0.0, 0.0, 0.0)
    coeff = -0.5 * rho * (u * p.area_max) * p.c_d * v_rel / p.mass
    return (coeff * rx, coeff * ry, coeff * rz)


def reference_drag_accel(
    a: float,
    i: float,
    p: SpacecraftParams,
    atm: AtmosphereTable = DEFAULT_ATMOSPHERE,
    c: EarthConstants = WGS84,
) -> float:
    """Max-drag (u=1) acceleration magnitude for a circular reference orbit.

    Uses the corotation-corrected airspeed sqrt(mu/a) - omega*a*cos(i);
    this is the linearization point for the altitude-rate gain.
    """
    rho = density((a - c.r_eq) / 1000.0, atm)
    v_rel = math.sqrt(c.mu / a) - c.omega_earth * a * math.cos(i)
    return 0.5 * rho * p.area_max * p.c_d * v_rel * v_rel / p.mass


def _legendre_with_derivative(u: float, max_degree: int) -> tuple[list[float], list[float]]:
    """Legendre polynomials P_0..P_d and derivatives at u."""
    p = [1.0, u]
    dp = [0.0, 1.0]
    for n in range(2, max_degree + 1):
        p.append(((2 * n - 1) * u * p[n - 1] - (n - 1) * p[n - 2]) / n)
        dp.append(dp[n - 2] + (2 * n - 1) * p[n - 1])
    return p, dp


def zonal_potential(
    r_vec: tuple[float, float, float],
    c: EarthConstants = WGS84,
    max_degree: int = 6,
) -> float:
    """Gravitational potential U (a = grad U) with zonal terms J2..max_degree.

    U = mu/r * (1 - sum_n J_n (r_eq/r)^n P_n(z/r)).
    """
    if not 2 <= max_degree <= 6:
        raise ValueError(f"max_degree must be in 2..6, got {max_degree}")
    x, y, z = r_vec
    r = math.sqrt(x * x + y * y + z * z)
    u = z / r
    p, _ = _legendre_with_derivative(u, max_degree)
    ratio = c.r_eq / r
    total = 1.0
    pow_ratio = ratio
    for n in range(2, max_degree + 1):
        pow_ratio *= ratio
        total -= c.j[n - 2] * pow_ratio * p[n]
    return c.mu / r * total


def zonal_acceleration(
    r_vec: tuple[float, float, float],
    c: EarthConstants = WGS84,
    max_degree: int = 6,
) -> tuple[float, float, float]:
    """Point-mass plus zonal-harmonic gravity acceleration.

    Gradient of the axially symmetric zonal potential; includes J2 up to
    J_max_degree. Independent of longitude by construction.
    """
    if not 2 <= max_degree <= 6:
        raise ValueError(f"max_degree must be in 2..6, got {max_degree}")
    x, y, z = r_vec
    r2 = x * x + y * y + z * z
    r = math.sqrt(r2)
    if r < 0.9 * c.r_eq:
        raise ValueError(f"radius {r} m is inside the validity floor")
    u = z / r
    p, dp = _legendre_with_derivative(u, max_degree)

    # dU/dr (u fixed) and dU/du (r fixed) for
    # U = mu/r - mu * sum J_n r_eq^n r^-(n+1) P_n(u)
    ratio = c.r_eq / r
    pow_ratio = ratio
    du_dr = -c.mu / r2
    du_du = 0.0
    for n in range(2, max_degree + 1):
        pow_ratio *= ratio
        jn = c.j[n - 2]
        du_dr += c.mu / r2 * jn * (n + 1) * pow_ratio * p[n]
        du_du -= c.mu / r * jn * pow_ratio * dp[n]

    # a = (dU/dr) r_hat + (dU/du) (z_hat - u r_hat)/r
    radial = (du_dr - u * du_du / r) / r
    ax = radial * x
    ay = radial * y
    az = radial * z + du_du / r
    return (ax, ay, az)


def mean_raan_rate(a: float, i: float, c: EarthConstants = WGS84) -> float:
    """Secular J2 nodal precession rate in rad/s.

    -(3/2) J2 sqrt(mu) r_eq^2 a^(-7/2) cos i.
    """
    if a <= c.r_eq:
        raise ValueError(f"semi-major axis {a} must exceed the equatorial radius")
    return -1.5 * c.j[0] * math.sqrt(c.mu) * c.r_eq ** 2 * a ** -3.5 * math.cos(i)


def mean_aol_rate(a: float, c: EarthConstants = WGS84) -> float:
    """Mean argument-of-latitude rate sqrt(mu/a^3) in rad/s."""
    if a <= 0.0:
        raise ValueError(f"semi-major axis must be positive, got {a}")
    return math.sqrt(c.mu / a ** 3)

"""Orbit state representations and two-body conversions.

Constants default to WGS-84/EGM-96 values. All angles are radians
internally; degrees appear only at I/O boundaries.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

TWO_PI = 2.0 * math.pi

# Eccentricity below which the argument of periapsis is ill-conditioned and
# all in-plane phase is folded into nu (so theta = argp + nu stays continuous).
CIRCULAR_ECC_EPS = 1e-8


def normalize_angle(x: float) -> float:
    """Map an angle to [0, 2*pi). Idempotent."""
    y = math.fmod(x, TWO_PI)
    if y < 0.0:
        y += TWO_PI
    # fmod of a value just below 2*pi can round up to 2*pi exactly
    if y >= TWO_PI:
        y -= TWO_PI
    return y


def wrap_to_pi(x: float) -> float:
    """Map an angle difference to [-pi, pi)."""
    y = math.fmod(x + math.pi, TWO_PI)
    if y < 0.0:
        y += TWO_PI
    return y - math.pi


def wrap_half_open(x: float) -> float:
    """Map an angle to (-pi, pi], the convention for reported deltas."""
    y = wrap_to_pi(x)
    if y == -math.pi:
        y = math.pi
    return y


@dataclass(frozen=True)
class EarthConstants:
    """Gravity-field and rotation constants (WGS-84/EGM-96 defaults).

    ``j`` holds the zonal coefficients indexed so that j[0] is J2 and
    j[4] is J6. J1 is identically zero for a center-of-mass origin and
    is not represented.
    """
    mu: float = 3.986004418e14          # m^3/s^2
    r_eq: float = 6.378137e6            # m
    j: tuple[float, float, float, float, float] = (
        1.08262668e-3,                  # J2
        -2.5327e-6,                     # J3
        -1.6196e-6,                     # J4
        -2.2730e-7,                     # J5
        5.4068e-7,                      # J6
    )
    omega_earth: float = 7.2921159e-5   # rad/s

    def __post_init__(self) -> None:
        if self.mu <= 0.0:
            raise ValueError(f"mu must be positive, got {self.mu}")
        if self.r_eq <= 0.0:
            raise ValueError(f"r_eq must be positive, got {self.r_eq}")
        if self.omega_earth <= 0.0:
            raise ValueError(f"omega_earth must be positive, got {self.omega_earth}")
        if len(self.j) != 5:
            raise ValueError("j must hold exactly J2..J6")

    @property
    def j2(self) -> float:
        return self.j[0]

    def validate_earthlike(self) -> None:
        """Reject constant overrides that no longer describe the Earth.

        Kept out of the constructor so tests may zero individual J terms.
        """
        if not (1.05e-3 < self.j[0] < 1.10e-3):
            raise ValueError(f"J2={self.j[0]} outside the Earth band (1.05e-3, 1.10e-3)")


WGS84 = EarthConstants()


@dataclass(frozen=True)
class OrbitalElements:
    """Classical osculating elements; angles normalized to [0, 2*pi)."""
    a: float        # semi-major axis, m
    e: float        # eccentricity
    i: float        # inclination, rad
    raan: float     # right ascension of ascending node, rad
    argp: float     # argument of periapsis, rad
    nu: float       # true anomaly, rad

    def __post_init__(self) -> None:
        if not 0.0 <= self.e < 1.0:
            raise ValueError(f"eccentricity must be in [0, 1), got {self.e}")
        if not 0.0 <= self.i <= math.pi:
            raise ValueError(f"inclination must be in [0, pi], got {self.i}")
        object.__setattr__(self, "raan", normalize_angle(self.raan))
        object.__setattr__(self, "argp", normalize_angle(self.argp))
        object.__setattr__(self, "nu", normalize_angle(self.nu))

    @property
    def theta(self) -> float:
        """Argument of latitude, the in-plane angle from the ascending node."""
        return normalize_angle(self.argp + self.nu)


@dataclass(frozen=True)
class CartesianState:
    """ECI position/velocity pair."""
    r: tuple[float, float, float]   # m
    v: tuple[float, float, float]   # m/s

    def r_mag(self) -> float:
        x, y, z = self.r
        return math.sqrt(x * x + y * y + z * z)

    def v_mag(self) -> float:
        vx, vy, vz = self.v
        return math.sqrt(vx * vx + vy * vy + vz * vz)

    def specific_energy(self, c: EarthConstants) -> float:
        """Two-body specific orbital energy v^2/2 - mu/r."""
        return 0.5 * self.v_mag() ** 2 - c.mu / self.r_mag()

    def angular_momentum(self) -> tuple[float, float, float]:
        x, y, z = self.r
        vx, vy, vz = self.v
        return (y * vz - z * vy, z * vx - x * vz, x * vy - y * vx)


@dataclass(frozen=True)
class SpacecraftParams:
    """Ballistic properties of one satellite."""
    mass: float          # kg
    c_d: float           # drag coefficient
    area_max: float      # m^2, maximum incident area
    area_min: float      # m^2, minimum incident area

    def __post_init__(self) -> None:
        if self.mass <= 0.0:
            raise ValueError(f"mass must be positive, got {self.mass}")
        if self.c_d <= 0.0:
            raise ValueError(f"c_d must be positive, got {self.c_d}")
        if not 0.0 < self.area_min <= self.area_max:
            raise ValueError(
                f"areas must satisfy 0 < area_min <= area_max, got "
                f"({self.area_min}, {self.area_max})"
            )


# 1.5 kg CubeSat with two deployed panels; full drag area 0.075 m^2 and a
# conservative 5:1 usable drag ratio (area_min = 0.2 * area_max).
DEFAULT_CUBESAT = SpacecraftParams(mass=1.5, c_d=2.2, area_max=0.075, area_min=0.015)


def orbital_period(a: float, c: EarthConstants = WGS84) -> float:
    """Keplerian period 2*pi*sqrt(a^3/mu) in seconds."""
    if a <= 0.0:
        raise ValueError(f"semi-major axis must be positive, got {a}")
    return TWO_PI * math.sqrt(a ** 3 / c.mu)


def elements_to_cartesian(oe: OrbitalElements, c: EarthConstants = WGS84) -> CartesianState:
    """Convert osculating elements to an ECI state.

    Perifocal position/velocity rotated by R3(-raan) R1(-i) R3(-argp).
    """
    if oe.a <= 0.0:
        raise ValueError(f"semi-major axis must be positive, got {oe.a}")
    if oe.e >= 1.0:
        raise ValueError(f"eccentricity must be < 1, got {oe.e}")

    p = oe.a * (1.0 - oe.e ** 2)
    cos_nu = math.cos(oe.nu)
    sin_nu = math.sin(oe.nu)
    r = p / (1.0 + oe.e * cos_nu)

    # perifocal frame
    rx_p = r * cos_nu
    ry_p = r * sin_nu
    vfac = math.sqrt(c.mu / p)
    vx_p = -vfac * sin_nu
    vy_p = vfac * (oe.e + cos_nu)

    co, so = math.cos(oe.raan), math.sin(oe.raan)
    ci, si = math.cos(oe.i), math.sin(oe.i)
    cw, sw = math.cos(oe.argp), math.sin(oe.argp)

    r11 = co * cw - so * sw * ci
    r12 = -co * sw - so * cw * ci
    r21 = so * cw + co * sw * ci
    r22 = -so * sw + co * cw * ci
    r31 = sw * si
    r32 = cw * si

    return CartesianState(
        r=(r11 * rx_p + r12 * ry_p, r21 * rx_p + r22 * ry_p, r31 * rx_p + r32 * ry_p),
        v=(r11 * vx_p + r12 * vy_p, r21 * vx_p + r22 * vy_p, r31 * vx_p + r32 * vy_p),
    )


def cartesian_to_elements(s: CartesianState, c: EarthConstants = WGS84) -> OrbitalElements:
    """Convert an ECI state to osculating elements.

    For near-circular orbits (e < 1e-8) argp is reported as 0 and all
    in-plane phase is folded into nu, so theta = argp + nu varies
    continuously along the orbit.
    """
    x, y, z = s.r
    vx, vy, vz = s.v
    r = s.r_mag()
    if r <= 0.0:
        raise ValueError("zero position vector")

    hx, hy, hz = s.angular_momentum()
    h = math.sqrt(hx * hx + hy * hy + hz * hz)
    if h < 1e-6 * r * s.v_mag() or h == 0.0:
        raise ValueError("degenerate (rectilinear) state: angular momentum is zero")

    energy = s.specific_energy(c)
    if energy >= 0.0:
        raise ValueError(f"state is not elliptic (specific energy {energy} >= 0)")
    a = -c.mu / (2.0 * energy)

    inc = math.acos(min(1.0, max(-1.0, hz / h)))

    # eccentricity vector e = (v x h)/mu - r_hat
    ex = (vy * hz - vz * hy) / c.mu - x / r
    ey = (vz * hx - vx * hz) / c.mu - y / r
    ez = (vx * hy - vy * hx) / c.mu - z / r
    e = math.sqrt(ex * ex + ey * ey + ez * ez)

    # node vector n = z_hat x h = (-hy, hx, 0)
    nx, ny = -hy, hx
    n = math.hypot(nx, ny)
    equatorial = n < 1e-12 * h

    raan = 0.0 if equatorial else math.atan2(ny, nx)

    rdotv = x * vx + y * vy + z * vz
    if e >= CIRCULAR_ECC_EPS:
        if equatorial:
            # measure argp from the x-axis in the orbital plane
            argp = math.atan2(ey * math.copysign(1.0, hz), ex)
        else:
            cos_w = (nx * ex + ny * ey) / (n * e)
            argp = math.acos(min(1.0, max(-1.0, cos_w)))
            if ez < 0.0:
                argp = TWO_PI - argp
        cos_nu = (ex * x + ey * y + ez * z) / (e * r)
        nu = math.acos(min(1.0, max(-1.0, cos_nu)))
        if rdotv < 0.0:
            nu = TWO_PI - nu
    else:
        argp = 0.0
        if equatorial:
            nu = math.atan2(y * math.copysign(1.0, hz), x)
        else:
            # argument of latitude straight from geometry: angle from the
            # node line to the position within the orbital plane
            cos_t = (nx * x + ny * y) / (n * r)
            nu = math.acos(min(1.0, max(-1.0, cos_t)))
            if z < 0.0:
                nu = TWO_PI - nu

    return OrbitalElements(a=a, e=min(e, 1.0 - 1e-15), i=inc, raan=raan, argp=argp, nu=nu)


def argument_of_latitude(s: CartesianState) -> float:
    """Argument of latitude computed geometrically, robust for any e.

    Measured from the ascending node within the orbital plane; for
    equatorial orbits, from the x-axis with the sign of h_z.
    """
    x, y, z = s.r
    hx, hy, hz = s.angular_momentum()
    h = math.sqrt(hx * hx + hy * hy + hz * hz)
    if h == 0.0:
        raise ValueError("degenerate state: angular momentum is zero")
    nx, ny = -hy, hx
    n = math.hypot(nx, ny)
    r = s.r_mag()
    if n < 1e-12 * h:
        return normalize_angle(math.atan2(y * math.copysign(1.0, hz), x))
    cos_t = (nx * x + ny * y) / (n * r)
    theta = math.acos(min(1.0, max(-1.0, cos_t)))
    if z < 0.0:
        theta = TWO_PI - theta
    return normalize_angle(theta)


def raan_of(s: CartesianState) -> float:
    """Right ascension of the ascending node from the momentum vector."""
    hx, hy, hz = s.angular_momentum()
    h = math.sqrt(hx * hx + hy * hy + hz * hz)
    if h == 0.0:
        raise ValueError("degenerate state: angular momentum is zero")
    nx, ny = -hy, hx
    if math.hypot(nx, ny) < 1e-12 * h:
        return 0.0
    return normalize_angle(math.atan2(ny, nx))

"""Scenario configuration: JSON schema, validation, and shipped presets.

Configs are strict: unknown keys are rejected and violations are
reported with their dotted key path, so a typo cannot silently change a
months-long run.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .orbital import EarthConstants, SpacecraftParams, WGS84
from .environment import AtmosphereTable, DEFAULT_ATMOSPHERE, load_atmosphere_csv

SCHEMA_VERSION = 1

PRESET_NAMES = ("scenario1", "scenario2", "scenario2_ci")


class ScenarioError(ValueError):
    """Configuration schema violation, with the offending key path."""


@dataclass(frozen=True)
class DeploymentConfig:
    altitude_km: float
    e: float
    i_deg: float
    raan_deg: float
    aol_deg: float


@dataclass(frozen=True)
class PlanSection:
    d_a_min_km: float
    d_a_max_km: float
    u_min: float
    u_max: float
    w_theta: float
    w_u: float


@dataclass(frozen=True)
class MpcSection:
    replan_interval_orbits: int
    total_horizon_orbits: int
    relinearize: bool


@dataclass(frozen=True)
class SimSection:
    dt_s: float
    max_degree: int
    sample_every: int


@dataclass(frozen=True)
class ScenarioConfig:
    """Validated mission description with all defaults resolved."""
    name: str
    deployment: DeploymentConfig
    n_sats: int
    spacecraft: SpacecraftParams
    atmosphere: AtmosphereTable
    atmosphere_ref: str             # "default" or the CSV path, for the echo
    constants: EarthConstants
    constants_overrides: dict
    target_d_theta_f_deg: tuple[float, ...]
    target_ell: tuple[int, ...]
    plan: PlanSection
    mpc: MpcSection
    sim: SimSection

    def to_dict(self) -> dict:
        """Exact echo of the resolved configuration (audit trail)."""
        return {
            "schema": SCHEMA_VERSION,
            "name": self.name,
            "deployment": {
                "altitude_km": self.deployment.altitude_km,
                "e": self.deployment.e,
                "i_deg": self.deployment.i_deg,
                "raan_deg": self.deployment.raan_deg,
                "aol_deg": self.deployment.aol_deg,
            },
            "n_sats": self.n_sats,
            "spacecraft": {
                "mass_kg": self.spacecraft.mass,
                "c_d": self.spacecraft.c_d,
                "area_max_m2": self.spacecraft.area_max,
                "area_min_m2": self.spacecraft.area_min,
            },
            "atmosphere": self.atmosphere_ref,
            "constants": dict(self.constants_overrides),
            "targets": [
                {"d_theta_f_deg": v, "ell": l}
                for v, l in zip(self.target_d_theta_f_deg, self.target_ell)
            ],
            "plan": {
                "d_a_min_km": self.plan.d_a_min_km,
                "d_a_max_km": self.plan.d_a_max_km,
                "u_min": self.plan.u_min,
                "u_max": self.plan.u_max,
                "w_theta": self.plan.w_theta,
                "w_u": self.plan.w_u,
            },
            "mpc": {
                "replan_interval_orbits": self.mpc.replan_interval_orbits,
                "total_horizon_orbits": self.mpc.total_horizon_orbits,
                "relinearize": self.mpc.relinearize,
            },
            "sim": {
                "dt_s": self.sim.dt_s,
                "max_degree": self.sim.max_degree,
                "sample_every": self.sim.sample_every,
            },
        }


def _require(obj: dict, key: str, path: str):
    if key not in obj:
        raise ScenarioError(f"{path}{key}: missing required key")
    return obj[key]


def _number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(f"{path}: expected a number, got {value!r}")
    return float(value)


def _integer(value, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ScenarioError(f"{path}: expected an integer, got {value!r}")
    return value


def _check_keys(obj: dict, allowed: set[str], path: str) -> None:
    if not isinstance(obj, dict):
        raise ScenarioError(f"{path or 'config'}: expected an object")
    unknown = set(obj) - allowed
    if unknown:
        raise ScenarioError(f"{path}{sorted(unknown)[0]}: unknown key")


_CONSTANT_KEYS = ("mu", "r_eq", "j2", "j3", "j4", "j5", "j6", "omega_earth")


def _build_constants(overrides: dict, path: str) -> EarthConstants:
    _check_keys(overrides, set(_CONSTANT_KEYS), path)
    base = WGS84
    j = list(base.j)
    for idx, key in enumerate(("j2", "j3", "j4", "j5", "j6")):
        if key in overrides:
            j[idx] = _number(overrides[key], f"{path}{key}")
    try:
        c = EarthConstants(
            mu=_number(overrides.get("mu", base.mu), f"{path}mu"),
            r_eq=_number(overrides.get("r_eq", base.r_eq), f"{path}r_eq"),
            j=tuple(j),
            omega_earth=_number(overrides.get("omega_earth", base.omega_earth), f"{path}omega_earth"),
        )
        c.validate_earthlike()
    except ValueError as exc:
        raise ScenarioError(f"{path.rstrip('.')}: {exc}") from exc
    return c


def parse_scenario(raw: dict) -> ScenarioConfig:
    """Validate a scenario dict (defaults filled, unknown keys rejected)."""
    _check_keys(raw, {
        "schema", "name", "deployment", "n_sats", "spacecraft", "atmosphere",
        "constants", "targets", "plan", "mpc", "sim",
    }, "")
    schema = _integer(_require(raw, "schema", ""), "schema")
    if schema != SCHEMA_VERSION:
        raise ScenarioError(f"schema: version {schema} unsupported (expected {SCHEMA_VERSION})")
    name = raw.get("name", "unnamed")
    if not isinstance(name, str):
        raise ScenarioError(f"name: expected a string, got {name!r}")

    dep_raw = _require(raw, "deployment", "")
    _check_keys(dep_raw, {"altitude_km", "e", "i_deg", "raan_deg", "aol_deg"}, "deployment.")
    deployment = DeploymentConfig(
        altitude_km=_number(_require(dep_raw, "altitude_km", "deployment."), "deployment.altitude_km"),
        e=_number(dep_raw.get("e", 0.0), "deployment.e"),
        i_deg=_number(_require(dep_raw, "i_deg", "deployment."), "deployment.i_deg"),
        raan_deg=_number(dep_raw.get("raan_deg", 0.0), "deployment.raan_deg"),
        aol_deg=_number(dep_raw.get("aol_deg", 0.0), "deployment.aol_deg"),
    )
    if not 100.0 <= deployment.altitude_km <= 2000.0:
        raise ScenarioError(f"deployment.altitude_km: {deployment.altitude_km} outside LEO range [100, 2000]")
    if not 0.0 <= deployment.e < 0.1:
        raise ScenarioError(f"deployment.e: {deployment.e} outside near-circular range [0, 0.1)")
    if not 0.0 <= deployment.i_deg <= 180.0:
        raise ScenarioError(f"deployment.i_deg: {deployment.i_deg} outside [0, 180]")

    n_sats = _integer(_require(raw, "n_sats", ""), "n_sats")
    if n_sats < 2:
        raise ScenarioError(f"n_sats: need at least 2, got {n_sats}")

    sc_raw = raw.get("spacecraft", {})
    _check_keys(sc_raw, {"mass_kg", "c_d", "area_max_m2", "area_min_m2"}, "spacecraft.")
    try:
        spacecraft = SpacecraftParams(
            mass=_number(sc_raw.get("mass_kg", 1.5), "spacecraft.mass_kg"),
            c_d=_number(sc_raw.get("c_d", 2.2), "spacecraft.c_d"),
            area_max=_number(sc_raw.get("area_max_m2", 0.075), "spacecraft.area_max_m2"),
            area_min=_number(sc_raw.get("area_min_m2", 0.015), "spacecraft.area_min_m2"),
        )
    except ValueError as exc:
        raise ScenarioError(f"spacecraft: {exc}") from exc

    atmosphere_ref = raw.get("atmosphere", "default")
    if not isinstance(atmosphere_ref, str):
        raise ScenarioError(f"atmosphere: expected 'default' or a CSV path, got {atmosphere_ref!r}")
    if atmosphere_ref == "default":
        atmosphere = DEFAULT_ATMOSPHERE
    else:
        try:
            atmosphere = load_atmosphere_csv(atmosphere_ref)
        except (OSError, ValueError) as exc:
            raise ScenarioError(f"atmosphere: cannot load {atmosphere_ref!r}: {exc}") from exc

    overrides = raw.get("constants", {})
    constants = _build_constants(overrides, "constants.")

    targets_raw = _require(raw, "targets", "")
    if not isinstance(targets_raw, list):
        raise ScenarioError("targets: expected a list")
    if len(targets_raw) != n_sats - 1:
        raise ScenarioError(
            f"targets: expected n_sats - 1 = {n_sats - 1} entries, got {len(targets_raw)}"
        )
    d_theta_f = []
    ells = []
    for k, entry in enumerate(targets_raw):
        path = f"targets[{k}]."
        _check_keys(entry, {"d_theta_f_deg", "ell"}, path)
        v = _number(entry.get("d_theta_f_deg", 0.0), f"{path}d_theta_f_deg")
        if abs(v) >= 360.0:
            raise ScenarioError(f"{path}d_theta_f_deg: wrapped target must satisfy |x| < 360")
        d_theta_f.append(v)
        ells.append(_integer(entry.get("ell", 0), f"{path}ell"))

    plan_raw = raw.get("plan", {})
    _check_keys(plan_raw, {"d_a_min_km", "d_a_max_km", "u_min", "u_max", "w_theta", "w_u"}, "plan.")
    plan_sec = PlanSection(
        d_a_min_km=_number(plan_raw.get("d_a_min_km", -100.0), "plan.d_a_min_km"),
        d_a_max_km=_number(plan_raw.get("d_a_max_km", 100.0), "plan.d_a_max_km"),
        u_min=_number(plan_raw.get("u_min", 0.2), "plan.u_min"),
        u_max=_number(plan_raw.get("u_max", 1.0), "plan.u_max"),
        w_theta=_number(plan_raw.get("w_theta", 1.0), "plan.w_theta"),
        w_u=_number(plan_raw.get("w_u", 1.0), "plan.w_u"),
    )
    if not plan_sec.d_a_min_km < 0.0 < plan_sec.d_a_max_km:
        raise ScenarioError("plan.d_a_min_km/d_a_max_km: bounds must straddle zero")
    if not 0.0 <= plan_sec.u_min < plan_sec.u_max <= 1.0:
        raise ScenarioError("plan.u_min/u_max: need 0 <= u_min < u_max <= 1")
    if plan_sec.w_theta <= 0.0 or plan_sec.w_u < 0.0:
        raise ScenarioError("plan.w_theta/w_u: weights must be positive / non-negative")

    mpc_raw = _require(raw, "mpc", "")
    _check_keys(mpc_raw, {"replan_interval_orbits", "total_horizon_orbits", "relinearize"}, "mpc.")
    mpc_sec = MpcSection(
        replan_interval_orbits=_integer(
            _require(mpc_raw, "replan_interval_orbits", "mpc."), "mpc.replan_interval_orbits"),
        total_horizon_orbits=_integer(
            _require(mpc_raw, "total_horizon_orbits", "mpc."), "mpc.total_horizon_orbits"),
        relinearize=mpc_raw.get("relinearize", True),
    )
    if not isinstance(mpc_sec.relinearize, bool):
        raise ScenarioError("mpc.relinearize: expected a boolean")
    if mpc_sec.replan_interval_orbits < 1:
        raise ScenarioError("mpc.replan_interval_orbits: must be >= 1")
    if mpc_sec.total_horizon_orbits < mpc_sec.replan_interval_orbits:
        raise ScenarioError("mpc.total_horizon_orbits: must be >= replan_interval_orbits")

    sim_raw = raw.get("sim", {})
    _check_keys(sim_raw, {"dt_s", "max_degree", "sample_every"}, "sim.")
    sim_sec = SimSection(
        dt_s=_number(sim_raw.get("dt_s", 10.0), "sim.dt_s"),
        max_degree=_integer(sim_raw.get("max_degree", 6), "sim.max_degree"),
        sample_every=_integer(sim_raw.get("sample_every", 10), "sim.sample_every"),
    )
    if sim_sec.dt_s <= 0.0:
        raise ScenarioError("sim.dt_s: must be positive")
    if not 0 <= sim_sec.max_degree <= 6 or sim_sec.max_degree == 1:
        raise ScenarioError("sim.max_degree: must be 0 (two-body) or 2..6")
    if sim_sec.sample_every < 1:
        raise ScenarioError("sim.sample_every: must be >= 1")

    return ScenarioConfig(
        name=name,
        deployment=deployment,
        n_sats=n_sats,
        spacecraft=spacecraft,
        atmosphere=atmosphere,
        atmosphere_ref=atmosphere_ref,
        constants=constants,
        constants_overrides=dict(overrides),
        target_d_theta_f_deg=tuple(d_theta_f),
        target_ell=tuple(ells),
        plan=plan_sec,
        mpc=mpc_sec,
        sim=sim_sec,
    )


def load_scenario(path: str | Path) -> ScenarioConfig:
    """Load and validate a scenario JSON file."""
    p = Path(path)
    if not p.exists():
        raise ScenarioError(f"config file not found: {p}")
    try:
        raw = json.loads(p.read_text())
    except OSError as exc:
        raise ScenarioError(f"cannot read {p}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{p}: invalid JSON: {exc}") from exc
    return parse_scenario(raw)


def preset_path(name: str) -> Path:
    """Filesystem path of a shipped scenario preset."""
    if name not in PRESET_NAMES:
        raise ScenarioError(f"unknown preset {name!r}; available: {PRESET_NAMES}")
    return Path(str(resources.files("dragplan").joinpath(f"data/{name}.json")))


def load_preset(name: str) -> ScenarioConfig:
    return load_scenario(preset_path(name))

"""Propellantless along-track and cross-track maneuver planning for LEO
formations using differential atmospheric drag and nodal precession."""

__version__ = "0.1.0"

from .orbital import (
    CartesianState,
    EarthConstants,
    OrbitalElements,
    SpacecraftParams,
    DEFAULT_CUBESAT,
    WGS84,
    cartesian_to_elements,
    elements_to_cartesian,
    orbital_period,
)
from .environment import (
    AtmosphereTable,
    DEFAULT_ATMOSPHERE,
    density,
    drag_acceleration,
    mean_aol_rate,
    mean_raan_rate,
    zonal_acceleration,
)
from .relative import (
    DiscreteLinearModel,
    FormationState,
    GainSet,
    RelativePairState,
    compute_gains,
    discretize,
    feasible_raan,
    relative_state,
    select_ell,
    spherical_distance,
)
from .propagator import (
    ForceModel,
    MeanElements,
    SatelliteSimState,
    Trajectory,
    extract_mean,
    propagate,
    propagate_orbits,
    step,
)
from .planner import FormationTarget, PlanConfig, PlanSolution, PlanningError, build_lp, plan
from .scenario import ScenarioConfig, ScenarioError, load_preset, load_scenario, preset_path
from .report import SimulationReport, read_report, write_report

__all__ = [name for name in dir() if not name.startswith("_")]

from .mpc import ControllerState, MpcConfig, MpcContext, control_epoch, run_closed_loop

__all__ += ["ControllerState", "MpcConfig", "MpcContext", "control_epoch", "run_closed_loop"]

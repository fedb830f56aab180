"""Simulation reports and file emission.

report.json carries the final pair separations plus the exact
resolved config (audit trail); time series go to CSV. Everything written
is a pure function of the scenario config, so repeated runs are
bit-identical.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path


from .propagator import Trajectory

REPORT_SCHEMA_VERSION = 1

TRAJ_HEADER = ("t_s", "sat_id", "x", "y", "z", "vx", "vy", "vz",
               "a_m", "e", "i_deg", "raan_deg", "theta_cum_deg", "u")


@dataclass(frozen=True)
class PairResult:
    """Final separation summary for one chief/deputy pair."""
    pair: str
    t_f_months: float
    d_theta_f_deg: float        # wrapped to (-180, 180]
    d_raan_f_deg: float
    spherical_distance_km: float


@dataclass(frozen=True)
class EpochRecord:
    """Per-replan snapshot backing the plot CSVs."""
    t_s: float
    orbits_elapsed: int
    u: tuple[float, ...]            # last applied block, per satellite
    alt_km: tuple[float, ...]       # mean altitude per satellite
    d_theta_deg: tuple[float, ...]  # per pair, unwrapped
    d_raan_deg: tuple[float, ...]   # per pair
    d_a_m: tuple[float, ...]        # per pair


class TrajectoryStore:
    """Decimated accumulation of per-satellite samples across blocks."""

    def __init__(self, n_sats: int, sample_every: int) -> None:
        self.sample_every = sample_every
        self.times: list[float] = []
        self.cols: list[dict[str, list]] = [
            {k: [] for k in ("pos", "vel", "a", "e", "inc", "raan_cum", "theta_cum", "u")}
            for _ in range(n_sats)
        ]
        self._seen = 0

    @classmethod
    def empty(cls, n_sats: int, sample_every: int) -> "TrajectoryStore":
        return cls(n_sats, sample_every)

    def append_block(self, traj: Trajectory) -> None:
        """Take every sample_every-th sample; the stride is continuous
        across blocks, and a block's first sample repeats the previous
        block's last, so it is skipped after the first block."""
        start = 0 if self._seen == 0 else 1
        for k in range(start, len(traj.times)):
            if self._seen % self.sample_every == 0:
                self.times.append(float(traj.times[k]))
                for q, trk in enumerate(traj.sats):
                    col = self.cols[q]
                    col["pos"].append(tuple(float(v) for v in trk.pos[k]))
                    col["vel"].append(tuple(float(v) for v in trk.vel[k]))
                    col["a"].append(float(trk.a[k]))
                    col["e"].append(float(trk.e[k]))
                    col["inc"].append(float(trk.inc[k]))
                    col["raan_cum"].append(float(trk.raan_cum[k]))
                    col["theta_cum"].append(float(trk.theta_cum[k]))
                    col["u"].append(float(trk.u[k]))
            self._seen += 1


@dataclass
class SimulationReport:
    """Run summary: final per-pair separations and run counters.

    The trajectory store and epoch records are emission payload, not part
    of the serialized report (report.json points at the CSVs instead);
    they are excluded from equality.
    """
    code_version: str
    config: dict
    pairs: list[PairResult]
    final_chief_orbit: dict
    elapsed_s: float
    orbits_completed: int
    epochs: int
    plan_failures: int
    aborted: bool
    trajectory_files: list[str]
    schema: int = REPORT_SCHEMA_VERSION
    trajectories: TrajectoryStore | None = field(default=None, compare=False, repr=False)
    epoch_records: list[EpochRecord] = field(default_factory=list, compare=False, repr=False)

    @property
    def elapsed_months(self) -> float:
        return self.elapsed_s / (30.44 * 86400.0)

    def to_json_dict(self) -> dict:
        return {
            "schema": self.schema,
            "code_version": self.code_version,
            "config": self.config,
            "pairs": [
                {
                    "pair": p.pair,
                    "t_f_months": p.t_f_months,
                    "d_theta_f_deg": p.d_theta_f_deg,
                    "d_raan_f_deg": p.d_raan_f_deg,
                    "spherical_distance_km": p.spherical_distance_km,
                }
                for p in self.pairs
            ],
            "final_chief_orbit": self.final_chief_orbit,
            "elapsed_s": self.elapsed_s,
            "elapsed_months": self.elapsed_months,
            "orbits_completed": self.orbits_completed,
            "epochs": self.epochs,
            "plan_failures": self.plan_failures,
            "aborted": self.aborted,
            "trajectory_files": list(self.trajectory_files),
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "SimulationReport":
        return cls(
            schema=d["schema"],
            code_version=d["code_version"],
            config=d["config"],
            pairs=[PairResult(
                pair=p["pair"],
                t_f_months=p["t_f_months"],
                d_theta_f_deg=p["d_theta_f_deg"],
                d_raan_f_deg=p["d_raan_f_deg"],
                spherical_distance_km=p["spherical_distance_km"],
            ) for p in d["pairs"]],
            final_chief_orbit=d["final_chief_orbit"],
            elapsed_s=d["elapsed_s"],
            orbits_completed=d["orbits_completed"],
            epochs=d["epochs"],
            plan_failures=d["plan_failures"],
            aborted=d["aborted"],
            trajectory_files=list(d["trajectory_files"]),
        )


def read_report(path: str | Path) -> SimulationReport:
    with open(path) as f:
        return SimulationReport.from_json_dict(json.load(f))


def write_report(report: SimulationReport, out_dir: str | Path) -> SimulationReport:
    """Emit report.json, pairs.csv, per-satellite trajectories, and the
    plot series; returns the report with trajectory_files filled in."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc

    traj_files: list[str] = []
    store = report.trajectories
    if store is not None:
        for q, col in enumerate(store.cols):
            name = f"traj_sat{q + 1}.csv"
            path = out / name
            with open(path, "w") as f:
                f.write(",".join(TRAJ_HEADER) + "\n")
                for k, t in enumerate(store.times):
                    x, y, z = col["pos"][k]
                    vx, vy, vz = col["vel"][k]
                    f.write(
                        f"{t!r},{q + 1},{x!r},{y!r},{z!r},{vx!r},{vy!r},{vz!r},"
                        f"{col['a'][k]!r},{col['e'][k]!r},"
                        f"{math.degrees(col['inc'][k])!r},"
                        f"{math.degrees(col['raan_cum'][k])!r},"
                        f"{math.degrees(col['theta_cum'][k])!r},"
                        f"{col['u'][k]!r}\n"
                    )
            traj_files.append(name)

    with open(out / "pairs.csv", "w") as f:
        f.write("pair,t_f_months,d_theta_f_deg,d_raan_f_deg,spherical_distance_km\n")
        for p in report.pairs:
            f.write(
                f"{p.pair},{p.t_f_months!r},{p.d_theta_f_deg!r},"
                f"{p.d_raan_f_deg!r},{p.spherical_distance_km!r}\n"
            )

    if report.epoch_records:
        with open(out / "plot_controls.csv", "w") as f:
            f.write("t_s,sat_id,u,alt_km\n")
            for rec in report.epoch_records:
                for q, (u, alt) in enumerate(zip(rec.u, rec.alt_km)):
                    f.write(f"{rec.t_s!r},{q + 1},{u!r},{alt!r}\n")
        with open(out / "plot_pairs.csv", "w") as f:
            f.write("t_s,pair,d_theta_deg,d_raan_deg,d_a_m\n")
            for rec in report.epoch_records:
                for q in range(len(rec.d_theta_deg)):
                    f.write(
                        f"{rec.t_s!r},1-{q + 2},{rec.d_theta_deg[q]!r},"
                        f"{rec.d_raan_deg[q]!r},{rec.d_a_m[q]!r}\n"
                    )

    final = SimulationReport(
        code_version=report.code_version,
        config=report.config,
        pairs=report.pairs,
        final_chief_orbit=report.final_chief_orbit,
        elapsed_s=report.elapsed_s,
        orbits_completed=report.orbits_completed,
        epochs=report.epochs,
        plan_failures=report.plan_failures,
        aborted=report.aborted,
        trajectory_files=traj_files,
        schema=report.schema,
        trajectories=report.trajectories,
        epoch_records=report.epoch_records,
    )
    with open(out / "report.json", "w") as f:
        json.dump(final.to_json_dict(), f, indent=2)
        f.write("\n")
    return final

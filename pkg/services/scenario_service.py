"""
Scenario Service - orchestrates one configured run (propagate -> phase -> thermo -> gravity
-> reduction), parameter sweeps over it, and the files both emit.

Every stage runs even when an earlier independent stage failed; failures are captured in the
report as {stage, code, message} records and the run's exit status is the worst among them.
"""
import logging
import os
import platform
from dataclasses import dataclass, field
from datetime import datetime, timezone
from importlib import metadata
from typing import Callable, Dict, List, Optional, Tuple

import pandas as pd
from joblib import Parallel, delayed

from config import ScenarioConfig
from errors import ConfigValidationError, PhaseLabError
from models import PhaseDecomposition, RunReport, Trajectory
from services.geometry_service import GeometryService
from services.gravity_service import GravityService
from services.phase_service import PhaseService
from services.propagator_service import PropagatorService
from services.reduction_service import ReductionService
from services.report_service import ReportService
from services.thermo_service import ThermoService

logger = logging.getLogger(__name__)

PROVENANCE_PACKAGES = ("numpy", "scipy", "pandas", "scikit-learn", "joblib", "sqlalchemy", "click")
PLOT_SERIES = ("norm", "fidelity", "adiabaticity", "R", "betaR")


@dataclass
class ScenarioOutcome:
    """A RunReport plus the tables it was computed from."""
    report: RunReport
    frames: Dict[str, pd.DataFrame] = field(default_factory=dict)


@dataclass
class SweepResult:
    parameter: str
    values: Tuple[float, ...]
    reports: List[RunReport]
    frame: pd.DataFrame

    @property
    def exit_status(self) -> int:
        return max((r.exit_status for r in self.reports), default=0)


def package_versions() -> Dict[str, str]:
    versions = {"python": platform.python_version()}
    for name in PROVENANCE_PACKAGES:
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = "unknown"
    return versions


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


class ScenarioService:
    """Service for running scenarios and sweeps."""

    @staticmethod
    def resolve_j0(config: ScenarioConfig) -> int:
        if config.run.j0 != "auto":
            return int(config.run.j0)
        gamma0 = GeometryService.gamma_of(config.profile, config.thermo, config.run.t0)
        return GeometryService.initial_index(gamma0, config.model.n)

    @staticmethod
    def execute(config: ScenarioConfig) -> ScenarioOutcome:
        """Run every stage of a scenario without touching the filesystem."""
        model, profile, thermo = config.model, config.profile, config.thermo
        constants, run = config.constants, config.run
        hbar = constants.hbar
        report = RunReport(scenario=config.name, config_hash=config.config_hash())
        frames: Dict[str, pd.DataFrame] = {}

        def stage(name: str, action: Callable[[], object]):
            try:
                return action()
            except PhaseLabError as exc:
                logger.warning("stage %s failed: %s", name, exc)
                report.errors.append(exc.to_dict(stage=name))
                report.exit_status = max(report.exit_status, exc.exit_status)
                return None

        j0 = stage("index", lambda: ScenarioService.resolve_j0(config))
        report.j0 = j0
        path = stage(
            "geometry",
            lambda: GeometryService.curvature_path(
                profile, thermo, run.t0, run.t1, run.path_samples
            ),
        )
        if path is not None:
            frames["curvature_path"] = path.to_frame()
        if j0 is None:
            return ScenarioOutcome(report=report, frames=frames)

        traj: Optional[Trajectory] = stage(
            "propagate",
            lambda: PropagatorService.propagate(
                model, profile, thermo, j0, run.t0, run.t1, run.steps, hbar, run.gap_floor
            ),
        )
        if traj is not None:
            fidelity = PropagatorService.instantaneous_fidelity(traj, model, profile, thermo, j0)
            eps = PropagatorService.adiabaticity_series(
                model, profile, thermo, traj.times, hbar, run.gap_floor
            )
            frames["trajectory"] = traj.to_frame(fidelity, eps)
            report.trajectory = {
                "steps": run.steps,
                "step_size": traj.step_size,
                "norm_drift": traj.norm_drift,
                "adiabaticity_max": traj.adiabaticity_max,
                "final_fidelity": float(fidelity[-1]),
            }
            phase: Optional[PhaseDecomposition] = stage(
                "phase",
                lambda: PhaseService.decompose(
                    traj, model, profile, thermo, j0, run.bounds, hbar, run.fidelity_threshold
                ),
            )
            report.phase = phase

        report.thermo = stage(
            "thermo",
            lambda: ThermoService.thermo_report(
                model, profile, thermo, j0, run.t0, run.t1, run.omega, run.fd_step, hbar
            ),
        )
        report.gravity = stage(
            "gravity",
            lambda: GravityService.gravity_report(
                model, profile, thermo, j0, run.t0, run.t1, constants
            ),
        )
        if config.reduction is not None:
            report.reduction = stage(
                "reduction", lambda: ScenarioService._reduction(config, frames)
            )
        return ScenarioOutcome(report=report, frames=frames)

    @staticmethod
    def _reduction(config: ScenarioConfig, frames: Dict[str, pd.DataFrame]) -> dict:
        spec, run = config.reduction, config.run
        scan = ReductionService.uniformity_scan(
            spec.L_start, spec.count, spec.n, spec.stride, spec.workers
        )
        frames["reduction_histogram"] = scan.to_frame()
        centre = spec.L_start if spec.sensitivity_L is None else spec.sensitivity_L
        sensitivity = ReductionService.sensitivity_map(centre, spec.n, spec.radius)
        summary = {
            "n": spec.n,
            "chi_square": scan.chi_square,
            "p_value": scan.p_value,
            "dof": scan.dof,
            "change_fraction": sensitivity.change_fraction,
            "correspondence": spec.correspondence,
            "agreement_rate": None,
        }
        if spec.correspondence != "none":
            times = GeometryService.time_grid(run.t0, run.t1, max(spec.samples, 2))
            if spec.correspondence == "matched":
                series = ReductionService.matched_scale_series(
                    config.profile, config.thermo, times, spec.n, spec.offset_multiple
                )
            else:
                series = ReductionService.independent_scale_series(len(times), spec.seed)
            correspondence = ReductionService.correspondence_report(
                series, spec.n, config.profile, config.thermo, times
            )
            frames["correspondence"] = correspondence.to_frame()
            summary["agreement_rate"] = correspondence.agreement_rate
        return summary

    # ============================================
    # OUTPUTS
    # ============================================

    @staticmethod
    def write_outcome(config: ScenarioConfig, outcome: ScenarioOutcome, out_dir: str) -> List[str]:
        """Write the report, its tables and a provenance file; returns the written paths."""
        ReportService.ensure_dir(out_dir)
        written = []
        if config.outputs.format == "csv":
            row = ReportService.report_row(outcome.report)
            written.append(
                ReportService.write_frame(
                    os.path.join(out_dir, "report.csv"), ReportService.reports_frame([row])
                )
            )
        else:
            written.append(
                ReportService.write_json(
                    os.path.join(out_dir, "report.json"), outcome.report.to_dict()
                )
            )
        for name, frame in outcome.frames.items():
            if name == "trajectory" and not config.outputs.trajectory:
                continue
            if name == "curvature_path" and not config.outputs.curvature_path:
                continue
            written.append(ReportService.write_frame(os.path.join(out_dir, f"{name}.csv"), frame))
        written.append(
            ReportService.write_json(
                os.path.join(out_dir, "provenance.json"), outcome.report.provenance
            )
        )
        return written

    @staticmethod
    def run_scenario(config: ScenarioConfig, out_dir: Optional[str] = None) -> RunReport:
        """Execute a scenario and, when `out_dir` is given, write its outputs there."""
        started = _now()
        outcome = ScenarioService.execute(config)
        outcome.report.provenance = {
            "scenario": config.name,
            "config_hash": outcome.report.config_hash,
            "started_at": started,
            "finished_at": _now(),
            "versions": package_versions(),
            "config": config.to_dict(),
        }
        if out_dir is not None:
            ScenarioService.write_outcome(config, outcome, out_dir)
        return outcome.report

    @staticmethod
    def run_sweep(
        config: ScenarioConfig, threads: int = 1, out_dir: Optional[str] = None
    ) -> SweepResult:
        """
        One independent run per sweep value, rows in the given order. A failing row is
        recorded and the sweep continues.
        """
        sweep = config.sweep
        if sweep is None:
            raise ConfigValidationError(["sweep: section required for a sweep run"])

        def one(value: float) -> RunReport:
            try:
                row_config = config.with_override(sweep.parameter, value)
            except PhaseLabError as exc:
                report = RunReport(scenario=config.name, config_hash=config.config_hash())
                report.errors.append(exc.to_dict(stage="config"))
                report.exit_status = exc.exit_status
                return report
            return ScenarioService.execute(row_config).report

        reports = Parallel(n_jobs=max(1, threads), prefer="threads")(
            delayed(one)(value) for value in sweep.values
        )
        rows = [
            ReportService.report_row(
                report, {"sweep_parameter": sweep.parameter, "sweep_value": value}
            )
            for report, value in zip(reports, sweep.values)
        ]
        result = SweepResult(
            parameter=sweep.parameter,
            values=sweep.values,
            reports=list(reports),
            frame=ReportService.reports_frame(rows),
        )
        if out_dir is not None:
            ReportService.ensure_dir(out_dir)
            if config.outputs.format == "json":
                ReportService.write_json(
                    os.path.join(out_dir, "sweep.json"),
                    [
                        {"sweep_value": v, **r.to_dict()}
                        for v, r in zip(sweep.values, result.reports)
                    ],
                )
            else:
                ReportService.write_frame(os.path.join(out_dir, "sweep.csv"), result.frame)
            ReportService.write_json(
                os.path.join(out_dir, "provenance.json"),
                {
                    "scenario": config.name,
                    "config_hash": config.config_hash(),
                    "written_at": _now(),
                    "versions": package_versions(),
                    "config": config.to_dict(),
                },
            )
        logger.info("sweep over %s finished with %d rows", sweep.parameter, len(rows))
        return result

    @staticmethod
    def plot_data(config: ScenarioConfig, threads: int = 1) -> pd.DataFrame:
        """Tidy long-format (series, x, y) table of the scenario's time series."""
        outcome = ScenarioService.execute(config)
        tables = []
        for name in ("trajectory", "curvature_path"):
            frame = outcome.frames.get(name)
            if frame is not None:
                tidy = ReportService.long_format(frame, "t", list(PLOT_SERIES))
                tidy["series"] = name + "." + tidy["series"]
                tables.append(tidy)
        if config.sweep is not None:
            sweep = ScenarioService.run_sweep(config, threads=threads).frame
            tidy = ReportService.long_format(
                sweep, "sweep_value", ["residual", "ln_Z", "E_fd", "cosmological_constant"]
            )
            tidy["series"] = "sweep." + tidy["series"]
            tables.append(tidy)
        if not tables:
            return pd.DataFrame(columns=["series", "x", "y"])
        return pd.concat(tables, ignore_index=True)

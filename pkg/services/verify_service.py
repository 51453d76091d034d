"""
Verify Service - the built-in acceptance suite.

Each criterion is a function returning a CriterionResult; failures are reported, never raised.
Results are deterministic (seeded draws, fixed grids) so repeated runs write identical files.
"""
import filecmp
import glob
import logging
import math
import os
import tempfile
from dataclasses import dataclass, replace
from typing import Callable, List, Optional, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from config import load_config
from errors import PhaseLabError
from models import (
    BoundsReading,
    CurvatureProfile,
    LeibnizVariant,
    ModelKind,
    PhysicalConstants,
    ProfileKind,
    QuantumModel,
    ThermoParams,
)
from services.numerics import is_monotone_nonincreasing
from services.gravity_service import GravityService
from services.phase_service import PhaseService
from services.propagator_service import PropagatorService
from services.reduction_service import ReductionService
from services.report_service import ReportService
from services.scenario_service import ScenarioService
from services.thermo_service import ThermoService

logger = logging.getLogger(__name__)

SCENARIO_DIR = os.path.join(os.path.dirname(os.path.dirname(__file__)), "scenarios")
REPRODUCIBILITY_SCENARIO = "gauge_ladder_ramp"
SEED = 20240601


@dataclass
class CriterionResult:
    name: str
    passed: bool
    metric: float
    detail: str


@dataclass
class VerifySummary:
    results: List[CriterionResult]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "criterion": [r.name for r in self.results],
                "passed": [int(r.passed) for r in self.results],
                "metric": [r.metric for r in self.results],
                "detail": [r.detail for r in self.results],
            }
        )


def _scenario_paths(scenario_dir: str) -> List[str]:
    return sorted(glob.glob(os.path.join(scenario_dir, "*.json")))


# ============================================
# CRITERIA
# ============================================

def check_constants(constants: PhysicalConstants) -> CriterionResult:
    expected = 8.0 * math.pi * constants.G / constants.c**4
    error = abs(constants.kappa - expected) / expected
    return CriterionResult(
        "constants", constants.kappa_consistent(), error, f"kappa={constants.kappa:.16e}"
    )


def check_unitarity(scenario_dir: str) -> CriterionResult:
    worst, failures = 0.0, []
    for path in _scenario_paths(scenario_dir):
        config = load_config(path)
        run = config.run
        try:
            traj = PropagatorService.propagate(
                config.model,
                config.profile,
                config.thermo,
                ScenarioService.resolve_j0(config),
                run.t0,
                run.t1,
                max(run.steps, 10_000),
                config.constants.hbar,
                run.gap_floor,
            )
            worst = max(worst, traj.norm_drift)
        except PhaseLabError as exc:
            failures.append(f"{config.name}: {exc.code}")
    passed = not failures and worst < 1e-9
    detail = "; ".join(failures) or f"max norm drift {worst:.3e}"
    return CriterionResult("unitarity", passed, worst, detail)


def check_holonomy() -> CriterionResult:
    """Spin-cone loops at sweep rate 1e-3 against −π(1 − cosθ)."""
    rate = 1e-3
    worst, parts = 0.0, []
    for theta in (math.pi / 6, math.pi / 3, math.pi / 2):
        model = QuantumModel(ModelKind.SPIN_CONE, cone_angle=theta, field_strength=4.0)
        profile = CurvatureProfile(ProfileKind.LINEAR_RAMP, rate=rate)
        thermo = ThermoParams(beta=1.0)
        traj = PropagatorService.propagate(
            model, profile, thermo, 0, 0.0, 2.0 * math.pi / rate, 20_000
        )
        numeric = PhaseService.geometric_phase_numeric(traj, model, profile, thermo, 0)
        error = abs(numeric + math.pi * (1.0 - math.cos(theta)))
        worst = max(worst, error)
        parts.append(f"{theta:.4f}:{error:.2e}")
    return CriterionResult("holonomy", worst < 1e-3, worst, " ".join(parts))


def check_phase_agreement() -> CriterionResult:
    """Gauge-ladder quarter periods of a sinusoid; residual below 1e-3 and shrinking as it slows."""
    model = QuantumModel(
        ModelKind.GAUGE_LADDER, n=3, tilt=0.2, gauge_rates=(0.5, 1.0, 1.5)
    )
    thermo = ThermoParams(beta=0.8)
    residuals = []
    for period in (50.0, 100.0, 200.0):
        profile = CurvatureProfile(
            ProfileKind.SINUSOIDAL, r_base=2.0, amplitude=0.5, period=period
        )
        # open arc R: 2.0 -> 2.5 at a fixed step size of 0.01
        t1 = period / 4.0
        traj = PropagatorService.propagate(model, profile, thermo, 1, 0.0, t1, int(t1 * 100))
        decomposition = PhaseService.decompose(traj, model, profile, thermo, 1, BoundsReading.R)
        residuals.append(decomposition.residual)
    worst = max(residuals)
    passed = worst < 1e-3 and is_monotone_nonincreasing(residuals, atol=1e-10)
    detail = " ".join(f"{r:.2e}" for r in residuals)
    return CriterionResult("phase_agreement", passed, worst, detail)


def _random_model(kind: ModelKind, rng: np.random.Generator) -> QuantumModel:
    if kind == ModelKind.SPIN_CONE:
        return QuantumModel(
            kind,
            cone_angle=float(rng.uniform(0.1, math.pi - 0.1)),
            field_strength=float(rng.uniform(0.5, 2.0)),
        )
    if kind == ModelKind.BETA_LADDER:
        # positive rates and coupling keep ⟨E⟩ bounded away from zero
        rates, coupling = rng.uniform(0.5, 2.0, size=3), float(rng.uniform(0.1, 1.0))
    else:
        rates, coupling = rng.uniform(-2.0, 2.0, size=3), 0.0
    return QuantumModel(
        kind,
        n=3,
        level_spacing=float(rng.uniform(0.5, 2.0)),
        tilt=float(rng.uniform(-0.5, 0.5)),
        gauge_rates=tuple(float(w) for w in rates),
        beta_coupling=coupling,
    )


def check_thermo_oracle(draws: int = 20) -> CriterionResult:
    rng = np.random.default_rng(SEED)
    worst_oracle, worst_negation = 0.0, 0.0
    for kind in ModelKind:
        for _ in range(draws):
            model = _random_model(kind, rng)
            R0, delta_R = float(rng.uniform(-1.0, 1.0)), float(rng.uniform(0.5, 3.0))
            profile = CurvatureProfile(ProfileKind.LINEAR_RAMP, r_base=R0, rate=delta_R)
            thermo = ThermoParams(beta=float(rng.uniform(0.1, 2.0)))
            j = int(rng.integers(0, model.n))
            fd = ThermoService.expected_energy_fd(model, profile, thermo, j, 0.0, 1.0, 1e-4)
            consistent = ThermoService.expected_energy_leibniz(
                model, profile, thermo, j, 0.0, 1.0, LeibnizVariant.CONSISTENT
            )
            paper = ThermoService.expected_energy_leibniz(
                model, profile, thermo, j, 0.0, 1.0, LeibnizVariant.PAPER
            )
            tolerance = max(1e-6 * abs(fd), 1e-9)
            worst_oracle = max(worst_oracle, abs(consistent - fd) / tolerance)
            worst_negation = max(worst_negation, abs(paper + consistent))
    passed = worst_oracle <= 1.0 and worst_negation <= 1e-12
    detail = f"oracle/tolerance {worst_oracle:.3e}; negation {worst_negation:.1e}"
    return CriterionResult("thermo_oracle", passed, worst_oracle, detail)


def check_einstein_trace(constants: PhysicalConstants) -> CriterionResult:
    constants = replace(constants, dimension=4)
    worst = 0.0
    for beta in np.linspace(-2.0, 0.99, 10):
        for delta_R in np.linspace(0.1, 10.0, 10):
            residual = GravityService.trace_consistency(float(beta), float(delta_R), constants)
            scale = abs(GravityService.einstein_trace_energy(float(delta_R), constants, 0.0))
            worst = max(worst, abs(residual) / scale)
    return CriterionResult("einstein_trace", worst < 1e-12, worst, f"max relative {worst:.2e}")


def check_cosmological_constant() -> CriterionResult:
    planck = PhysicalConstants()
    profile = CurvatureProfile(ProfileKind.LINEAR_RAMP, r_base=1.0, rate=2.0)
    thermo = ThermoParams(beta=0.8)
    gauge = QuantumModel(ModelKind.GAUGE_LADDER, n=3, gauge_rates=(0.5, 1.0, 1.5))
    lam_gauge = GravityService.cosmological_constant(gauge, profile, thermo, 0, 0.0, 1.0, planck)

    eta = 0.5
    beta_ladder = QuantumModel(
        ModelKind.BETA_LADDER, n=3, gauge_rates=(0.5, 1.0, 1.5), beta_coupling=eta
    )
    lam = GravityService.cosmological_constant(beta_ladder, profile, thermo, 0, 0.0, 1.0, planck)
    closed = -2.0 * math.pi * eta * thermo.beta**2 * 2.0
    relative = abs(lam - closed) / abs(closed)
    exponents = GravityService.scaling_exponents(
        beta_ladder, profile, thermo, 0, 0.0, 1.0, planck,
        etas=(0.25, 0.5, 1.0, 2.0), betas=(0.25, 0.5, 1.0, 2.0),
    )
    exponent_error = max(abs(exponents["eta"] - 1.0), abs(exponents["beta"] - 2.0))
    passed = abs(lam_gauge) <= 1e-15 and relative <= 1e-10 and exponent_error <= 1e-6
    detail = (
        f"gauge {lam_gauge:.1e}; closed-form rel {relative:.1e}; "
        f"exponents eta={exponents['eta']:.8f} beta={exponents['beta']:.8f}"
    )
    return CriterionResult("cosmological_constant", passed, relative, detail)


def check_reduction_rule() -> CriterionResult:
    pairs = ReductionService.random_pairs(10_000, SEED)
    mismatches = sum(
        ReductionService.index_mod(L, n) != ReductionService.oracle_remainder(L, n)
        for L, n in pairs
    )
    scan = ReductionService.uniformity_scan(0, 100_000, 101)

    profile = CurvatureProfile(ProfileKind.LINEAR_RAMP, r_base=0.0, rate=0.5)
    thermo = ThermoParams(beta=1.0)
    times = np.linspace(0.0, 100.0, 200)
    matched = ReductionService.correspondence_report(
        ReductionService.matched_scale_series(profile, thermo, times, 7, 2),
        7, profile, thermo, times,
    )
    n_independent = 10
    times_independent = np.linspace(0.0, 100.0, 5000)
    independent = ReductionService.correspondence_report(
        ReductionService.independent_scale_series(times_independent.size, SEED),
        n_independent, profile, thermo, times_independent,
    )
    baseline_gap = abs(independent.agreement_rate - 1.0 / n_independent)
    passed = (
        mismatches == 0
        and scan.p_value > 1e-3
        and matched.agreement_rate == 1.0
        and baseline_gap <= 0.02
    )
    detail = (
        f"oracle mismatches {mismatches}; p={scan.p_value:.4f}; "
        f"matched {matched.agreement_rate:.3f}; independent {independent.agreement_rate:.4f}"
    )
    return CriterionResult("reduction_rule", passed, float(mismatches), detail)


def check_reproducibility(scenario_dir: str) -> CriterionResult:
    path = os.path.join(scenario_dir, f"{REPRODUCIBILITY_SCENARIO}.json")
    config = load_config(path)
    with tempfile.TemporaryDirectory() as first, tempfile.TemporaryDirectory() as second:
        ScenarioService.run_scenario(config, out_dir=first)
        ScenarioService.run_scenario(config, out_dir=second)
        names = sorted(n for n in os.listdir(first) if n != "provenance.json")
        _, mismatch, errors = filecmp.cmpfiles(first, second, names, shallow=False)
    differing = sorted(mismatch + errors)
    detail = f"compared {len(names)} files" + (f"; differ: {differing}" if differing else "")
    return CriterionResult("reproducibility", not differing, float(len(differing)), detail)


# ============================================
# SUITE
# ============================================

class VerifyService:
    """Service for the acceptance suite."""

    @staticmethod
    def criteria(
        constants: Optional[PhysicalConstants] = None, scenario_dir: str = SCENARIO_DIR
    ) -> List[Tuple[str, Callable[[], CriterionResult]]]:
        constants = constants or PhysicalConstants()
        return [
            ("constants", lambda: check_constants(constants)),
            ("unitarity", lambda: check_unitarity(scenario_dir)),
            ("holonomy", check_holonomy),
            ("phase_agreement", check_phase_agreement),
            ("thermo_oracle", check_thermo_oracle),
            ("einstein_trace", lambda: check_einstein_trace(constants)),
            ("cosmological_constant", check_cosmological_constant),
            ("reduction_rule", check_reduction_rule),
            ("reproducibility", lambda: check_reproducibility(scenario_dir)),
        ]

    @staticmethod
    def _guarded(name: str, criterion: Callable[[], CriterionResult]) -> CriterionResult:
        try:
            return criterion()
        except PhaseLabError as exc:
            return CriterionResult(name, False, float("nan"), f"{exc.code}: {exc}")

    @staticmethod
    def run_all(
        threads: int = 1,
        out_dir: Optional[str] = None,
        constants: Optional[PhysicalConstants] = None,
        scenario_dir: str = SCENARIO_DIR,
    ) -> VerifySummary:
        """Run every criterion (concurrently up to `threads`) in a fixed reporting order."""
        criteria = VerifyService.criteria(constants, scenario_dir)
        results = Parallel(n_jobs=max(1, threads), prefer="threads")(
            delayed(VerifyService._guarded)(name, criterion) for name, criterion in criteria
        )
        summary = VerifySummary(results=list(results))
        for result in summary.results:
            verdict = "PASS" if result.passed else "FAIL"
            logger.info("%s %s: %s", verdict, result.name, result.detail)
        if out_dir is not None:
            ReportService.ensure_dir(out_dir)
            ReportService.write_frame(os.path.join(out_dir, "verify.csv"), summary.to_frame())
        return summary

"""
Domain models for the curvature phase lab.

Value types (quantum models, curvature profiles, thermodynamic parameters, constants and the
result records every service returns) plus the SQLAlchemy table behind the run ledger.
"""
import enum
import math
from dataclasses import dataclass, field, replace
from datetime import datetime
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from sqlalchemy import Column, DateTime, Float, Integer, String

from database import Base
from errors import DomainError


# ============================================
# ENUMS
# ============================================

class ModelKind(enum.Enum):
    GAUGE_LADDER = "gauge-ladder"
    BETA_LADDER = "beta-ladder"
    SPIN_CONE = "spin-cone"


class ProfileKind(enum.Enum):
    CONSTANT = "constant"
    LINEAR_RAMP = "linear-ramp"
    SINUSOIDAL = "sinusoidal"
    GAUSSIAN_PULSE = "gaussian-pulse"


class BoundsReading(enum.Enum):
    U = "u"  # integrate over u = βR between βR(t0) and βR(t1)
    R = "R"  # integrate over R between R(t0) and R(t1)


class LeibnizVariant(enum.Enum):
    PAPER = "paper"
    CONSISTENT = "consistent"


class RunStatus(enum.Enum):
    OK = "ok"
    FAILED = "failed"


def _require_finite(owner: str, **values: float) -> None:
    for name, value in values.items():
        if not math.isfinite(value):
            raise DomainError(f"{owner}.{name} must be finite, got {value!r}")


# ============================================
# QUANTUM MODEL
# ============================================

@dataclass(frozen=True)
class QuantumModel:
    """A closed-form family of Hamiltonians parametrized by a real γ."""

    kind: ModelKind
    n: int = 2
    level_spacing: float = 1.0
    base_energy: float = 0.0
    tilt: float = 0.0
    gauge_rates: Tuple[float, ...] = ()
    beta_coupling: float = 0.0
    cone_angle: float = math.pi / 2
    field_strength: float = 1.0

    def __post_init__(self):
        if isinstance(self.n, bool) or not isinstance(self.n, int) or self.n < 2:
            raise DomainError(f"model dimension n must be an integer >= 2, got {self.n!r}")
        if self.kind == ModelKind.SPIN_CONE and self.n != 2:
            raise DomainError("spin-cone is a two-level model (n = 2)")
        rates = tuple(float(w) for w in self.gauge_rates) or (0.0,) * self.n
        if len(rates) != self.n:
            raise DomainError(f"gauge_rates needs {self.n} entries, got {len(rates)}")
        object.__setattr__(self, "gauge_rates", rates)
        _require_finite(
            "model",
            level_spacing=self.level_spacing,
            base_energy=self.base_energy,
            tilt=self.tilt,
            beta_coupling=self.beta_coupling,
            cone_angle=self.cone_angle,
            field_strength=self.field_strength,
        )
        if not all(math.isfinite(w) for w in rates):
            raise DomainError("model.gauge_rates must be finite")
        # energy-ordered indexing: E_j(0) nondecreasing in j
        if self.level_spacing < 0:
            raise DomainError("level_spacing must be >= 0 so that indices are energy-ordered")
        if self.field_strength <= 0:
            raise DomainError("spin-cone field magnitude must be positive")

    def rate(self, j: int) -> float:
        return self.gauge_rates[j]


@dataclass(frozen=True)
class Connection:
    """Real Berry connection A_j(γ;β) = −i⟨φ_j|∂_γ φ_j⟩ (+ explicit β term)."""

    value: float
    index: int
    gamma: float


# ============================================
# CURVATURE AND THERMODYNAMICS
# ============================================

@dataclass(frozen=True)
class CurvatureProfile:
    """Scalar curvature R(r, t) at a fixed labelled point r, varying in t only."""

    kind: ProfileKind
    r_base: float = 0.0
    amplitude: float = 0.0
    rate: float = 0.0
    period: float = 1.0
    center: float = 0.0
    width: float = 1.0
    t_min: float = -math.inf
    t_max: float = math.inf
    point: Tuple[float, ...] = (0.0,)

    def __post_init__(self):
        _require_finite(
            "profile",
            r_base=self.r_base,
            amplitude=self.amplitude,
            rate=self.rate,
            period=self.period,
            center=self.center,
            width=self.width,
        )
        if self.kind == ProfileKind.SINUSOIDAL and self.period <= 0:
            raise DomainError("sinusoidal profile needs period > 0")
        if self.kind == ProfileKind.GAUSSIAN_PULSE and self.width <= 0:
            raise DomainError("gaussian-pulse profile needs width > 0")
        if math.isnan(self.t_min) or math.isnan(self.t_max) or self.t_min > self.t_max:
            raise DomainError(f"profile interval [{self.t_min}, {self.t_max}] is empty")
        object.__setattr__(self, "point", tuple(float(x) for x in self.point))


@dataclass(frozen=True)
class ThermoParams:
    """Thermodynamic β = 1/(K_B·T) and the units factor that turns βR into a dimensionless γ."""

    beta: float
    k_b: float = 1.0
    gamma_scale: float = 1.0

    def __post_init__(self):
        _require_finite("thermo", beta=self.beta, k_b=self.k_b, gamma_scale=self.gamma_scale)
        if self.beta < 0:
            raise DomainError(f"beta must be >= 0, got {self.beta}")
        if self.k_b <= 0:
            raise DomainError("k_b must be positive")
        if self.gamma_scale == 0:
            raise DomainError("gamma_scale must be nonzero")

    @classmethod
    def from_temperature(cls, temperature: float, k_b: float = 1.0, gamma_scale: float = 1.0):
        if not temperature > 0:
            raise DomainError(f"temperature must be positive, got {temperature}")
        return cls(beta=1.0 / (k_b * temperature), k_b=k_b, gamma_scale=gamma_scale)

    @property
    def temperature(self) -> float:
        return math.inf if self.beta == 0 else 1.0 / (self.k_b * self.beta)

    def with_beta(self, beta: float) -> "ThermoParams":
        return replace(self, beta=beta)


@dataclass(frozen=True)
class PhysicalConstants:
    """G, c, ħ, K_B, Planck length and space-time dimension. Planck units by default."""

    G: float = 1.0
    c: float = 1.0
    hbar: float = 1.0
    k_b: float = 1.0
    planck_length: float = 1.0
    dimension: int = 4
    kappa_override: Optional[float] = None

    def __post_init__(self):
        _require_finite(
            "constants",
            G=self.G, c=self.c, hbar=self.hbar, k_b=self.k_b, planck_length=self.planck_length,
        )
        if min(self.G, self.c, self.hbar, self.k_b, self.planck_length) <= 0:
            raise DomainError("physical constants must be positive")
        if isinstance(self.dimension, bool) or not isinstance(self.dimension, int):
            raise DomainError("dimension must be an integer")
        if self.dimension < 2:
            raise DomainError(f"dimension must be >= 2, got {self.dimension}")

    @property
    def kappa(self) -> float:
        if self.kappa_override is not None:
            return self.kappa_override
        return 8.0 * math.pi * self.G / self.c**4

    def kappa_consistent(self, rtol: float = 1e-14) -> bool:
        expected = 8.0 * math.pi * self.G / self.c**4
        return abs(self.kappa - expected) <= rtol * abs(expected)


@dataclass(eq=False)
class CurvaturePath:
    """Uniform time grid with R, βR and dR/dt sampled on it."""

    t: np.ndarray
    R: np.ndarray
    beta_R: np.ndarray
    dR_dt: np.ndarray

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"t": self.t, "R": self.R, "betaR": self.beta_R, "dRdt": self.dR_dt})


# ============================================
# PROPAGATION AND PHASES
# ============================================

@dataclass(eq=False)
class Trajectory:
    """Propagated state vectors on a uniform time grid."""

    times: np.ndarray
    gammas: np.ndarray
    states: np.ndarray
    step_size: float
    norm_drift: float
    adiabaticity_max: float
    j0: int

    @property
    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.states, axis=1)

    def to_frame(
        self,
        fidelity: Optional[np.ndarray] = None,
        adiabaticity: Optional[np.ndarray] = None,
    ) -> pd.DataFrame:
        columns: Dict[str, np.ndarray] = {"t": self.times, "gamma": self.gammas}
        for k in range(self.states.shape[1]):
            columns[f"re_{k}"] = self.states[:, k].real
            columns[f"im_{k}"] = self.states[:, k].imag
        columns["norm"] = self.norms
        if fidelity is not None:
            columns["fidelity"] = fidelity
        if adiabaticity is not None:
            columns["adiabaticity"] = adiabaticity
        return pd.DataFrame(columns)


@dataclass(frozen=True)
class PhaseDecomposition:
    """Total exponent Ω split into dynamical and geometric parts."""

    omega_total: complex
    dynamical_angle: float
    geometric_angle_numeric: float
    geometric_angle_analytic: float
    residual: float
    omega_paper: complex
    geometric_angle_discrete: float
    min_fidelity: float
    bounds: BoundsReading

    def to_dict(self) -> dict:
        return {
            "omega_total": self.omega_total,
            "omega_paper": self.omega_paper,
            "dynamical_angle": self.dynamical_angle,
            "geometric_angle_numeric": self.geometric_angle_numeric,
            "geometric_angle_analytic": self.geometric_angle_analytic,
            "geometric_angle_discrete": self.geometric_angle_discrete,
            "residual": self.residual,
            "min_fidelity": self.min_fidelity,
            "bounds": self.bounds.value,
        }


# ============================================
# THERMODYNAMICS AND GRAVITY
# ============================================

@dataclass(frozen=True)
class LeibnizTerms:
    """The four terms of the β-derivative of β∫A du, signed per variant."""

    variant: LeibnizVariant
    integral: float
    upper: float
    lower: float
    extrinsic: float

    @property
    def total(self) -> float:
        return self.integral + self.upper + self.lower + self.extrinsic


@dataclass(frozen=True)
class ThermoReport:
    ln_Z: float
    E_fd: float
    E_leibniz_paper: float
    E_leibniz_consistent: float
    E_const_omega: Optional[float]
    E_extrinsic: Optional[float]
    delta_S: float
    intrinsic_terms: Tuple[float, float, float]
    extrinsic_term: float
    const_omega_discrepancy: Optional[float]
    identification_residual: float
    dynamical_residual: float

    def to_dict(self) -> dict:
        return {
            "ln_Z": self.ln_Z,
            "E_fd": self.E_fd,
            "E_leibniz_paper": self.E_leibniz_paper,
            "E_leibniz_consistent": self.E_leibniz_consistent,
            "E_const_omega": self.E_const_omega,
            "E_extrinsic": self.E_extrinsic,
            "delta_S": self.delta_S,
            "intrinsic_terms": list(self.intrinsic_terms),
            "extrinsic_term": self.extrinsic_term,
            "const_omega_discrepancy": self.const_omega_discrepancy,
            "identification_residual": self.identification_residual,
            "dynamical_residual": self.dynamical_residual,
        }


@dataclass(frozen=True)
class GravityReport:
    omega: float
    trace_energy: float
    trace_residual: float
    cosmological_constant: float

    def to_dict(self) -> dict:
        return {
            "omega": self.omega,
            "trace_energy": self.trace_energy,
            "trace_residual": self.trace_residual,
            "cosmological_constant": self.cosmological_constant,
        }


# ============================================
# STATE REDUCTION
# ============================================

@dataclass(frozen=True)
class ReductionSample:
    L: int
    n: int
    index: int
    gamma_index: int


@dataclass(eq=False)
class UniformityResult:
    histogram: np.ndarray
    chi_square: float
    p_value: float
    dof: int

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"residue": np.arange(len(self.histogram)), "count": self.histogram})


@dataclass(frozen=True)
class SensitivityMap:
    L: int
    n: int
    entries: Tuple[Tuple[int, int], ...]
    change_fraction: float


@dataclass(frozen=True)
class CorrespondenceRecord:
    t: float
    scale: int
    index: int
    gamma_index: int
    agree: bool


@dataclass(eq=False)
class CorrespondenceReport:
    records: List[CorrespondenceRecord]
    agreement_rate: float

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "t": [r.t for r in self.records],
                "scale": [str(r.scale) for r in self.records],
                "index": [r.index for r in self.records],
                "gamma_index": [r.gamma_index for r in self.records],
                "agree": [int(r.agree) for r in self.records],
            }
        )


# ============================================
# RUN REPORT
# ============================================

@dataclass
class RunReport:
    """Everything a scenario run produced. Failed stages are listed in `errors`."""

    scenario: str
    config_hash: str
    j0: Optional[int] = None
    trajectory: Dict[str, float] = field(default_factory=dict)
    phase: Optional[PhaseDecomposition] = None
    thermo: Optional[ThermoReport] = None
    gravity: Optional[GravityReport] = None
    reduction: Optional[dict] = None
    errors: List[dict] = field(default_factory=list)
    exit_status: int = 0
    provenance: Dict[str, object] = field(default_factory=dict)

    @property
    def status(self) -> RunStatus:
        return RunStatus.FAILED if self.errors else RunStatus.OK

    def to_dict(self) -> dict:
        """Data block of the report; provenance is kept apart so data stays reproducible."""
        return {
            "scenario": self.scenario,
            "config_hash": self.config_hash,
            "status": self.status.value,
            "j0": self.j0,
            "trajectory": dict(self.trajectory),
            "phase": self.phase.to_dict() if self.phase else None,
            "thermo": self.thermo.to_dict() if self.thermo else None,
            "gravity": self.gravity.to_dict() if self.gravity else None,
            "reduction": self.reduction,
            "errors": list(self.errors),
        }


# ============================================
# RUN LEDGER (persisted)
# ============================================

class RunRecord(Base):
    __tablename__ = "run_records"

    id = Column(Integer, primary_key=True, autoincrement=True)
    scenario = Column(String(255), nullable=False, index=True)
    config_hash = Column(String(64), nullable=False, index=True)
    sweep_parameter = Column(String(255), nullable=True)
    sweep_value = Column(Float, nullable=True)
    status = Column(String(16), nullable=False)
    error_code = Column(String(32), nullable=True)
    geometric_angle_numeric = Column(Float, nullable=True)
    geometric_angle_analytic = Column(Float, nullable=True)
    phase_residual = Column(Float, nullable=True)
    ln_z = Column(Float, nullable=True)
    expected_energy = Column(Float, nullable=True)
    cosmological_constant = Column(Float, nullable=True)
    trace_residual = Column(Float, nullable=True)
    created_at = Column(DateTime, default=datetime.utcnow)

    def __repr__(self):
        return f"<RunRecord {self.scenario} {self.status} ({self.config_hash[:8]})>"

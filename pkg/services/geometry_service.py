"""
Geometry Service - curvature profiles R(t) at a fixed point, the parameter γ = s·β·R and the
curvature-indexed choice of initial state.
"""
import logging
import math
from typing import Tuple, Union

import numpy as np

from errors import DomainError
from models import CurvaturePath, CurvatureProfile, ProfileKind, QuantumModel, ThermoParams
from services.model_service import QuantumModelService

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]


def _times(profile: CurvatureProfile, t: ArrayLike) -> np.ndarray:
    times = np.atleast_1d(np.asarray(t, dtype=float))
    if not np.all(np.isfinite(times)):
        raise DomainError("time must be finite")
    if np.any(times < profile.t_min) or np.any(times > profile.t_max):
        raise DomainError(
            f"time outside the profile interval [{profile.t_min}, {profile.t_max}]"
        )
    return times


class GeometryService:
    """Service for curvature profiles and the curvature index."""

    # ============================================
    # CURVATURE
    # ============================================

    @staticmethod
    def curvature_values(profile: CurvatureProfile, t: ArrayLike) -> np.ndarray:
        times = _times(profile, t)
        if profile.kind == ProfileKind.CONSTANT:
            return np.full_like(times, profile.r_base)
        if profile.kind == ProfileKind.LINEAR_RAMP:
            return profile.r_base + profile.rate * times
        if profile.kind == ProfileKind.SINUSOIDAL:
            # phase reduced mod 1 so that R(t + period) == R(t) exactly
            phase = np.mod(times / profile.period, 1.0)
            return profile.r_base + profile.amplitude * np.sin(2.0 * np.pi * phase)
        offset = (times - profile.center) / profile.width
        return profile.r_base + profile.amplitude * np.exp(-0.5 * offset**2)

    @staticmethod
    def curvature_rates(profile: CurvatureProfile, t: ArrayLike) -> np.ndarray:
        """Analytic dR/dt."""
        times = _times(profile, t)
        if profile.kind == ProfileKind.CONSTANT:
            return np.zeros_like(times)
        if profile.kind == ProfileKind.LINEAR_RAMP:
            return np.full_like(times, profile.rate)
        if profile.kind == ProfileKind.SINUSOIDAL:
            omega = 2.0 * np.pi / profile.period
            phase = np.mod(times / profile.period, 1.0)
            return profile.amplitude * omega * np.cos(2.0 * np.pi * phase)
        offset = (times - profile.center) / profile.width
        return -profile.amplitude * offset / profile.width * np.exp(-0.5 * offset**2)

    @staticmethod
    def curvature_at(profile: CurvatureProfile, t: float) -> float:
        return float(GeometryService.curvature_values(profile, t)[0])

    # ============================================
    # γ = s·β·R
    # ============================================

    @staticmethod
    def gamma_values(profile: CurvatureProfile, thermo: ThermoParams, t: ArrayLike) -> np.ndarray:
        scale = thermo.gamma_scale * thermo.beta
        return scale * GeometryService.curvature_values(profile, t)

    @staticmethod
    def gamma_rates(profile: CurvatureProfile, thermo: ThermoParams, t: ArrayLike) -> np.ndarray:
        scale = thermo.gamma_scale * thermo.beta
        return scale * GeometryService.curvature_rates(profile, t)

    @staticmethod
    def gamma_of(profile: CurvatureProfile, thermo: ThermoParams, t: float) -> float:
        return float(GeometryService.gamma_values(profile, thermo, t)[0])

    # ============================================
    # CURVATURE-INDEXED STATES
    # ============================================

    @staticmethod
    def initial_index(gamma0: float, n: int) -> int:
        """floor(γ0) mod n, always in [0, n)."""
        if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
            raise DomainError(f"n must be an integer, got {n!r}")
        if n <= 0:
            raise DomainError(f"n must be >= 1, got {n}")
        if not math.isfinite(gamma0):
            raise DomainError(f"gamma0 must be finite, got {gamma0}")
        # Python's % is the Euclidean remainder for positive n
        return math.floor(gamma0) % int(n)

    @staticmethod
    def index_trajectory(
        profile: CurvatureProfile, thermo: ThermoParams, n: int, times: ArrayLike
    ) -> Tuple[np.ndarray, int]:
        """Moving index floor(γ(t)) mod n along a grid, plus the number of index jumps."""
        gammas = GeometryService.gamma_values(profile, thermo, times)
        indices = np.array([GeometryService.initial_index(float(g), n) for g in gammas], dtype=int)
        jumps = int(np.count_nonzero(np.diff(indices)))
        return indices, jumps

    @staticmethod
    def indexed_state(
        model: QuantumModel,
        profile: CurvatureProfile,
        thermo: ThermoParams,
        t: float,
        t_ref: float,
    ) -> np.ndarray:
        """State with the index selected at t but evaluated at the fixed reference time."""
        j = GeometryService.initial_index(GeometryService.gamma_of(profile, thermo, t), model.n)
        return QuantumModelService.basis_state(
            model, j, GeometryService.gamma_of(profile, thermo, t_ref)
        )

    # ============================================
    # PATHS
    # ============================================

    @staticmethod
    def time_grid(t0: float, t1: float, samples: int) -> np.ndarray:
        if isinstance(samples, bool) or not isinstance(samples, (int, np.integer)) or samples < 2:
            raise DomainError(f"samples must be an integer >= 2, got {samples!r}")
        if not (math.isfinite(t0) and math.isfinite(t1)):
            raise DomainError("path bounds must be finite")
        if t1 < t0:
            raise DomainError(f"t1 ({t1}) must be >= t0 ({t0})")
        grid = np.linspace(t0, t1, int(samples))
        grid[-1] = t1
        return grid

    @staticmethod
    def curvature_path(
        profile: CurvatureProfile,
        thermo: ThermoParams,
        t0: float,
        t1: float,
        samples: int,
    ) -> CurvaturePath:
        t = GeometryService.time_grid(t0, t1, samples)
        R = GeometryService.curvature_values(profile, t)
        logger.debug("curvature path with %d samples on [%g, %g]", samples, t0, t1)
        return CurvaturePath(
            t=t,
            R=R,
            beta_R=thermo.gamma_scale * thermo.beta * R,
            dR_dt=GeometryService.curvature_rates(profile, t),
        )

    @staticmethod
    def bounds(
        profile: CurvatureProfile, thermo: ThermoParams, t0: float, t1: float
    ) -> Tuple[float, float, float, float]:
        """(R0, R1, u0, u1) with u = s·β·R, evaluated exactly like the path endpoints."""
        R0, R1 = GeometryService.curvature_values(profile, np.array([t0, t1]))
        scale = thermo.gamma_scale * thermo.beta
        return float(R0), float(R1), float(scale * R0), float(scale * R1)

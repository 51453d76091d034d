"""
Gravity Service - trace of the Einstein equations, the constant ω that makes the constant-ω
energy match it, and the cosmological-constant integral.
"""
import logging
import math
from dataclasses import replace
from typing import Dict, Sequence

import numpy as np

from errors import DomainError, SingularityError
from models import CurvatureProfile, GravityReport, PhysicalConstants, QuantumModel, ThermoParams
from services.geometry_service import GeometryService
from services.numerics import loglog_slope
from services.thermo_service import ThermoService

logger = logging.getLogger(__name__)


class GravityService:
    """Service for the Einstein-trace checks and the cosmological constant."""

    @staticmethod
    def einstein_trace_energy(R: float, constants: PhysicalConstants, lam: float = 0.0) -> float:
        """[R(1 − D/2) + ΛD]/κ."""
        if not (math.isfinite(R) and math.isfinite(lam)):
            raise DomainError("R and lambda must be finite")
        D = constants.dimension
        return (R * (1.0 - D / 2.0) + lam * D) / constants.kappa

    @staticmethod
    def omega_constant(beta: float, constants: PhysicalConstants) -> float:
        """ω = (1 − D/2)c⁴ / (8πG(1 − β)). β = 1 is a pole."""
        if not math.isfinite(beta):
            raise DomainError("beta must be finite")
        if beta == 1.0:
            raise SingularityError("omega constant has a pole at beta = 1")
        D = constants.dimension
        return (1.0 - D / 2.0) * constants.c**4 / (8.0 * math.pi * constants.G * (1.0 - beta))

    @staticmethod
    def trace_consistency(beta: float, deltaR: float, constants: PhysicalConstants) -> float:
        """Constant-ω energy with ω from omega_constant minus the Λ = 0 trace energy."""
        omega = GravityService.omega_constant(beta, constants)
        energy = ThermoService.expected_energy_const_omega(omega, beta, deltaR)
        return energy - GravityService.einstein_trace_energy(deltaR, constants, 0.0)

    @staticmethod
    def cosmological_constant(
        model: QuantumModel,
        profile: CurvatureProfile,
        thermo: ThermoParams,
        j: int,
        t0: float,
        t1: float,
        constants: PhysicalConstants,
    ) -> float:
        """Λ = −(β·8πG/(D·c⁴))·∫∂A/∂β du between the u = s·βR bounds."""
        integral = ThermoService.extrinsic_integral(model, profile, thermo, j, t0, t1)
        prefactor = thermo.beta * 8.0 * math.pi * constants.G
        prefactor /= constants.dimension * constants.c**4
        return -prefactor * integral

    @staticmethod
    def scaling_exponents(
        model: QuantumModel,
        profile: CurvatureProfile,
        thermo: ThermoParams,
        j: int,
        t0: float,
        t1: float,
        constants: PhysicalConstants,
        etas: Sequence[float],
        betas: Sequence[float],
    ) -> Dict[str, float]:
        """Fitted log-log slopes of |Λ| against η (at the configured β) and against β."""
        lam_eta = [
            GravityService.cosmological_constant(
                replace(model, beta_coupling=eta), profile, thermo, j, t0, t1, constants
            )
            for eta in etas
        ]
        lam_beta = [
            GravityService.cosmological_constant(
                model, profile, thermo.with_beta(beta), j, t0, t1, constants
            )
            for beta in betas
        ]
        exponents = {"eta": loglog_slope(etas, lam_eta), "beta": loglog_slope(betas, lam_beta)}
        logger.debug("cosmological constant scaling exponents %s", exponents)
        return exponents

    @staticmethod
    def gravity_report(
        model: QuantumModel,
        profile: CurvatureProfile,
        thermo: ThermoParams,
        j: int,
        t0: float,
        t1: float,
        constants: PhysicalConstants,
    ) -> GravityReport:
        R0, R1 = GeometryService.curvature_values(profile, np.array([t0, t1]))
        delta_R = float(R1 - R0)
        lam = GravityService.cosmological_constant(model, profile, thermo, j, t0, t1, constants)
        return GravityReport(
            omega=GravityService.omega_constant(thermo.beta, constants),
            trace_energy=GravityService.einstein_trace_energy(delta_R, constants, lam),
            trace_residual=GravityService.trace_consistency(thermo.beta, delta_R, constants),
            cosmological_constant=lam,
        )

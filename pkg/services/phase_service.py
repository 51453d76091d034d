"""
Phase Service - dynamical and geometric phases and the decomposition of the total exponent Ω.

Sign conventions: the exponent of the dynamical factor is i·θ_d with θ_d = −(1/ħ)∫E dt, and
the analytic geometric angle is −β∫A du with the real connection A = −i⟨φ|∂φ⟩.
"""
import logging

import numpy as np
from scipy.integrate import cumulative_trapezoid

from errors import NonAdiabaticError
from models import (
    BoundsReading,
    CurvatureProfile,
    PhaseDecomposition,
    QuantumModel,
    ThermoParams,
    Trajectory,
)
from services.geometry_service import GeometryService
from services.model_service import QuantumModelService, check_index
from services.numerics import simpson_integral, wrap_angle

logger = logging.getLogger(__name__)

FIDELITY_THRESHOLD = 0.99


class PhaseService:
    """Service for splitting accumulated phases."""

    @staticmethod
    def dynamical_phase(
        model: QuantumModel,
        profile: CurvatureProfile,
        thermo: ThermoParams,
        j: int,
        t0: float,
        t1: float,
        hbar: float = 1.0,
    ) -> float:
        """θ_d = −(1/ħ)∫ E_j(γ(t)) dt."""
        j = check_index(model, j)

        def energy(t: np.ndarray) -> np.ndarray:
            return QuantumModelService.eigen_energies(
                model, j, GeometryService.gamma_values(profile, thermo, t)
            )

        return -simpson_integral(energy, t0, t1) / hbar

    @staticmethod
    def geometric_phase_analytic(
        model: QuantumModel,
        profile: CurvatureProfile,
        thermo: ThermoParams,
        j: int,
        t0: float,
        t1: float,
        bounds: BoundsReading = BoundsReading.U,
    ) -> float:
        """
        −β∫A_j(u;β) du between u = s·βR(t0) and s·βR(t1).

        With `bounds=R` the integral runs over R instead, with A evaluated at u = s·βR.
        """
        j = check_index(model, j)
        beta = thermo.beta
        R0, R1, u0, u1 = GeometryService.bounds(profile, thermo, t0, t1)
        if bounds == BoundsReading.U:
            integral = simpson_integral(
                lambda u: QuantumModelService.connection_values(model, j, u, beta), u0, u1
            )
        else:
            scale = thermo.gamma_scale * beta
            integral = simpson_integral(
                lambda R: QuantumModelService.connection_values(model, j, scale * R, beta), R0, R1
            )
        return -beta * integral

    @staticmethod
    def eigenstate_overlaps(
        traj: Trajectory,
        model: QuantumModel,
        profile: CurvatureProfile,
        thermo: ThermoParams,
        j: int,
    ) -> np.ndarray:
        """⟨φ_j(γ(t))|ψ(t)⟩ on the trajectory grid."""
        gammas = GeometryService.gamma_values(profile, thermo, traj.times)
        phi = QuantumModelService.basis_states(model, j, gammas)
        return np.einsum("ij,ij->i", np.conj(phi), traj.states)

    @staticmethod
    def geometric_phase_numeric(
        traj: Trajectory,
        model: QuantumModel,
        profile: CurvatureProfile,
        thermo: ThermoParams,
        j: int,
        hbar: float = 1.0,
        fidelity_threshold: float = FIDELITY_THRESHOLD,
    ) -> float:
        """
        arg⟨φ_j(γ(t1))|ψ(t1)⟩ − θ_d with the argument unwrapped continuously along the grid.

        The running dynamical phase is removed before unwrapping so that only the slow
        geometric drift is tracked between grid points.
        """
        j = check_index(model, j)
        overlaps = PhaseService.eigenstate_overlaps(traj, model, profile, thermo, j)
        fidelity = np.abs(overlaps) ** 2
        worst = float(fidelity.min())
        if worst < fidelity_threshold:
            raise NonAdiabaticError(
                f"fidelity to state {j} dropped to {worst:.4f} (threshold {fidelity_threshold})"
            )

        gammas = GeometryService.gamma_values(profile, thermo, traj.times)
        energies = QuantumModelService.eigen_energies(model, j, gammas)
        running = -cumulative_trapezoid(energies, traj.times, initial=0.0) / hbar
        slow = np.unwrap(np.angle(overlaps * np.exp(-1j * running)))
        total_arg = slow[-1] - slow[0] + running[-1]

        theta_d = PhaseService.dynamical_phase(
            model, profile, thermo, j, float(traj.times[0]), float(traj.times[-1]), hbar
        )
        return float(total_arg - theta_d)

    @staticmethod
    def discrete_berry_phase(model: QuantumModel, j: int, gammas: np.ndarray) -> float:
        """−Σ arg⟨φ_j(γ_k)|φ_j(γ_k+1)⟩ along the given γ samples; no dynamics involved."""
        phi = QuantumModelService.basis_states(model, j, gammas)
        links = np.einsum("ij,ij->i", np.conj(phi[:-1]), phi[1:])
        return float(-np.sum(np.angle(links)))

    @staticmethod
    def decompose(
        traj: Trajectory,
        model: QuantumModel,
        profile: CurvatureProfile,
        thermo: ThermoParams,
        j: int,
        bounds: BoundsReading = BoundsReading.U,
        hbar: float = 1.0,
        fidelity_threshold: float = FIDELITY_THRESHOLD,
    ) -> PhaseDecomposition:
        t0, t1 = float(traj.times[0]), float(traj.times[-1])
        theta_d = PhaseService.dynamical_phase(model, profile, thermo, j, t0, t1, hbar)
        numeric = PhaseService.geometric_phase_numeric(
            traj, model, profile, thermo, j, hbar, fidelity_threshold
        )
        analytic = PhaseService.geometric_phase_analytic(
            model, profile, thermo, j, t0, t1, bounds
        )
        if bounds == BoundsReading.U:
            real_term = analytic
        else:
            real_term = PhaseService.geometric_phase_analytic(
                model, profile, thermo, j, t0, t1, BoundsReading.U
            )

        overlaps = PhaseService.eigenstate_overlaps(traj, model, profile, thermo, j)
        residual = abs(wrap_angle(numeric - analytic))
        if residual > 1e-3:
            logger.warning(
                "geometric phase residual %.3e rad (numeric %.6f, analytic %.6f, bounds=%s)",
                residual, numeric, analytic, bounds.value,
            )
        return PhaseDecomposition(
            omega_total=1j * (theta_d + numeric),
            dynamical_angle=theta_d,
            geometric_angle_numeric=numeric,
            geometric_angle_analytic=analytic,
            residual=residual,
            omega_paper=complex(real_term, theta_d),
            geometric_angle_discrete=PhaseService.discrete_berry_phase(model, j, traj.gammas),
            min_fidelity=float((np.abs(overlaps) ** 2).min()),
            bounds=bounds,
        )

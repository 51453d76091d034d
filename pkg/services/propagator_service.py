"""
Propagator Service - integrates iħ d/dt|ψ⟩ = H(γ(t))|ψ⟩ along a curvature profile.

Each step applies the exact exponential of H at the step midpoint (unitary midpoint rule,
second order). Step maps come from batched Hermitian eigendecompositions.
"""
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from errors import DegeneracyError, DomainError, IntegrationError
from models import CurvatureProfile, QuantumModel, ThermoParams, Trajectory
from services.geometry_service import GeometryService
from services.model_service import QuantumModelService, check_index

logger = logging.getLogger(__name__)

NORM_DRIFT_LIMIT = 1e-9
DEFAULT_GAP_FLOOR = 1e-9
CHUNK = 4096  # step maps built per batch


@dataclass
class ConvergenceResult:
    """Final-state errors at `steps` and `2·steps` against a finer reference."""
    steps: int
    reference_steps: int
    error_coarse: float
    error_fine: float
    ratio: float


def _step_maps(H: np.ndarray, dt: float, hbar: float) -> np.ndarray:
    w, V = np.linalg.eigh(H)
    phases = np.exp(-1j * w * (dt / hbar))
    return (V * phases[:, None, :]) @ np.conj(np.swapaxes(V, 1, 2))


class PropagatorService:
    """Service for propagating states along a curvature path."""

    @staticmethod
    def propagate(
        model: QuantumModel,
        profile: CurvatureProfile,
        thermo: ThermoParams,
        j0: int,
        t0: float,
        t1: float,
        steps: int,
        hbar: float = 1.0,
        gap_floor: float = DEFAULT_GAP_FLOOR,
    ) -> Trajectory:
        """
        Propagate basis_state(j0, γ(t0)) over a uniform grid of `steps` steps.

        Raises IntegrationError when max |‖ψ‖ − 1| exceeds 1e-9.
        """
        j0 = check_index(model, j0)
        if isinstance(steps, bool) or not isinstance(steps, (int, np.integer)) or steps < 10:
            raise DomainError(f"steps must be an integer >= 10, got {steps!r}")
        if not hbar > 0:
            raise DomainError("hbar must be positive")

        times = GeometryService.time_grid(t0, t1, int(steps) + 1)
        gammas = GeometryService.gamma_values(profile, thermo, times)
        dt = (t1 - t0) / steps

        states = np.empty((times.size, model.n), dtype=complex)
        states[0] = QuantumModelService.basis_state(model, j0, gammas[0])
        midpoints = 0.5 * (times[:-1] + times[1:])

        for start in range(0, int(steps), CHUNK):
            stop = min(start + CHUNK, int(steps))
            mid_gammas = GeometryService.gamma_values(profile, thermo, midpoints[start:stop])
            H = QuantumModelService.hamiltonian_matrices(model, mid_gammas, thermo.beta)
            U = _step_maps(H, dt, hbar)
            for k in range(stop - start):
                states[start + k + 1] = U[k] @ states[start + k]

        norm_drift = float(np.max(np.abs(np.linalg.norm(states, axis=1) - 1.0)))
        if norm_drift > NORM_DRIFT_LIMIT:
            raise IntegrationError(f"norm drift {norm_drift:.3e} exceeds {NORM_DRIFT_LIMIT:.0e}")

        eps = PropagatorService.adiabaticity_series(model, profile, thermo, times, hbar, gap_floor)
        logger.debug(
            "propagated %s j0=%d over %d steps (drift %.2e, max eps %.2e)",
            model.kind.value, j0, steps, norm_drift, float(eps.max()),
        )
        return Trajectory(
            times=times,
            gammas=gammas,
            states=states,
            step_size=dt,
            norm_drift=norm_drift,
            adiabaticity_max=float(eps.max()),
            j0=j0,
        )

    # ============================================
    # DIAGNOSTICS
    # ============================================

    @staticmethod
    def adiabaticity_series(
        model: QuantumModel,
        profile: CurvatureProfile,
        thermo: ThermoParams,
        times: np.ndarray,
        hbar: float = 1.0,
        gap_floor: float = DEFAULT_GAP_FLOOR,
    ) -> np.ndarray:
        """
        ε(t) = max over k ≠ j of ħ|⟨φ_k|dH/dt|φ_j⟩| / (E_k − E_j)² with dH/dt = ∂H/∂γ·dγ/dt.

        Any two levels closer than `gap_floor` raise DegeneracyError, coupled or not. Pairs with no
        coupling contribute nothing to ε.
        """
        times = np.atleast_1d(np.asarray(times, dtype=float))
        eps = np.zeros(times.size)
        for start in range(0, times.size, CHUNK):
            chunk = times[start : start + CHUNK]
            gammas = GeometryService.gamma_values(profile, thermo, chunk)
            rates = GeometryService.gamma_rates(profile, thermo, chunk)
            energies = QuantumModelService.spectrum(model, gammas)
            V = QuantumModelService.eigenbasis(model, gammas)
            dH = QuantumModelService.hamiltonian_gamma_derivative(model, gammas)
            dH = dH * rates[:, None, None]
            coupling = np.abs(np.conj(np.swapaxes(V, 1, 2)) @ dH @ V)
            gaps = np.abs(energies[:, :, None] - energies[:, None, :])

            off = ~np.eye(model.n, dtype=bool)[None, :, :]
            scale = 1.0 + np.max(np.abs(dH), axis=(1, 2))
            closed = np.any(off & (gaps < gap_floor), axis=(1, 2))
            if np.any(closed):
                bad = int(np.argmax(closed))
                raise DegeneracyError(
                    f"spectral gap below {gap_floor:.0e} at t={chunk[bad]:.6g}"
                )
            coupled = off & (coupling > 1e-14 * scale[:, None, None])
            ratio = np.where(coupled, hbar * coupling / np.where(coupled, gaps, 1.0) ** 2, 0.0)
            eps[start : start + chunk.size] = ratio.max(axis=(1, 2))
        return eps

    @staticmethod
    def adiabaticity(
        model: QuantumModel,
        profile: CurvatureProfile,
        thermo: ThermoParams,
        t: float,
        hbar: float = 1.0,
        gap_floor: float = DEFAULT_GAP_FLOOR,
    ) -> float:
        series = PropagatorService.adiabaticity_series(
            model, profile, thermo, np.array([t]), hbar, gap_floor
        )
        return float(series[0])

    @staticmethod
    def instantaneous_fidelity(
        traj: Trajectory,
        model: QuantumModel,
        profile: CurvatureProfile,
        thermo: ThermoParams,
        j: int,
    ) -> np.ndarray:
        """F(t) = |⟨φ_j(γ(t))|ψ(t)⟩|² on the trajectory grid."""
        if traj.states.shape[1] != model.n:
            raise DomainError(
                f"trajectory dimension {traj.states.shape[1]} does not match model n={model.n}"
            )
        gammas = GeometryService.gamma_values(profile, thermo, traj.times)
        phi = QuantumModelService.basis_states(model, j, gammas)
        overlaps = np.einsum("ij,ij->i", np.conj(phi), traj.states)
        return np.clip(np.abs(overlaps) ** 2, 0.0, 1.0)

    # ============================================
    # CONVERGENCE
    # ============================================

    @staticmethod
    def self_convergence(
        model: QuantumModel,
        profile: CurvatureProfile,
        thermo: ThermoParams,
        j0: int,
        t0: float,
        t1: float,
        steps: int,
        refine: int = 10,
        hbar: float = 1.0,
        gap_floor: Optional[float] = None,
    ) -> ConvergenceResult:
        """Error ratio when `steps` doubles, against a refine·2·steps reference."""
        floor = DEFAULT_GAP_FLOOR if gap_floor is None else gap_floor
        reference_steps = refine * 2 * steps

        def final_state(n_steps: int) -> np.ndarray:
            traj = PropagatorService.propagate(
                model, profile, thermo, j0, t0, t1, n_steps, hbar, floor
            )
            return traj.states[-1]

        reference = final_state(reference_steps)
        error_coarse = float(np.linalg.norm(final_state(steps) - reference))
        error_fine = float(np.linalg.norm(final_state(2 * steps) - reference))
        ratio = error_coarse / error_fine if error_fine > 0 else float("inf")
        logger.debug("self-convergence ratio %.3f (steps %d vs %d)", ratio, steps, 2 * steps)
        return ConvergenceResult(
            steps=steps,
            reference_steps=reference_steps,
            error_coarse=error_coarse,
            error_fine=error_fine,
            ratio=ratio,
        )

"""
Model Service - closed-form energies, eigenstates, Hamiltonians and Berry connections for the
built-in quantum model families.

    gauge-ladder  |φ_j(γ)⟩ = exp(iω_jγ)·e_j,  E_j(γ) = E0 + jδ + λγ,  A_j = ω_j
    beta-ladder   same states and energies,   A_j(γ;β) = ω_j + ηβ
    spin-cone     H = −(B/2)·n(θ,γ)·σ with n = (sinθ cosγ, sinθ sinγ, cosθ)

Every scalar operation is the vectorized one evaluated on a single point, so grids and single
evaluations agree bit for bit.
"""
import math
from typing import Union

import numpy as np

from errors import DomainError
from models import Connection, ModelKind, QuantumModel

ArrayLike = Union[float, np.ndarray]

LADDERS = (ModelKind.GAUGE_LADDER, ModelKind.BETA_LADDER)


def check_index(model: QuantumModel, j: int) -> int:
    if isinstance(j, bool) or not isinstance(j, (int, np.integer)):
        raise DomainError(f"state index must be an integer, got {j!r}")
    if not 0 <= j < model.n:
        raise DomainError(f"state index {j} outside [0, {model.n})")
    return int(j)


def check_gamma(gamma: ArrayLike) -> np.ndarray:
    values = np.atleast_1d(np.asarray(gamma, dtype=float))
    if not np.all(np.isfinite(values)):
        raise DomainError("gamma must be finite")
    return values


class QuantumModelService:
    """Pure functions of a QuantumModel; safe to call from concurrent runs."""

    # ============================================
    # ENERGIES
    # ============================================

    @staticmethod
    def eigen_energies(model: QuantumModel, j: int, gammas: ArrayLike) -> np.ndarray:
        j = check_index(model, j)
        g = check_gamma(gammas)
        if model.kind in LADDERS:
            return model.base_energy + j * model.level_spacing + model.tilt * g
        half = 0.5 * model.field_strength
        return np.full_like(g, -half if j == 0 else half)

    @staticmethod
    def eigen_energy(model: QuantumModel, j: int, gamma: float) -> float:
        return float(QuantumModelService.eigen_energies(model, j, gamma)[0])

    @staticmethod
    def spectrum(model: QuantumModel, gammas: ArrayLike) -> np.ndarray:
        """All energies, shape (len(gammas), n), columns in index order."""
        return np.stack(
            [QuantumModelService.eigen_energies(model, j, gammas) for j in range(model.n)], axis=1
        )

    # ============================================
    # EIGENSTATES
    # ============================================

    @staticmethod
    def basis_states(model: QuantumModel, j: int, gammas: ArrayLike) -> np.ndarray:
        """Instantaneous eigenstate |φ_j(γ)⟩ on a grid, shape (len(gammas), n)."""
        j = check_index(model, j)
        g = check_gamma(gammas)
        states = np.zeros((g.size, model.n), dtype=complex)
        if model.kind in LADDERS:
            states[:, j] = np.exp(1j * model.rate(j) * g)
            return states

        half = 0.5 * model.cone_angle
        if j == 0:
            states[:, 0] = math.cos(half)
            states[:, 1] = np.exp(1j * g) * math.sin(half)
        else:
            states[:, 0] = -np.exp(-1j * g) * math.sin(half)
            states[:, 1] = math.cos(half)
        return states

    @staticmethod
    def basis_state(model: QuantumModel, j: int, gamma: float) -> np.ndarray:
        return QuantumModelService.basis_states(model, j, gamma)[0]

    @staticmethod
    def eigenbasis(model: QuantumModel, gammas: ArrayLike) -> np.ndarray:
        """All eigenstates, shape (len(gammas), n, n) with state j in column j."""
        return np.stack(
            [QuantumModelService.basis_states(model, j, gammas) for j in range(model.n)], axis=2
        )

    # ============================================
    # CONNECTION
    # ============================================

    @staticmethod
    def connection_values(model: QuantumModel, j: int, u: ArrayLike, beta: float) -> np.ndarray:
        """A_j(u;β) on a grid of γ values u."""
        j = check_index(model, j)
        grid = check_gamma(u)
        if model.kind == ModelKind.GAUGE_LADDER:
            return np.full_like(grid, model.rate(j))
        if model.kind == ModelKind.BETA_LADDER:
            return np.full_like(grid, model.rate(j) + model.beta_coupling * beta)
        weight = math.sin(0.5 * model.cone_angle) ** 2
        return np.full_like(grid, weight if j == 0 else -weight)

    @staticmethod
    def connection_beta_derivative(
        model: QuantumModel, j: int, u: ArrayLike, beta: float
    ) -> np.ndarray:
        """∂A_j/∂β at fixed γ. Only the beta-ladder depends on β explicitly."""
        check_index(model, j)
        grid = check_gamma(u)
        if model.kind == ModelKind.BETA_LADDER:
            return np.full_like(grid, model.beta_coupling)
        return np.zeros_like(grid)

    @staticmethod
    def berry_connection(model: QuantumModel, j: int, gamma: float, beta: float) -> Connection:
        value = QuantumModelService.connection_values(model, j, gamma, beta)[0]
        return Connection(value=float(value), index=j, gamma=float(gamma))

    @staticmethod
    def connection_finite_difference(
        model: QuantumModel, j: int, gamma: float, beta: float, h: float
    ) -> float:
        """
        Central-difference estimate −i⟨φ_j(γ)|[φ_j(γ+h) − φ_j(γ−h)]/2h⟩ plus the explicit β term.

        Converges to berry_connection at O(h²).
        """
        if not h > 0:
            raise DomainError(f"finite-difference step must be positive, got {h}")
        grid = np.array([gamma - h, gamma, gamma + h])
        minus, centre, plus = QuantumModelService.basis_states(model, j, grid)
        overlap = np.vdot(centre, (plus - minus) / (2.0 * h))
        explicit = model.beta_coupling * beta if model.kind == ModelKind.BETA_LADDER else 0.0
        return float((-1j * overlap).real) + explicit

    # ============================================
    # HAMILTONIAN
    # ============================================

    @staticmethod
    def hamiltonian_matrices(
        model: QuantumModel, gammas: ArrayLike, beta: float = 0.0
    ) -> np.ndarray:
        """
        H(γ) = Σ_j E_j(γ)|φ_j(γ)⟩⟨φ_j(γ)| on a grid, shape (len(gammas), n, n).

        Closed forms are used: the ladders' pure-phase eigenvectors leave the projectors
        diagonal, and the spin-cone is −(B/2)·n·σ. The models carry no explicit β in H.
        """
        g = check_gamma(gammas)
        if model.kind in LADDERS:
            energies = QuantumModelService.spectrum(model, g)
            H = np.zeros((g.size, model.n, model.n), dtype=complex)
            idx = np.arange(model.n)
            H[:, idx, idx] = energies
            return H

        half = 0.5 * model.field_strength
        sin_t, cos_t = math.sin(model.cone_angle), math.cos(model.cone_angle)
        H = np.empty((g.size, 2, 2), dtype=complex)
        H[:, 0, 0] = -half * cos_t
        H[:, 1, 1] = half * cos_t
        H[:, 0, 1] = -half * sin_t * np.exp(-1j * g)
        H[:, 1, 0] = -half * sin_t * np.exp(1j * g)
        return H

    @staticmethod
    def hamiltonian_matrix(model: QuantumModel, gamma: float, beta: float = 0.0) -> np.ndarray:
        return QuantumModelService.hamiltonian_matrices(model, gamma, beta)[0]

    @staticmethod
    def hamiltonian_gamma_derivative(model: QuantumModel, gammas: ArrayLike) -> np.ndarray:
        """∂H/∂γ on a grid: λ·I for the ladders, the azimuthal derivative for the spin-cone."""
        g = check_gamma(gammas)
        if model.kind in LADDERS:
            dH = np.zeros((g.size, model.n, model.n), dtype=complex)
            idx = np.arange(model.n)
            dH[:, idx, idx] = model.tilt
            return dH

        scale = -0.5 * model.field_strength * math.sin(model.cone_angle)
        dH = np.zeros((g.size, 2, 2), dtype=complex)
        dH[:, 0, 1] = scale * (-1j) * np.exp(-1j * g)
        dH[:, 1, 0] = scale * 1j * np.exp(1j * g)
        return dH

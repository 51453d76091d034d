"""
Thermo Service - ln Z, ⟨E⟩ and entropy variation built from the connection integral.

    ln Z(β)  = −β ∫_{u0}^{u1} A(u;β) du,   u_i = s·β·R(t_i)
    ⟨E⟩      = −d ln Z/dβ

The finite-difference ⟨E⟩ is the oracle for both Leibniz expansions. The "consistent" form is the
actual derivative; the "paper" form is the same four terms with every sign flipped.
"""
import logging
import math
from typing import Optional

from errors import DomainError
from models import (
    BoundsReading,
    CurvatureProfile,
    LeibnizTerms,
    LeibnizVariant,
    QuantumModel,
    ThermoParams,
    ThermoReport,
)
from services.geometry_service import GeometryService
from services.model_service import QuantumModelService, check_index
from services.numerics import central_difference, richardson_difference, simpson_integral
from services.phase_service import PhaseService

logger = logging.getLogger(__name__)

FD_RELATIVE_STEP = 1e-4
RICHARDSON_BELOW_BETA = 1e-2


def _connection_integral(model: QuantumModel, j: int, beta: float, u0: float, u1: float) -> float:
    return simpson_integral(
        lambda u: QuantumModelService.connection_values(model, j, u, beta), u0, u1
    )


def _beta_derivative_integral(
    model: QuantumModel, j: int, beta: float, u0: float, u1: float
) -> float:
    return simpson_integral(
        lambda u: QuantumModelService.connection_beta_derivative(model, j, u, beta), u0, u1
    )


class ThermoService:
    """Service for partition functions and energies."""

    @staticmethod
    def ln_partition(
        model: QuantumModel,
        profile: CurvatureProfile,
        thermo: ThermoParams,
        j: int,
        t0: float,
        t1: float,
    ) -> float:
        j = check_index(model, j)
        _, _, u0, u1 = GeometryService.bounds(profile, thermo, t0, t1)
        return -thermo.beta * _connection_integral(model, j, thermo.beta, u0, u1)

    @staticmethod
    def expected_energy_fd(
        model: QuantumModel,
        profile: CurvatureProfile,
        thermo: ThermoParams,
        j: int,
        t0: float,
        t1: float,
        h: Optional[float] = None,
    ) -> float:
        """
        −[ln Z(β+h) − ln Z(β−h)]/(2h).

        Default step is 1e-4·β, Richardson-extrapolated when β < 1e-2. The step must satisfy
        0 < h ≤ β/2, so β = 0 itself has no finite-difference neighbourhood.
        """
        beta = thermo.beta
        if beta <= 0:
            raise DomainError("finite-difference energy needs beta > 0")
        richardson = h is None and beta < RICHARDSON_BELOW_BETA
        if h is None:
            h = FD_RELATIVE_STEP * beta
        if not 0 < h <= beta / 2:
            raise DomainError(f"finite-difference step h={h} must satisfy 0 < h <= beta/2")

        def ln_z(b: float) -> float:
            return ThermoService.ln_partition(model, profile, thermo.with_beta(b), j, t0, t1)

        if richardson:
            return -richardson_difference(ln_z, beta, h)
        return -central_difference(ln_z, beta, h)

    @staticmethod
    def leibniz_terms(
        model: QuantumModel,
        profile: CurvatureProfile,
        thermo: ThermoParams,
        j: int,
        t0: float,
        t1: float,
        variant: LeibnizVariant = LeibnizVariant.CONSISTENT,
    ) -> LeibnizTerms:
        """
        d/dβ[β∫A du] by the Leibniz rule with moving bounds u = s·βR:
        ∫A du + u1·A(u1) − u0·A(u0) + β∫∂A/∂β du. Variant "paper" negates each term.
        """
        j = check_index(model, j)
        beta = thermo.beta
        _, _, u0, u1 = GeometryService.bounds(profile, thermo, t0, t1)
        A0 = QuantumModelService.connection_values(model, j, u0, beta)[0]
        A1 = QuantumModelService.connection_values(model, j, u1, beta)[0]

        integral = _connection_integral(model, j, beta, u0, u1)
        upper = u1 * float(A1)
        lower = -u0 * float(A0)
        extrinsic = beta * _beta_derivative_integral(model, j, beta, u0, u1)

        sign = -1.0 if variant == LeibnizVariant.PAPER else 1.0
        return LeibnizTerms(
            variant=variant,
            integral=sign * integral,
            upper=sign * upper,
            lower=sign * lower,
            extrinsic=sign * extrinsic,
        )

    @staticmethod
    def expected_energy_leibniz(
        model: QuantumModel,
        profile: CurvatureProfile,
        thermo: ThermoParams,
        j: int,
        t0: float,
        t1: float,
        variant: LeibnizVariant = LeibnizVariant.CONSISTENT,
    ) -> float:
        return ThermoService.leibniz_terms(model, profile, thermo, j, t0, t1, variant).total

    @staticmethod
    def expected_energy_const_omega(omega: float, beta: float, deltaR: float) -> float:
        """ω(1 − β)ΔR."""
        if not all(math.isfinite(x) for x in (omega, beta, deltaR)):
            raise DomainError("omega, beta and deltaR must be finite")
        return omega * (1.0 - beta) * deltaR

    @staticmethod
    def extrinsic_integral(
        model: QuantumModel,
        profile: CurvatureProfile,
        thermo: ThermoParams,
        j: int,
        t0: float,
        t1: float,
    ) -> float:
        """∫ ∂A/∂β du between the u = s·βR bounds."""
        j = check_index(model, j)
        _, _, u0, u1 = GeometryService.bounds(profile, thermo, t0, t1)
        return _beta_derivative_integral(model, j, thermo.beta, u0, u1)

    @staticmethod
    def expected_energy_extrinsic(
        model: QuantumModel,
        profile: CurvatureProfile,
        thermo: ThermoParams,
        j: int,
        t0: float,
        t1: float,
        omega: float,
    ) -> float:
        """ω(1 − β)ΔR − β∫∂A/∂β du."""
        R0, R1, _, _ = GeometryService.bounds(profile, thermo, t0, t1)
        base = ThermoService.expected_energy_const_omega(omega, thermo.beta, R1 - R0)
        extrinsic = ThermoService.extrinsic_integral(model, profile, thermo, j, t0, t1)
        return base - thermo.beta * extrinsic

    @staticmethod
    def entropy_variation(
        model: QuantumModel,
        profile: CurvatureProfile,
        thermo: ThermoParams,
        j: int,
        t0: float,
        t1: float,
        h: Optional[float] = None,
    ) -> float:
        """ΔS = ⟨E⟩β + ln Z with ⟨E⟩ from the finite-difference oracle."""
        energy = ThermoService.expected_energy_fd(model, profile, thermo, j, t0, t1, h)
        return energy * thermo.beta + ThermoService.ln_partition(model, profile, thermo, j, t0, t1)

    # ============================================
    # REPORT
    # ============================================

    @staticmethod
    def thermo_report(
        model: QuantumModel,
        profile: CurvatureProfile,
        thermo: ThermoParams,
        j: int,
        t0: float,
        t1: float,
        omega: Optional[float] = None,
        h: Optional[float] = None,
        hbar: float = 1.0,
    ) -> ThermoReport:
        """
        Collect every thermodynamic quantity for one run.

        `omega` defaults to the connection at the start of the path, which is the constant ω
        for every built-in model.
        """
        j = check_index(model, j)
        R0, R1, u0, _ = GeometryService.bounds(profile, thermo, t0, t1)
        if omega is None:
            omega = float(QuantumModelService.connection_values(model, j, u0, thermo.beta)[0])

        ln_z = ThermoService.ln_partition(model, profile, thermo, j, t0, t1)
        energy = ThermoService.expected_energy_fd(model, profile, thermo, j, t0, t1, h)
        paper = ThermoService.leibniz_terms(
            model, profile, thermo, j, t0, t1, LeibnizVariant.PAPER
        )
        consistent = ThermoService.leibniz_terms(
            model, profile, thermo, j, t0, t1, LeibnizVariant.CONSISTENT
        )
        const_omega = ThermoService.expected_energy_const_omega(omega, thermo.beta, R1 - R0)
        extrinsic = ThermoService.expected_energy_extrinsic(
            model, profile, thermo, j, t0, t1, omega
        )

        geometric_real = PhaseService.geometric_phase_analytic(
            model, profile, thermo, j, t0, t1, BoundsReading.U
        )
        theta_d = PhaseService.dynamical_phase(model, profile, thermo, j, t0, t1, hbar)
        discrepancy = const_omega - consistent.total
        if abs(discrepancy) > 1e-9 * max(1.0, abs(consistent.total)):
            logger.info(
                "constant-omega energy %.6g differs from the Leibniz derivative %.6g",
                const_omega, consistent.total,
            )

        return ThermoReport(
            ln_Z=ln_z,
            E_fd=energy,
            E_leibniz_paper=paper.total,
            E_leibniz_consistent=consistent.total,
            E_const_omega=const_omega,
            E_extrinsic=extrinsic,
            delta_S=energy * thermo.beta + ln_z,
            intrinsic_terms=(paper.integral, paper.upper, paper.lower),
            extrinsic_term=paper.extrinsic,
            const_omega_discrepancy=discrepancy,
            identification_residual=abs(ln_z - geometric_real),
            dynamical_residual=energy * thermo.beta - theta_d,
        )

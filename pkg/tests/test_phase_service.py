import math

import numpy as np
import pytest

from errors import NonAdiabaticError
from models import (
    BoundsReading,
    CurvatureProfile,
    ModelKind,
    ProfileKind,
    QuantumModel,
    ThermoParams,
)
from services.phase_service import PhaseService
from services.propagator_service import PropagatorService


# Dynamical phase
def test_dynamical_phase_constant_energy():
    model = QuantumModel(ModelKind.GAUGE_LADDER, n=3)
    profile = CurvatureProfile(ProfileKind.CONSTANT, r_base=5.0)
    theta = PhaseService.dynamical_phase(model, profile, ThermoParams(beta=1.0), 2, 0.0, math.pi)
    assert theta == pytest.approx(-2.0 * math.pi, rel=1e-12)


def test_dynamical_phase_zero_energy():
    model = QuantumModel(ModelKind.GAUGE_LADDER, n=2)
    profile = CurvatureProfile(ProfileKind.CONSTANT)
    assert PhaseService.dynamical_phase(model, profile, ThermoParams(beta=1.0), 0, 0.0, 4.0) == 0.0


# Analytic geometric phase
def test_analytic_phase_vanishes_at_zero_beta(gauge_ladder, ramp_one_to_three):
    value = PhaseService.geometric_phase_analytic(
        gauge_ladder, ramp_one_to_three, ThermoParams(beta=0.0), 0, 0.0, 1.0
    )
    assert value == 0.0


def test_analytic_phase_bounds_readings(gauge_ladder, ramp_one_to_three, thermo_two):
    u_reading = PhaseService.geometric_phase_analytic(
        gauge_ladder, ramp_one_to_three, thermo_two, 0, 0.0, 1.0, BoundsReading.U
    )
    r_reading = PhaseService.geometric_phase_analytic(
        gauge_ladder, ramp_one_to_three, thermo_two, 0, 0.0, 1.0, BoundsReading.R
    )
    assert u_reading == pytest.approx(-8.0, rel=1e-12)
    assert r_reading == pytest.approx(-4.0, rel=1e-12)


def test_analytic_phase_closed_loop_is_zero(gauge_ladder):
    loop = CurvatureProfile(ProfileKind.SINUSOIDAL, r_base=2.0, amplitude=0.5, period=10.0)
    value = PhaseService.geometric_phase_analytic(
        gauge_ladder, loop, ThermoParams(beta=0.8), 1, 0.0, 10.0
    )
    assert value == 0.0


def test_phases_add_over_adjacent_intervals():
    model = QuantumModel(ModelKind.GAUGE_LADDER, n=3, tilt=0.3, gauge_rates=(0.5, 1.0, 1.5))
    pulse = CurvatureProfile(
        ProfileKind.GAUSSIAN_PULSE, r_base=0.5, amplitude=1.5, center=2.0, width=0.8
    )
    thermo = ThermoParams(beta=0.7)
    for phase in (PhaseService.dynamical_phase, PhaseService.geometric_phase_analytic):
        whole = phase(model, pulse, thermo, 2, 0.0, 5.0)
        split = phase(model, pulse, thermo, 2, 0.0, 1.7) + phase(model, pulse, thermo, 2, 1.7, 5.0)
        assert split == pytest.approx(whole, abs=1e-8)


# Numeric geometric phase
def test_numeric_phase_constant_profile(spin_cone):
    profile = CurvatureProfile(ProfileKind.CONSTANT, r_base=0.7)
    thermo = ThermoParams(beta=1.0)
    traj = PropagatorService.propagate(spin_cone, profile, thermo, 0, 0.0, 5.0, 100)
    assert PhaseService.geometric_phase_numeric(
        traj, spin_cone, profile, thermo, 0
    ) == pytest.approx(0.0, abs=1e-9)


def test_spin_cone_holonomy_equator():
    model = QuantumModel(ModelKind.SPIN_CONE, cone_angle=math.pi / 2, field_strength=4.0)
    profile = CurvatureProfile(ProfileKind.LINEAR_RAMP, rate=1e-3)
    thermo = ThermoParams(beta=1.0)
    traj = PropagatorService.propagate(model, profile, thermo, 0, 0.0, 2.0 * math.pi / 1e-3, 20_000)
    numeric = PhaseService.geometric_phase_numeric(traj, model, profile, thermo, 0)
    assert numeric == pytest.approx(-math.pi, abs=1e-3)


@pytest.mark.parametrize("theta", [math.pi / 6, math.pi / 3])
def test_spin_cone_holonomy_off_equator(theta):
    model = QuantumModel(ModelKind.SPIN_CONE, cone_angle=theta, field_strength=4.0)
    profile = CurvatureProfile(ProfileKind.LINEAR_RAMP, rate=1e-3)
    thermo = ThermoParams(beta=1.0)
    traj = PropagatorService.propagate(model, profile, thermo, 0, 0.0, 2.0 * math.pi / 1e-3, 20_000)
    numeric = PhaseService.geometric_phase_numeric(traj, model, profile, thermo, 0)
    # half the enclosed solid angle
    assert numeric == pytest.approx(-math.pi * (1.0 - math.cos(theta)), abs=1e-3)


def test_gauge_ladder_ramp_numeric_matches_r_bounds():
    model = QuantumModel(ModelKind.GAUGE_LADDER, n=3, tilt=0.1, gauge_rates=(0.5, 1.0, 1.5))
    profile = CurvatureProfile(ProfileKind.LINEAR_RAMP, r_base=1.0, rate=0.01)
    thermo = ThermoParams(beta=0.5)
    traj = PropagatorService.propagate(model, profile, thermo, 2, 0.0, 50.0, 1000)
    numeric = PhaseService.geometric_phase_numeric(traj, model, profile, thermo, 2)
    # −ω·Δγ with Δγ = β·rate·T
    assert numeric == pytest.approx(-1.5 * 0.25, abs=1e-9)


def test_fast_ramp_is_rejected(spin_cone):
    profile = CurvatureProfile(ProfileKind.LINEAR_RAMP, rate=1.0)
    thermo = ThermoParams(beta=1.0)
    traj = PropagatorService.propagate(spin_cone, profile, thermo, 0, 0.0, 10.0, 2000)
    with pytest.raises(NonAdiabaticError, match="fidelity"):
        PhaseService.geometric_phase_numeric(traj, spin_cone, profile, thermo, 0)


def test_discrete_berry_phase_of_gauge_ladder(gauge_ladder):
    gammas = np.linspace(0.0, 1.5, 301)
    assert PhaseService.discrete_berry_phase(gauge_ladder, 1, gammas) == pytest.approx(-4.5)


# Decomposition
def test_decompose_gauge_ladder_ramp():
    model = QuantumModel(ModelKind.GAUGE_LADDER, n=3, tilt=0.1, gauge_rates=(0.5, 1.0, 1.5))
    profile = CurvatureProfile(ProfileKind.LINEAR_RAMP, r_base=1.0, rate=0.01)
    thermo = ThermoParams(beta=0.5)
    traj = PropagatorService.propagate(model, profile, thermo, 1, 0.0, 50.0, 1000)
    result = PhaseService.decompose(traj, model, profile, thermo, 1, BoundsReading.R)

    assert result.residual < 1e-9
    assert result.bounds == BoundsReading.R
    assert result.omega_total.real == 0.0
    assert result.omega_total.imag == pytest.approx(
        result.dynamical_angle + result.geometric_angle_numeric
    )
    u_reading = PhaseService.geometric_phase_analytic(
        model, profile, thermo, 1, 0.0, 50.0, BoundsReading.U
    )
    assert result.omega_paper == complex(u_reading, result.dynamical_angle)
    assert result.geometric_angle_discrete == pytest.approx(result.geometric_angle_numeric)
    assert result.min_fidelity == pytest.approx(1.0)
    assert set(result.to_dict()) >= {"omega_total", "residual", "bounds"}

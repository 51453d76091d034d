import math

import numpy as np
import pytest

from errors import DegeneracyError, DomainError
from models import CurvatureProfile, ModelKind, ProfileKind, QuantumModel, ThermoParams
from services.propagator_service import PropagatorService


def test_constant_profile_keeps_the_eigenstate(spin_cone):
    profile = CurvatureProfile(ProfileKind.CONSTANT, r_base=1.3)
    thermo = ThermoParams(beta=1.0)
    traj = PropagatorService.propagate(spin_cone, profile, thermo, 0, 0.0, 10.0, 200)
    fidelity = PropagatorService.instantaneous_fidelity(traj, spin_cone, profile, thermo, 0)
    np.testing.assert_allclose(fidelity, 1.0, atol=1e-12)
    assert traj.adiabaticity_max == 0.0
    assert traj.norm_drift < 1e-12
    assert traj.states.shape == (201, 2)


def test_trajectory_grid_hits_end_time(gauge_ladder):
    profile = CurvatureProfile(ProfileKind.LINEAR_RAMP, r_base=0.0, rate=0.1)
    thermo = ThermoParams(beta=1.0)
    traj = PropagatorService.propagate(gauge_ladder, profile, thermo, 1, 0.0, 3.0, 30)
    assert traj.times[0] == 0.0
    assert traj.times[-1] == 3.0
    assert traj.step_size == pytest.approx(0.1)
    frame = traj.to_frame()
    assert {"t", "gamma", "re_0", "im_2", "norm"} <= set(frame.columns)


def test_gauge_ladder_without_tilt_is_perfectly_adiabatic():
    model = QuantumModel(ModelKind.GAUGE_LADDER, n=3, gauge_rates=(0.5, 1.0, 1.5))
    profile = CurvatureProfile(ProfileKind.LINEAR_RAMP, r_base=0.0, rate=5.0)
    eps = PropagatorService.adiabaticity_series(
        model, profile, ThermoParams(beta=1.0), np.linspace(0.0, 2.0, 11)
    )
    assert np.all(eps == 0.0)


def test_spin_cone_adiabaticity_closed_form():
    model = QuantumModel(ModelKind.SPIN_CONE, cone_angle=math.pi / 3, field_strength=2.0)
    profile = CurvatureProfile(ProfileKind.LINEAR_RAMP, rate=0.1)
    eps = PropagatorService.adiabaticity(model, profile, ThermoParams(beta=1.0), 3.0)
    # ħ·γ̇·sinθ/(2B)
    assert eps == pytest.approx(0.1 * math.sin(math.pi / 3) / 4.0, rel=1e-12)


def test_fast_ramp_loses_fidelity(spin_cone):
    profile = CurvatureProfile(ProfileKind.LINEAR_RAMP, rate=1.0)
    thermo = ThermoParams(beta=1.0)
    traj = PropagatorService.propagate(spin_cone, profile, thermo, 0, 0.0, 10.0, 2000)
    fidelity = PropagatorService.instantaneous_fidelity(traj, spin_cone, profile, thermo, 0)
    assert fidelity.min() < 0.9
    assert traj.norm_drift < 1e-9


def test_slow_sweep_fidelity_improves_when_rate_halves():
    model = QuantumModel(ModelKind.SPIN_CONE, cone_angle=math.pi / 2, field_strength=1.0)
    thermo = ThermoParams(beta=1.0)
    losses = []
    for period in (100.0, 200.0):
        profile = CurvatureProfile(
            ProfileKind.SINUSOIDAL, r_base=0.0, amplitude=1.0, period=period
        )
        traj = PropagatorService.propagate(model, profile, thermo, 0, 0.0, period, 4000)
        fidelity = PropagatorService.instantaneous_fidelity(traj, model, profile, thermo, 0)
        losses.append(1.0 - fidelity.min())
    assert losses[0] < 1e-2
    assert losses[1] < losses[0] / 3.0


def test_closed_gap_raises_degeneracy():
    model = QuantumModel(ModelKind.SPIN_CONE, field_strength=1e-12)
    profile = CurvatureProfile(ProfileKind.LINEAR_RAMP, rate=0.5)
    with pytest.raises(DegeneracyError):
        PropagatorService.propagate(model, profile, ThermoParams(beta=1.0), 0, 0.0, 1.0, 10)


def test_uncoupled_degenerate_levels_raise_degeneracy():
    model = QuantumModel(ModelKind.GAUGE_LADDER, n=2, level_spacing=0.0, tilt=1.0)
    profile = CurvatureProfile(ProfileKind.LINEAR_RAMP, rate=1.0)
    with pytest.raises(DegeneracyError, match="spectral gap"):
        PropagatorService.adiabaticity(model, profile, ThermoParams(beta=1.0), 0.5)


def test_second_order_self_convergence():
    model = QuantumModel(ModelKind.SPIN_CONE, cone_angle=math.pi / 3, field_strength=1.0)
    profile = CurvatureProfile(ProfileKind.LINEAR_RAMP, rate=0.2)
    result = PropagatorService.self_convergence(
        model, profile, ThermoParams(beta=1.0), 0, 0.0, 20.0, steps=200
    )
    assert result.reference_steps == 4000
    assert 3.5 < result.ratio < 4.5


def test_propagate_validates_arguments(gauge_ladder):
    profile = CurvatureProfile(ProfileKind.CONSTANT)
    thermo = ThermoParams(beta=1.0)
    with pytest.raises(DomainError):
        PropagatorService.propagate(gauge_ladder, profile, thermo, 0, 0.0, 1.0, 5)
    with pytest.raises(DomainError):
        PropagatorService.propagate(gauge_ladder, profile, thermo, 3, 0.0, 1.0, 100)


def test_fidelity_rejects_mismatched_model(gauge_ladder, spin_cone):
    profile = CurvatureProfile(ProfileKind.CONSTANT)
    thermo = ThermoParams(beta=1.0)
    traj = PropagatorService.propagate(gauge_ladder, profile, thermo, 0, 0.0, 1.0, 10)
    with pytest.raises(DomainError, match="does not match"):
        PropagatorService.instantaneous_fidelity(traj, spin_cone, profile, thermo, 0)

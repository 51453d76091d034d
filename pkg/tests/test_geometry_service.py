import math

import numpy as np
import pytest
from scipy.integrate import trapezoid

from errors import DomainError
from models import CurvatureProfile, ProfileKind, QuantumModel, ModelKind, ThermoParams
from services.geometry_service import GeometryService
from services.model_service import QuantumModelService


# Curvature profiles
def test_constant_profile():
    profile = CurvatureProfile(ProfileKind.CONSTANT, r_base=2.0)
    assert GeometryService.curvature_at(profile, 123.0) == 2.0
    assert GeometryService.curvature_rates(profile, [0.0, 5.0]).tolist() == [0.0, 0.0]


def test_linear_ramp():
    profile = CurvatureProfile(ProfileKind.LINEAR_RAMP, r_base=1.0, rate=0.5)
    assert GeometryService.curvature_at(profile, 4.0) == 3.0


def test_sinusoid_returns_to_base_after_a_period():
    profile = CurvatureProfile(ProfileKind.SINUSOIDAL, r_base=1.0, amplitude=0.2, period=10.0)
    assert GeometryService.curvature_at(profile, 10.0) == 1.0
    assert GeometryService.curvature_at(profile, 0.0) == 1.0


def test_gaussian_pulse_peak_and_slope():
    profile = CurvatureProfile(
        ProfileKind.GAUSSIAN_PULSE, r_base=1.0, amplitude=2.0, center=5.0, width=0.5
    )
    assert GeometryService.curvature_at(profile, 5.0) == pytest.approx(3.0)
    h = 1e-6
    numeric = (
        GeometryService.curvature_at(profile, 5.3 + h)
        - GeometryService.curvature_at(profile, 5.3 - h)
    ) / (2 * h)
    assert GeometryService.curvature_rates(profile, 5.3)[0] == pytest.approx(numeric, rel=1e-6)


def test_time_outside_profile_interval():
    profile = CurvatureProfile(ProfileKind.CONSTANT, r_base=1.0, t_min=0.0, t_max=1.0)
    with pytest.raises(DomainError, match="outside the profile interval"):
        GeometryService.curvature_at(profile, 1.5)


# γ = βR
def test_gamma_examples():
    ramp = CurvatureProfile(ProfileKind.LINEAR_RAMP, r_base=1.0, rate=0.5)
    constant = CurvatureProfile(ProfileKind.CONSTANT, r_base=3.0)
    assert GeometryService.gamma_of(ramp, ThermoParams(beta=0.0), 4.0) == 0.0
    assert GeometryService.gamma_of(constant, ThermoParams(beta=2.0), 0.0) == 6.0
    assert GeometryService.gamma_of(ramp, ThermoParams(beta=0.5), 4.0) == 1.5


def test_gamma_scale_multiplies():
    constant = CurvatureProfile(ProfileKind.CONSTANT, r_base=3.0)
    thermo = ThermoParams(beta=2.0, gamma_scale=0.5)
    assert GeometryService.gamma_of(constant, thermo, 0.0) == 3.0


# Curvature-indexed states
@pytest.mark.parametrize("gamma0, expected", [(0.0, 0), (7.9, 2), (-1.2, 3)])
def test_initial_index(gamma0, expected):
    assert GeometryService.initial_index(gamma0, 5) == expected


@pytest.mark.parametrize("n", [2, 3, 7])
@pytest.mark.parametrize("gamma0", [0.0, 0.5, 2.999, -0.25, -4.0, 41.3])
def test_initial_index_is_periodic_in_n(gamma0, n):
    base = GeometryService.initial_index(gamma0, n)
    assert GeometryService.initial_index(gamma0 + n, n) == base
    assert GeometryService.initial_index(gamma0 - 3 * n, n) == base


def test_initial_index_errors():
    with pytest.raises(DomainError):
        GeometryService.initial_index(1.0, 0)
    with pytest.raises(DomainError):
        GeometryService.initial_index(math.inf, 3)


def test_index_trajectory_counts_jumps():
    profile = CurvatureProfile(ProfileKind.LINEAR_RAMP, r_base=0.0, rate=1.0)
    times = np.array([0.5, 1.5, 2.5, 3.5])
    indices, jumps = GeometryService.index_trajectory(profile, ThermoParams(beta=1.0), 3, times)
    assert indices.tolist() == [0, 1, 2, 0]
    assert jumps == 3


def test_indexed_state_uses_index_at_t_and_gamma_at_reference():
    model = QuantumModel(ModelKind.GAUGE_LADDER, n=3, gauge_rates=(1.0, 2.0, 3.0))
    profile = CurvatureProfile(ProfileKind.LINEAR_RAMP, r_base=0.0, rate=1.0)
    thermo = ThermoParams(beta=1.0)
    state = GeometryService.indexed_state(model, profile, thermo, t=1.2, t_ref=0.0)
    np.testing.assert_allclose(state, QuantumModelService.basis_state(model, 1, 0.0))


# Paths
def test_ramp_path_samples():
    profile = CurvatureProfile(ProfileKind.LINEAR_RAMP, r_base=1.0, rate=0.5)
    path = GeometryService.curvature_path(profile, ThermoParams(beta=1.0), 0.0, 4.0, 5)
    np.testing.assert_allclose(path.R, [1.0, 1.5, 2.0, 2.5, 3.0])
    assert path.t[-1] == 4.0
    assert list(path.to_frame().columns) == ["t", "R", "betaR", "dRdt"]


@pytest.mark.parametrize(
    "profile",
    [
        CurvatureProfile(ProfileKind.LINEAR_RAMP, r_base=-0.3, rate=0.7),
        CurvatureProfile(ProfileKind.SINUSOIDAL, r_base=1.0, amplitude=0.4, period=3.0),
        CurvatureProfile(
            ProfileKind.GAUSSIAN_PULSE, r_base=0.2, amplitude=2.0, center=1.5, width=0.6
        ),
    ],
)
def test_path_endpoints_match_point_evaluation(profile):
    path = GeometryService.curvature_path(profile, ThermoParams(beta=1.0), 0.1, 2.7, 57)
    assert abs(path.R[0] - GeometryService.curvature_at(profile, 0.1)) <= 1e-14
    assert abs(path.R[-1] - GeometryService.curvature_at(profile, 2.7)) <= 1e-14


def test_sinusoid_path_is_closed():
    profile = CurvatureProfile(ProfileKind.SINUSOIDAL, r_base=2.0, amplitude=0.5, period=8.0)
    path = GeometryService.curvature_path(profile, ThermoParams(beta=1.0), 0.0, 8.0, 401)
    assert path.R[0] == path.R[-1]
    assert trapezoid(path.dR_dt, path.t) == pytest.approx(0.0, abs=1e-9)


def test_time_grid_validation():
    with pytest.raises(DomainError):
        GeometryService.time_grid(0.0, 1.0, 1)
    with pytest.raises(DomainError):
        GeometryService.time_grid(1.0, 0.0, 5)


def test_bounds():
    profile = CurvatureProfile(ProfileKind.LINEAR_RAMP, r_base=1.0, rate=2.0)
    assert GeometryService.bounds(profile, ThermoParams(beta=2.0), 0.0, 1.0) == (
        1.0, 3.0, 2.0, 6.0
    )

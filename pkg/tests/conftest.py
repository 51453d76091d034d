# Shared fixtures for the service tests
import copy
import math

import pytest

from models import (
    CurvatureProfile,
    ModelKind,
    PhysicalConstants,
    ProfileKind,
    QuantumModel,
    ThermoParams,
)


BASE_DOCUMENT = {
    "name": "unit",
    "model": {"kind": "gauge-ladder", "n": 3, "tilt": 0.1, "gauge_rates": [0.5, 1.0, 1.5]},
    "profile": {"kind": "linear-ramp", "r_base": 1.0, "rate": 0.01},
    "thermo": {"beta": 0.5},
    "run": {"t0": 0.0, "t1": 20.0, "steps": 400, "bounds": "R"},
}


@pytest.fixture
def document():
    """A small valid scenario document; tests mutate their own copy."""
    return copy.deepcopy(BASE_DOCUMENT)


@pytest.fixture
def gauge_ladder():
    return QuantumModel(ModelKind.GAUGE_LADDER, n=3, gauge_rates=(1.0, 3.0, 2.0))


@pytest.fixture
def beta_ladder():
    return QuantumModel(
        ModelKind.BETA_LADDER, n=3, gauge_rates=(1.0, 1.5, 2.0), beta_coupling=0.5
    )


@pytest.fixture
def spin_cone():
    return QuantumModel(ModelKind.SPIN_CONE, cone_angle=math.pi / 2, field_strength=1.0)


@pytest.fixture
def ramp_one_to_three():
    """R goes from 1 to 3 over t in [0, 1]."""
    return CurvatureProfile(ProfileKind.LINEAR_RAMP, r_base=1.0, rate=2.0)


@pytest.fixture
def planck():
    return PhysicalConstants()


@pytest.fixture
def thermo_two():
    return ThermoParams(beta=2.0)

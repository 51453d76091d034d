import os
from dataclasses import replace

import pytest

from models import PhysicalConstants
from services import verify_service
from services.verify_service import CriterionResult, VerifyService


def test_constants_pass_in_planck_units():
    result = verify_service.check_constants(PhysicalConstants())
    assert result.passed
    assert result.metric == 0.0


def test_perturbed_kappa_fails_the_constants_criterion():
    constants = replace(PhysicalConstants(), kappa_override=8.0)
    assert not verify_service.check_constants(constants).passed


def test_einstein_trace_identity():
    assert verify_service.check_einstein_trace(PhysicalConstants()).passed


def test_cosmological_constant_criterion():
    result = verify_service.check_cosmological_constant()
    assert result.passed, result.detail


def test_thermo_oracle_criterion():
    result = verify_service.check_thermo_oracle(draws=3)
    assert result.passed, result.detail


def test_phase_agreement_residuals_are_small_and_shrinking():
    result = verify_service.check_phase_agreement()
    residuals = [float(r) for r in result.detail.split()]
    assert result.passed, result.detail
    assert residuals[0] > 0.0
    assert residuals[0] > residuals[1] > residuals[2]


def test_criteria_are_listed_in_reporting_order():
    names = [name for name, _ in VerifyService.criteria()]
    assert names == [
        "constants",
        "unitarity",
        "holonomy",
        "phase_agreement",
        "thermo_oracle",
        "einstein_trace",
        "cosmological_constant",
        "reduction_rule",
        "reproducibility",
    ]


def test_guarded_turns_errors_into_failures():
    def broken():
        verify_service.GravityService.omega_constant(1.0, PhysicalConstants())

    result = VerifyService._guarded("pole", broken)
    assert not result.passed
    assert result.detail.startswith("E_SINGULARITY")


def test_run_all_writes_summary(tmp_path, monkeypatch):
    quick = [
        ("constants", lambda: verify_service.check_constants(PhysicalConstants())),
        ("fake", lambda: CriterionResult("fake", False, 1.0, "forced")),
    ]
    monkeypatch.setattr(VerifyService, "criteria", staticmethod(lambda *args: quick))
    summary = VerifyService.run_all(threads=2, out_dir=str(tmp_path))
    assert not summary.passed
    assert [r.name for r in summary.results] == ["constants", "fake"]
    lines = (tmp_path / "verify.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0] == "criterion,passed,metric,detail"
    assert len(lines) == 3


@pytest.mark.slow
def test_full_suite_passes(tmp_path):
    summary = VerifyService.run_all(threads=4, out_dir=str(tmp_path))
    failed = [f"{r.name}: {r.detail}" for r in summary.results if not r.passed]
    assert not failed
    assert os.path.exists(tmp_path / "verify.csv")

"""
Error types for the curvature phase lab.

Every error carries a stable code (recorded in run reports) and the CLI exit status it maps to:
1 validation, 2 numeric failure, 3 I/O.
"""
from typing import List, Optional


class PhaseLabError(Exception):
    """Base class for all errors raised by the services."""

    code = "E_UNKNOWN"
    exit_status = 2

    def to_dict(self, stage: Optional[str] = None) -> dict:
        record = {"code": self.code, "message": str(self)}
        if stage is not None:
            record = {"stage": stage, **record}
        return record


class DomainError(PhaseLabError, ValueError):
    """An argument lies outside the operation's domain."""

    code = "E_DOMAIN"
    exit_status = 1


class ConfigValidationError(PhaseLabError, ValueError):
    """A scenario configuration failed validation. Lists every offending key."""

    code = "E_CONFIG"
    exit_status = 1

    def __init__(self, problems: List[str]):
        self.problems = list(problems)
        super().__init__("invalid configuration: " + "; ".join(self.problems))


class NumericError(PhaseLabError):
    """Quadrature or finite-difference evaluation produced non-finite values."""

    code = "E_NUMERIC"


class IntegrationError(NumericError):
    """Propagation lost unitarity beyond the accepted drift."""

    code = "E_INTEGRATION"


class DegeneracyError(NumericError):
    """Spectral gap fell below the degeneracy floor."""

    code = "E_DEGENERACY"


class NonAdiabaticError(NumericError):
    """Fidelity to the instantaneous eigenstate dropped below threshold."""

    code = "E_NON_ADIABATIC"


class SingularityError(NumericError):
    """Evaluation at a pole of a closed-form expression."""

    code = "E_SINGULARITY"


class OutputError(PhaseLabError):
    """Writing an output file failed."""

    code = "E_IO"
    exit_status = 3

    def __init__(self, path: str, reason: str):
        self.path = path
        super().__init__(f"cannot write {path}: {reason}")

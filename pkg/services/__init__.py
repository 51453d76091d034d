"""
Services package: the numerical pipeline and the harness around it.
"""
from .model_service import QuantumModelService
from .geometry_service import GeometryService
from .propagator_service import PropagatorService
from .phase_service import PhaseService
from .thermo_service import ThermoService
from .gravity_service import GravityService
from .reduction_service import ReductionService
from .report_service import ReportService
from .scenario_service import ScenarioService
from .ledger_service import LedgerService
from .verify_service import VerifyService

__all__ = [
    "QuantumModelService",
    "GeometryService",
    "PropagatorService",
    "PhaseService",
    "ThermoService",
    "GravityService",
    "ReductionService",
    "ReportService",
    "ScenarioService",
    "LedgerService",
    "VerifyService",
]

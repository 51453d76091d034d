"""
Ledger Service - records executed runs in the SQL ledger and reads them back.
"""
import logging
from typing import List, Optional

from sqlalchemy.orm import Session

from models import RunRecord, RunReport

logger = logging.getLogger(__name__)


class LedgerService:
    """Service for the run ledger. Never affects data outputs."""

    @staticmethod
    def record(
        db: Session,
        report: RunReport,
        sweep_parameter: Optional[str] = None,
        sweep_value: Optional[float] = None,
    ) -> RunRecord:
        """Store one run report as a ledger row."""
        phase, thermo, gravity = report.phase, report.thermo, report.gravity
        record = RunRecord(
            scenario=report.scenario,
            config_hash=report.config_hash,
            sweep_parameter=sweep_parameter,
            sweep_value=sweep_value,
            status=report.status.value,
            error_code=report.errors[0]["code"] if report.errors else None,
            geometric_angle_numeric=phase.geometric_angle_numeric if phase else None,
            geometric_angle_analytic=phase.geometric_angle_analytic if phase else None,
            phase_residual=phase.residual if phase else None,
            ln_z=thermo.ln_Z if thermo else None,
            expected_energy=thermo.E_fd if thermo else None,
            cosmological_constant=gravity.cosmological_constant if gravity else None,
            trace_residual=gravity.trace_residual if gravity else None,
        )
        db.add(record)
        db.commit()
        db.refresh(record)
        return record

    @staticmethod
    def recent(db: Session, limit: int = 20) -> List[RunRecord]:
        """Most recent rows first."""
        return (
            db.query(RunRecord)
            .order_by(RunRecord.created_at.desc(), RunRecord.id.desc())
            .limit(limit)
            .all()
        )

    @staticmethod
    def by_config_hash(db: Session, config_hash: str) -> List[RunRecord]:
        return (
            db.query(RunRecord)
            .filter(RunRecord.config_hash == config_hash)
            .order_by(RunRecord.id)
            .all()
        )

    @staticmethod
    def by_scenario(db: Session, scenario: str) -> List[RunRecord]:
        return (
            db.query(RunRecord)
            .filter(RunRecord.scenario == scenario)
            .order_by(RunRecord.id)
            .all()
        )

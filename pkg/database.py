"""
Database configuration and session management for the run ledger.
"""
import os
from contextlib import contextmanager

from sqlalchemy import create_engine
from sqlalchemy.engine import Engine
from sqlalchemy.orm import declarative_base, sessionmaker

# SQLite by default, any SQLAlchemy URL works
DATABASE_URL = os.environ.get("PHASELAB_DATABASE_URL", "sqlite:///phase_runs.db")


def make_engine(url: str = DATABASE_URL) -> Engine:
    return create_engine(
        url,
        echo=False,  # Set to True for SQL debugging
        connect_args={"check_same_thread": False} if url.startswith("sqlite") else {},
    )


# Engines connect lazily, so importing this module never touches the database file
engine = make_engine()

SessionLocal = sessionmaker(autocommit=False, autoflush=False, bind=engine)

Base = declarative_base()


def init_db(bind: Engine = None):
    """Create the ledger tables if they do not exist yet."""
    from models import RunRecord  # noqa: F401  (registers the table on Base.metadata)

    Base.metadata.create_all(bind=bind or engine)


@contextmanager
def get_db():
    """Get a database session. Use as context manager."""
    db = SessionLocal()
    try:
        yield db
    finally:
        db.close()

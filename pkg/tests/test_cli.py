import json
from contextlib import contextmanager

import pytest
from click.testing import CliRunner
from sqlalchemy.orm import sessionmaker

import app
from database import init_db, make_engine
from models import PhysicalConstants
from services import verify_service
from services.verify_service import CriterionResult, VerifyService


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def write_config(tmp_path):
    def write(document):
        path = tmp_path / "scenario.json"
        path.write_text(json.dumps(document), encoding="utf-8")
        return str(path)

    return write


@pytest.fixture
def ledger_db(monkeypatch):
    engine = make_engine("sqlite://")
    Session = sessionmaker(bind=engine)

    @contextmanager
    def session():
        db = Session()
        try:
            yield db
        finally:
            db.close()

    monkeypatch.setattr(app, "init_db", lambda: init_db(bind=engine))
    monkeypatch.setattr(app, "get_db", session)
    yield engine
    engine.dispose()


def test_run_writes_report(runner, write_config, document, tmp_path):
    out = tmp_path / "out"
    result = runner.invoke(app.cli, ["run", "--config", write_config(document), "--out", str(out)])
    assert result.exit_code == 0, result.output
    assert "✓ unit (ok)" in result.output
    assert (out / "report.json").exists()
    assert (out / "provenance.json").exists()


def test_run_format_override(runner, write_config, document, tmp_path):
    out = tmp_path / "csv"
    args = ["run", "--config", write_config(document), "--out", str(out), "--format", "csv"]
    result = runner.invoke(app.cli, args)
    assert result.exit_code == 0, result.output
    assert (out / "report.csv").exists()


def test_invalid_config_lists_problems(runner, write_config, document):
    document["model"]["colour"] = "blue"
    del document["run"]["steps"]
    result = runner.invoke(app.cli, ["run", "--config", write_config(document)])
    assert result.exit_code == 1
    assert "model.colour: unknown key" in result.output
    assert "run.steps: missing required key" in result.output


def test_unwritable_output_exits_with_io_status(runner, write_config, document, tmp_path):
    blocker = tmp_path / "blocker"
    blocker.write_text("file")
    args = ["run", "--config", write_config(document), "--out", str(blocker / "out")]
    result = runner.invoke(app.cli, args)
    assert result.exit_code == 3
    assert "E_IO" in result.output
    assert "blocker" in result.output


def test_failed_stage_sets_exit_status(runner, write_config, document, tmp_path):
    document["thermo"]["beta"] = 0.0
    args = ["run", "--config", write_config(document), "--out", str(tmp_path / "o")]
    result = runner.invoke(app.cli, args)
    assert result.exit_code == 1
    assert "✗ thermo: E_DOMAIN" in result.output


def test_sweep_reports_each_row(runner, write_config, document, tmp_path):
    document["sweep"] = {"parameter": "thermo.beta", "values": [0.5, 1.0]}
    args = ["sweep", "--config", write_config(document), "--out", str(tmp_path / "s"),
            "--threads", "2"]
    result = runner.invoke(app.cli, args)
    assert result.exit_code == 2
    assert "✓ thermo.beta=0.5 (ok)" in result.output
    assert "✗ thermo.beta=1 (failed)" in result.output
    assert (tmp_path / "s" / "sweep.json").exists()


def test_emit_plot_data(runner, write_config, document, tmp_path):
    out = tmp_path / "plots"
    args = ["emit-plot-data", "--config", write_config(document), "--out", str(out)]
    result = runner.invoke(app.cli, args)
    assert result.exit_code == 0, result.output
    header = (out / "plot_data.csv").read_text(encoding="utf-8").splitlines()[0]
    assert header == "series,x,y"


def test_ledger_round_trip(runner, write_config, document, tmp_path, ledger_db):
    empty = runner.invoke(app.cli, ["ledger"])
    assert "No runs recorded yet." in empty.output

    args = ["run", "--config", write_config(document), "--out", str(tmp_path / "o"), "--ledger"]
    assert runner.invoke(app.cli, args).exit_code == 0
    listing = runner.invoke(app.cli, ["ledger", "--scenario", "unit"])
    assert listing.exit_code == 0
    assert "unit" in listing.output and "ok" in listing.output


def test_verify_exit_status(runner, tmp_path, monkeypatch):
    passing = [("constants", lambda: verify_service.check_constants(PhysicalConstants()))]
    monkeypatch.setattr(VerifyService, "criteria", staticmethod(lambda *args: passing))
    result = runner.invoke(app.cli, ["verify", "--out", str(tmp_path / "v")])
    assert result.exit_code == 0
    assert "✓ all criteria passed" in result.output

    failing = passing + [("fake", lambda: CriterionResult("fake", False, 1.0, "forced"))]
    monkeypatch.setattr(VerifyService, "criteria", staticmethod(lambda *args: failing))
    result = runner.invoke(app.cli, ["verify", "--out", str(tmp_path / "v")])
    assert result.exit_code == 2
    assert "✗ fake: forced" in result.output


def test_threads_flag_only_on_parallel_commands(runner):
    assert "--threads" not in runner.invoke(app.cli, ["run", "--help"]).output
    assert "--threads" in runner.invoke(app.cli, ["sweep", "--help"]).output
    assert "--threads" in runner.invoke(app.cli, ["verify", "--help"]).output

"""
phaselab - batch command line for the curvature phase lab.

    phaselab run --config scenarios/spincone_loop.json --out out/spincone
    phaselab sweep --config scenarios/beta_ladder_ramp.json --format csv --threads 4
    phaselab verify --out out/verify
    phaselab emit-plot-data --config scenarios/gauge_ladder_loop.json --out out/plots
    phaselab ledger --limit 10

Exit status: 0 success, 1 validation error, 2 numeric failure, 3 I/O error.
"""
import logging
import os
from typing import Optional

import click
from sqlalchemy.exc import SQLAlchemyError

from config import ScenarioConfig, load_config
from database import get_db, init_db
from errors import ConfigValidationError, OutputError, PhaseLabError
from models import RunReport
from services.ledger_service import LedgerService
from services.report_service import ReportService
from services.scenario_service import ScenarioService
from services.verify_service import VerifyService

logger = logging.getLogger("phaselab")


# ============================================
# HELPERS
# ============================================

def _load(config_path: str, out: Optional[str], fmt: Optional[str]) -> ScenarioConfig:
    config = load_config(config_path)
    changes = {}
    if out is not None:
        changes["dir"] = out
    if fmt is not None:
        changes["format"] = fmt
    return config.with_outputs(**changes) if changes else config


def _fail(ctx: click.Context, exc: PhaseLabError) -> None:
    if isinstance(exc, ConfigValidationError):
        click.echo("✗ invalid configuration:", err=True)
        for problem in exc.problems:
            click.echo(f"  - {problem}", err=True)
    else:
        click.echo(f"✗ {exc.code}: {exc}", err=True)
    ctx.exit(exc.exit_status)


def _record(report: RunReport, parameter: Optional[str] = None, value: Optional[float] = None):
    try:
        init_db()
        with get_db() as db:
            LedgerService.record(db, report, parameter, value)
    except SQLAlchemyError as exc:
        logger.warning("could not record run in ledger: %s", exc)


def _summarize(report: RunReport) -> None:
    if report.phase is not None:
        click.echo(
            f"  geometric phase: numeric {report.phase.geometric_angle_numeric:+.6f}, "
            f"analytic {report.phase.geometric_angle_analytic:+.6f}, "
            f"residual {report.phase.residual:.2e}"
        )
    if report.thermo is not None:
        click.echo(f"  ln Z {report.thermo.ln_Z:+.6e}, <E> {report.thermo.E_fd:+.6e}")
    if report.gravity is not None:
        click.echo(
            f"  Λ {report.gravity.cosmological_constant:+.6e}, "
            f"trace residual {report.gravity.trace_residual:.2e}"
        )
    for error in report.errors:
        click.echo(f"  ✗ {error['stage']}: {error['code']} {error['message']}")


# ============================================
# COMMANDS
# ============================================

@click.group()
@click.option("--verbose", "-v", is_flag=True, help="Debug logging.")
def cli(verbose: bool):
    """Curvature-indexed adiabatic evolution, geometric phases and Einstein-trace checks."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


config_option = click.option(
    "--config", "config_path", required=True, type=click.Path(dir_okay=False),
    help="Scenario JSON file.",
)
out_option = click.option("--out", default=None, help="Output directory (overrides outputs.dir).")
format_option = click.option(
    "--format", "fmt", type=click.Choice(["csv", "json"]), default=None,
    help="Report format (overrides outputs.format).",
)
threads_option = click.option("--threads", default=1, show_default=True, type=click.IntRange(1))


@cli.command()
@config_option
@out_option
@format_option
@click.option("--ledger", is_flag=True, help="Record the run in the SQL ledger.")
@click.pass_context
def run(ctx, config_path, out, fmt, ledger):
    """Run one scenario and write its report."""
    try:
        config = _load(config_path, out, fmt)
        report = ScenarioService.run_scenario(config, out_dir=config.outputs.dir)
    except PhaseLabError as exc:
        _fail(ctx, exc)
        return

    mark = "✓" if not report.errors else "✗"
    click.echo(f"{mark} {config.name} ({report.status.value}) -> {config.outputs.dir}")
    _summarize(report)
    if ledger:
        _record(report)
    ctx.exit(report.exit_status)


@cli.command()
@config_option
@out_option
@format_option
@threads_option
@click.option("--ledger", is_flag=True, help="Record every row in the SQL ledger.")
@click.pass_context
def sweep(ctx, config_path, out, fmt, threads, ledger):
    """Run one scenario per value of the configured sweep parameter."""
    try:
        config = _load(config_path, out, fmt)
        result = ScenarioService.run_sweep(config, threads=threads, out_dir=config.outputs.dir)
    except PhaseLabError as exc:
        _fail(ctx, exc)
        return

    for value, report in zip(result.values, result.reports):
        mark = "✓" if not report.errors else "✗"
        click.echo(f"{mark} {result.parameter}={value:g} ({report.status.value})")
        if ledger:
            _record(report, result.parameter, value)
    click.echo(f"✓ {len(result.reports)} rows -> {config.outputs.dir}")
    ctx.exit(result.exit_status)


@cli.command()
@click.option("--out", default=os.path.join("out", "verify"), show_default=True)
@threads_option
@click.pass_context
def verify(ctx, out, threads):
    """Run the acceptance suite; exit 0 only if every criterion passes."""
    try:
        summary = VerifyService.run_all(threads=threads, out_dir=out)
    except OutputError as exc:
        _fail(ctx, exc)
        return

    for result in summary.results:
        mark = "✓" if result.passed else "✗"
        click.echo(f"{mark} {result.name}: {result.detail}")
    click.echo("✓ all criteria passed" if summary.passed else "✗ verification failed")
    ctx.exit(0 if summary.passed else 2)


@cli.command("emit-plot-data")
@config_option
@out_option
@threads_option
@click.pass_context
def emit_plot_data(ctx, config_path, out, threads):
    """Write tidy (series, x, y) plot data for a scenario."""
    try:
        config = _load(config_path, out, None)
        frame = ScenarioService.plot_data(config, threads=threads)
        ReportService.ensure_dir(config.outputs.dir)
        path = ReportService.write_frame(os.path.join(config.outputs.dir, "plot_data.csv"), frame)
    except PhaseLabError as exc:
        _fail(ctx, exc)
        return
    click.echo(f"✓ wrote {path} ({len(frame)} points)")


@cli.command()
@click.option("--limit", default=20, show_default=True, type=click.IntRange(1))
@click.option("--scenario", default=None, help="Only rows for this scenario name.")
def ledger(limit, scenario):
    """List recorded runs, newest first."""
    init_db()
    with get_db() as db:
        if scenario:
            rows = LedgerService.by_scenario(db, scenario)[-limit:][::-1]
        else:
            rows = LedgerService.recent(db, limit)
        if not rows:
            click.echo("No runs recorded yet.")
            return
        for row in rows:
            residual = "-" if row.phase_residual is None else f"{row.phase_residual:.2e}"
            sweep_note = ""
            if row.sweep_parameter:
                sweep_note = f" {row.sweep_parameter}={row.sweep_value:g}"
            click.echo(
                f"{row.created_at:%Y-%m-%d %H:%M:%S}  {row.scenario}{sweep_note}  "
                f"{row.status}  residual {residual}  {row.config_hash[:12]}"
            )


if __name__ == "__main__":
    cli()

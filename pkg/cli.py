"""
Command line front-end

Runs an experiment config and writes deterministic CSV. Errors are
turned into exit codes here: 2 for config and domain errors, 3 when an
enumeration would pass the cap and 4 when a check fails
"""

import logging

import click

from config import init_logging, load_settings
from errors import CutoffLabError
from experiments import (
    analysis_options,
    ensure_passed,
    load_config,
    run_command,
    write_csv,
)


logger = logging.getLogger(__name__)


SHARED_OPTIONS = (
    click.option("--config", "config_path", required=True, type=click.Path(dir_okay=False)),
    click.option("--output", default=None, type=click.Path(dir_okay=False, allow_dash=True),
                 help="CSV destination; falls back to the config output, then standard output."),
    click.option("--threads", type=click.IntRange(min=1), default=None,
                 help="Worker threads for family members."),
    click.option("--cap", type=click.IntRange(min=1), default=None,
                 help="Largest number of elements a single enumeration may visit."),
    click.option("--epsilon", type=float, default=None,
                 help="Target distance for cut-off windows."),
    click.option("--radius", type=click.IntRange(min=0), default=None,
                 help="Truncation or ball radius."),
)


def shared_options(command):
    for option in reversed(SHARED_OPTIONS):
        command = option(command)
    return command


def _run(name: str, config_path: str, output: str | None, threads, cap, epsilon, radius) -> None:
    settings = load_settings().override(threads=threads, cap=cap)
    init_logging(settings.log_level)
    ctx = click.get_current_context()
    logger.info("Starting %s with %s", name, config_path)
    try:
        config = load_config(config_path)
        output = output or config.get("output", "-")
        options = analysis_options(config, settings, name, epsilon, radius)
        report = run_command(name, config, options)
        with click.open_file(output, "w") as stream:
            write_csv(stream, report)
        if report.summary:
            click.echo(report.summary, err=output == "-")
        ensure_passed(report)
    except CutoffLabError as error:
        click.echo(f"error: {error}", err=True)
        logger.info("%s stopped with exit code %d", name, error.exit_code)
        ctx.exit(error.exit_code)
    logger.info("Finished %s", name)


@click.group()
def cli():
    """Certified total variation bounds for powers of positive definite functions"""


@cli.command()
@shared_options
def analyze(config_path, output, threads, cap, epsilon, radius):
    """Bounds for every k of a single state or of each family member."""
    _run("analyze", config_path, output, threads, cap, epsilon, radius)


@cli.command()
@shared_options
def scan(config_path, output, threads, cap, epsilon, radius):
    """Cut-off windows across a family, with a summary line."""
    _run("scan", config_path, output, threads, cap, epsilon, radius)


@cli.command()
@shared_options
def verify(config_path, output, threads, cap, epsilon, radius):
    """Compares closed forms with brute-force enumeration."""
    _run("verify", config_path, output, threads, cap, epsilon, radius)


@cli.command()
@shared_options
def cogrowth(config_path, output, threads, cap, epsilon, radius):
    """Counts relations of the marking by length."""
    _run("cogrowth", config_path, output, threads, cap, epsilon, radius)


@cli.command("psd-check")
@shared_options
def psd_check(config_path, output, threads, cap, epsilon, radius):
    """Smallest Gram matrix eigenvalue on a ball."""
    _run("psd-check", config_path, output, threads, cap, epsilon, radius)


if __name__ == "__main__":
    cli()

"""Provide a CLI application for running hilbert-asip experiments.

Exit codes: 0 on success, 1 when a hard suite fails, 2 on domain or config errors, and
3 when the output directory can't be written.
"""

import functools
import json
import logging
from collections.abc import Callable
from pathlib import Path

import click

import hilbert_asip
from hilbert_asip.base_model import DomainError
from hilbert_asip.config import ExperimentConfig, resolve_config
from hilbert_asip.logging import initialize_logs
from hilbert_asip.markov import beta_bound, beta_exact, default_chain, load_chain
from hilbert_asip.rates import RateInputs, rate_report
from hilbert_asip.utils.export import dumps, write_json, write_path_csv
from hilbert_asip.utils.storage import (
    MANIFEST_NAME,
    get_latest_run_dir,
    get_output_dir,
    get_run_dir,
)
from hilbert_asip.verify import SUITES, SuiteContext, build_manifest, run_suites

_logger = logging.getLogger(__name__)

EXIT_SUITE_FAILURE = 1
EXIT_IO_ERROR = 3


def _handle_errors(fn: Callable) -> Callable:
    """Map domain errors and malformed JSON inputs to usage errors (exit 2) and OS
    errors to exit 3.
    """

    @functools.wraps(fn)
    def wrapper(*args, **kwargs) -> None:  # noqa: ANN002
        try:
            fn(*args, **kwargs)
        except DomainError as e:
            _logger.error("Domain error: %s", e)
            raise click.UsageError(str(e)) from e
        except json.JSONDecodeError as e:
            _logger.error("Malformed JSON input: %s", e)
            msg = f"Malformed JSON input: {e}"
            raise click.UsageError(msg) from e
        except OSError as e:
            _logger.error("I/O error: %s", e)
            click.echo(f"Error: {e}", err=True)
            click.get_current_context().exit(EXIT_IO_ERROR)

    return wrapper


def _experiment_options(fn: Callable) -> Callable:
    """Attach the shared experiment flags; unset flags leave file/default values alone."""
    options = [
        click.option("--config", "config_file", type=click.Path(exists=True, dir_okay=False, path_type=Path), help="Flat JSON config file."),
        click.option("--chain", type=click.Path(exists=True, dir_okay=False, path_type=Path), help="Finite chain JSON; selects the markov model."),
        click.option("--D", "D", type=int, help="Truncation dimension."),
        click.option("--c", type=float, help="FAR eigenvalue scale."),
        click.option("--delta", type=float, help="FAR eigenvalue decay exponent."),
        click.option("--noise", type=click.Choice(["gaussian", "uniform", "laplace", "student_t"]), help="FAR noise law."),
        click.option("--n", type=int, help="Path length."),
        click.option("--R", "R", type=int, help="Number of replicas."),
        click.option("--seed", type=int, help="Experiment seed."),
        click.option("--alpha1", type=float, help="Big-block exponent."),
        click.option("--cstar", type=str, help="Small-block constant, or 'auto'."),
        click.option("--pprime", type=float, help="Working moment order."),
        click.option("--p", type=float, help="Moment order."),
        click.option("--epsilon", type=float, help="Rate slack."),
        click.option("--output-dir", "output_dir", type=click.Path(path_type=Path), help="Run output directory."),
        click.option("--workers", type=int, help="Parallel replica workers (-1 for all cores)."),
        click.option("--silent/--progress", "silent", default=None, help="Hide or show progress bars."),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


def _resolve(config_file: Path | None, overrides: dict) -> ExperimentConfig:
    cstar = overrides.get("cstar")
    if cstar is not None and cstar != "auto":
        try:
            overrides["cstar"] = float(cstar)
        except ValueError as e:
            msg = f"cstar must be a positive number or 'auto', got '{cstar}'"
            raise DomainError(msg) from e
    return resolve_config(config_file, overrides)


def _run_dir(config: ExperimentConfig, command: str) -> Path:
    if config.output_dir is not None:
        return config.output_dir
    return get_run_dir(command, config.model, config.seed)


@click.group()
@click.version_option(hilbert_asip.__version__)
def cli() -> None:
    """Simulate beta-mixing Hilbert space time series and verify invariance principle bounds."""
    initialize_logs()


@cli.command()
def path() -> None:
    """Get path to hilbert-asip output directory given current environment configuration."""
    click.echo(get_output_dir())


@cli.command()
@click.option("--p", type=float, required=True, help="Moment order, above 2.")
@click.option("--delta", type=float, default=2.0, show_default=True, help="Eigenvalue decay exponent.")
@click.option("--epsilon", type=float, help="Rate slack.")
@click.option("--pprime", type=float, help="Working moment order in (2, p).")
@click.option("--d", type=int, help="Projection dimension, at least 2.")
@_handle_errors
def rates(p: float, delta: float, epsilon: float | None, pprime: float | None, d: int | None) -> None:
    """Evaluate rate exponents and print them as a JSON document.

    For example, to get the coupling exponent for p = 4 and decay exponent 2:

        % hilbert-asip rates --p 4 --delta 2

    Rates whose inputs aren't given are reported as null.
    """
    inputs = RateInputs(p, delta, delta, pprime=pprime, epsilon=epsilon, d=d)
    click.echo(dumps(rate_report(inputs).to_dict()), nl=False)


@cli.command()
@_experiment_options
@_handle_errors
def simulate(config_file: Path | None, **overrides) -> None:
    """Simulate replicas and write one CSV per replica.

    Files are named ``path_<seed>_<replica>.csv`` with header ``t,c1,...,cD``.
    """
    config = _resolve(config_file, overrides)
    ctx = SuiteContext.from_config(config)
    run_dir = _run_dir(config, "simulate")
    run_dir.mkdir(parents=True, exist_ok=True)
    write_json(run_dir / MANIFEST_NAME, build_manifest(ctx, hilbert_asip.__version__, "simulate"))
    for replica in range(config.R):
        outfile = run_dir / f"path_{config.seed}_{replica}.csv"
        write_path_csv(outfile, ctx.model.simulate(config.n, config.seed, replica))
    _logger.info("Wrote %s paths to %s", config.R, run_dir)
    click.echo(run_dir)


@cli.command()
@_experiment_options
@click.option("--suite", "suites", multiple=True, type=click.Choice(list(SUITES)), help="Run only these suites (repeatable).")
@_handle_errors
def verify(config_file: Path | None, suites: tuple[str, ...], **overrides) -> None:
    """Run verification suites and write JSON verdicts and CSV tables.

    Prints one summary line per suite. Exits with status 1 if any hard suite fails;
    diagnostic suites never affect the exit status.
    """
    config = _resolve(config_file, overrides)
    ctx = SuiteContext.from_config(config)
    run_dir = _run_dir(config, "verify")
    verdicts = run_suites(ctx, run_dir, hilbert_asip.__version__, list(suites) or None)
    for verdict in verdicts:
        status = "PASS" if verdict.passed else "FAIL"
        kind = "hard" if verdict.hard else "diagnostic"
        click.echo(f"{status} {verdict.suite} ({kind})")
    if any(v.hard and not v.passed for v in verdicts):
        click.get_current_context().exit(EXIT_SUITE_FAILURE)


@cli.command()
@click.option("--chain", type=click.Path(exists=True, dir_okay=False, path_type=Path), help="Finite chain JSON; defaults to the shipped two-state chain.")
@click.option("--n-max", "n_max", type=int, default=30, show_default=True, help="Largest lag.")
@_handle_errors
def mixing(chain: Path | None, n_max: int) -> None:
    """Print exact beta-mixing coefficients next to the drift-based bound."""
    model = load_chain(chain) if chain else default_chain()
    click.echo("n,beta_exact,beta_bound")
    for n in range(1, n_max + 1):
        click.echo(f"{n},{beta_exact(model, n)!r},{beta_bound(model, n)!r}")


@cli.command()
@click.argument("run_dir", required=False, type=click.Path(exists=True, file_okay=False, path_type=Path))
@_handle_errors
def report(run_dir: Path | None) -> None:
    """Render the verdicts of a run as a Markdown summary.

    Without RUN_DIR, the most recent run under the output directory is used.
    """
    if run_dir is None:
        run_dir = get_latest_run_dir(get_output_dir())
    click.echo(render_report(run_dir), nl=False)


def render_report(run_dir: Path) -> str:
    """Build the Markdown summary of a run directory.

    :param run_dir: directory holding a manifest and verdict JSONs
    :return: Markdown text
    """
    manifest = json.loads((run_dir / MANIFEST_NAME).read_text())
    lines = [
        f"# Verification report: {run_dir.name}",
        "",
        f"- version: {manifest['version']}",
        f"- model: {manifest['config']['model']}",
        f"- seed: {manifest['config']['seed']}",
        f"- cstar: {manifest['config']['cstar']}",
        "",
        "| suite | kind | result | statistics |",
        "| --- | --- | --- | --- |",
    ]
    for verdict_file in sorted(run_dir.glob("*.json")):
        if verdict_file.name == MANIFEST_NAME:
            continue
        verdict = json.loads(verdict_file.read_text())
        stats = ", ".join(
            f"{k}={v}" for k, v in sorted(verdict["statistics"].items()) if not isinstance(v, dict)
        )
        kind = "hard" if verdict["hard"] else "diagnostic"
        result = "pass" if verdict["pass"] else "fail"
        lines.append(f"| {verdict['suite']} | {kind} | {result} | {stats} |")
    return "\n".join(lines) + "\n"

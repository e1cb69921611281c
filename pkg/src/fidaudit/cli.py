"""Command-line interface.

    fidaudit check SCENARIO [--report PATH] [--format text|machine]
                            [--tol FLOAT] [--seed INT]
    fidaudit validate SCENARIO
    fidaudit catalog LABEL
    fidaudit --version

Exit codes from ``check``: 0 pass, 1 warn, 2 fail; schema errors also
exit 2. All configuration is flags and the scenario file; no environment
variables are consulted.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import __version__
from .audit import EXIT_CODES, emit_report, run_audit
from .context import catalog_lookup
from .errors import SchemaError, UnknownContextLabel
from .scenario import load_scenario, validate_scenario


@click.group()
@click.version_option(version=__version__, prog_name="fidaudit")
def main() -> None:
    """Audit scenarios for fiduciary-duty compliance signals."""


@main.command()
@click.argument("scenario_file", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--report", "report_path", type=click.Path(dir_okay=False, path_type=Path), default=None, help="Also write the rendered report to this path.")
@click.option("--format", "fmt", type=click.Choice(["text", "machine"]), default="text", show_default=True)
@click.option("--tol", type=float, default=1e-9, show_default=True, help="Information-flow zero threshold.")
@click.option("--seed", type=int, default=0, show_default=True, help="Seed for sampled evidence; recorded in the report.")
def check(scenario_file: Path, report_path: Path | None, fmt: str, tol: float, seed: int) -> None:
    """Run the six-step audit over SCENARIO_FILE."""
    try:
        scenario = load_scenario(scenario_file)
    except SchemaError as exc:
        click.echo(f"schema error: {exc}", err=True)
        sys.exit(2)
    report = run_audit(scenario, tol=tol, seed=seed)
    rendered = emit_report(report, fmt)
    click.echo(rendered, nl=False)
    if report_path is not None:
        report_path.write_text(rendered, encoding="utf-8")
    sys.exit(EXIT_CODES[report.overall])


@main.command()
@click.argument("scenario_file", type=click.Path(exists=True, dir_okay=False, path_type=Path))
def validate(scenario_file: Path) -> None:
    """List every schema violation in SCENARIO_FILE."""
    try:
        raw = json.loads(scenario_file.read_text("utf-8"))
    except json.JSONDecodeError as exc:
        click.echo(f"not valid JSON: {exc}", err=True)
        sys.exit(2)
    problems = validate_scenario(raw)
    if not problems:
        click.echo(f"{scenario_file}: valid")
        return
    for path, message in problems:
        click.echo(f"{path or '<root>'}: {message}")
    sys.exit(2)


@main.command()
@click.argument("context_label")
def catalog(context_label: str) -> None:
    """Print the subsidiary-duty catalog entries for CONTEXT_LABEL."""
    try:
        entries = catalog_lookup(context_label)
    except UnknownContextLabel as exc:
        click.echo(str(exc), err=True)
        sys.exit(2)
    speculative = entries[0].speculative if entries else False
    header = context_label + ("  [proposed context, not yet determined by law]" if speculative else "")
    click.echo(header)
    for entry in entries:
        flags = []
        if entry.information_flow:
            flags.append("information-flow")
        if entry.area:
            flags.append(f"area: {entry.area}")
        suffix = f"  ({', '.join(flags)})" if flags else ""
        click.echo(f"  [{entry.kind:^7}] {entry.duty}{suffix}")
        click.echo(f"            key: {entry.key}  binding: {entry.binding}")


if __name__ == "__main__":
    main()

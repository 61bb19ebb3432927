from pathlib import Path
from typing import Callable, Optional, TypeVar

import typer
from pydantic import BaseModel, ConfigDict

from app.config.config import settings
from app.config.logging import logger
from app.schemas.optimize_schemas import ObjectiveKind
from app.services.figure_service import DEFAULT_RANGES, FigureName, build_figure
from app.services.scenario_service import (
    evaluate_scenario,
    load_scenario,
    optimize_scenario,
)
from app.services.verify_service import render_report, run_verification
from app.utils.csv_output import row_to_csv, table_to_csv
from app.utils.errors import ConfigError, DomainError, VerificationError

EXIT_RUNTIME = 1
EXIT_USAGE = 2
EXIT_VERIFICATION = 3

T = TypeVar("T")

cli = typer.Typer(
    name="pairlink",
    help="Shared information per outcome slot and per photon for entangled-pair links.",
    no_args_is_help=True,
    add_completion=False,
)


class GlobalOptions(BaseModel):
    model_config = ConfigDict(frozen=True)

    config: Optional[Path]
    output: Optional[Path]
    csv: bool
    seed: int
    jobs: int


def _guarded(action: Callable[[], T]) -> T:
    """Run ``action`` and translate package errors into exit codes."""
    try:
        return action()
    except ConfigError as e:
        typer.echo(f"config error: {e}", err=True)
        raise typer.Exit(EXIT_USAGE)
    except VerificationError as e:
        typer.echo(f"verification failed: {e}", err=True)
        raise typer.Exit(EXIT_VERIFICATION)
    except DomainError as e:
        typer.echo(f"error: {e}", err=True)
        raise typer.Exit(EXIT_RUNTIME)
    except OSError as e:
        typer.echo(f"error: {e}", err=True)
        raise typer.Exit(EXIT_RUNTIME)


def _require_config(options: GlobalOptions) -> Path:
    if options.config is None:
        typer.echo("config error: --config <path> is required for this command", err=True)
        raise typer.Exit(EXIT_USAGE)
    return options.config


def _bracket(low: Optional[float], high: Optional[float]) -> Optional[tuple[float, float]]:
    if low is None and high is None:
        return None
    return (
        settings.DEFAULT_LOG10_LOW if low is None else low,
        settings.DEFAULT_LOG10_HIGH if high is None else high,
    )


@cli.callback()
def main(
    ctx: typer.Context,
    config: Optional[Path] = typer.Option(None, "--config", help="Scenario file."),
    output: Optional[Path] = typer.Option(None, "--output", help="Output file."),
    csv: bool = typer.Option(False, "--csv", help="Machine-readable CSV only."),
    seed: int = typer.Option(0, "--seed", min=0, max=2**64 - 1, help="Monte-Carlo seed."),
    jobs: int = typer.Option(settings.DEFAULT_JOBS, "--jobs", min=1, help="Worker processes."),
):
    """Global flags shared by every command."""
    ctx.obj = GlobalOptions(config=config, output=output, csv=csv, seed=seed, jobs=jobs)
    logger.info("command_started", command=ctx.invoked_subcommand)


# ───────────────────────────────────────────────
# eval
# ───────────────────────────────────────────────
@cli.command("eval")
def eval_command(ctx: typer.Context):
    """Evaluate H(A:B), I_g and I_d for the scenario in --config."""
    options: GlobalOptions = ctx.obj
    path = _require_config(options)
    evaluation = _guarded(lambda: evaluate_scenario(load_scenario(path)))
    report = evaluation.report

    row = {
        "name": evaluation.name,
        "source": report.source,
        "lambda": report.mean_pairs,
        "eta": report.link.eta,
        "q": report.link.q,
        "H_bits": report.mutual_info_bits,
        "Ig_bits": report.info_per_generated_bits,
        "Id_bits": report.info_per_detected_bits,
        "M": evaluation.outcome_count,
        "key_bits": evaluation.key_bits,
    }
    if not options.csv:
        typer.echo(
            f"scenario:            {evaluation.name}\n"
            f"source:              {report.source}\n"
            f"eta:                 {report.link.eta:.12g}\n"
            f"q:                   {report.link.q:.12g}\n"
            f"H(A:B) [bits/slot]:  {report.mutual_info_bits:.12g}\n"
            f"I_g [bits/pair]:     {report.info_per_generated_bits:.12g}\n"
            f"I_d [bits/pair]:     {report.info_per_detected_bits:.12g}\n"
            f"M * H(A:B) [bits]:   {evaluation.key_bits:.12g} (M={evaluation.outcome_count})"
        )
    typer.echo(row_to_csv(row), nl=False)


# ───────────────────────────────────────────────
# figure
# ───────────────────────────────────────────────
@cli.command("figure")
def figure_command(
    ctx: typer.Context,
    name: FigureName = typer.Argument(..., help="Figure to reproduce."),
    log10_low: Optional[float] = typer.Option(None, help="Override lower log10(lambda)."),
    log10_high: Optional[float] = typer.Option(None, help="Override upper log10(lambda)."),
    points: Optional[int] = typer.Option(None, min=2, help="Points per lambda sweep."),
):
    """Write the data of one figure as CSV (to --output, default <name>.csv)."""
    options: GlobalOptions = ctx.obj
    output = options.output or Path(f"{name.value}.csv")

    def build() -> str:
        log10_range = None
        if log10_low is not None or log10_high is not None:
            default_low, default_high = DEFAULT_RANGES.get(
                name, (settings.DEFAULT_LOG10_LOW, settings.DEFAULT_LOG10_HIGH)
            )
            log10_range = (
                default_low if log10_low is None else log10_low,
                default_high if log10_high is None else log10_high,
            )
        table = build_figure(name, log10_range, points, options.jobs)
        if str(output) == "-":
            return table_to_csv(table)
        table_to_csv(table, output)
        return ""

    text = _guarded(build)
    if text:
        typer.echo(text, nl=False)
    elif not options.csv:
        typer.echo(f"wrote {output}", err=True)


# ───────────────────────────────────────────────
# optimize
# ───────────────────────────────────────────────
@cli.command("optimize")
def optimize_command(
    ctx: typer.Context,
    objective: Optional[ObjectiveKind] = typer.Option(
        None,
        case_sensitive=False,
        help="Objective (H, Ig, Id); defaults to the scenario's.",
    ),
    log10_low: Optional[float] = typer.Option(None, help="Lower log10(lambda) bracket."),
    log10_high: Optional[float] = typer.Option(None, help="Upper log10(lambda) bracket."),
):
    """Find the brightness lambda* that maximises the objective."""
    options: GlobalOptions = ctx.obj
    path = _require_config(options)
    result = _guarded(
        lambda: optimize_scenario(
            load_scenario(path), objective, _bracket(log10_low, log10_high)
        )
    )
    if not options.csv:
        typer.echo(
            f"objective:   {result.objective_kind.value}\n"
            f"lambda*:     {result.lambda_star:.12g}\n"
            f"value:       {result.objective_value:.12g}\n"
            f"iterations:  {result.iterations}\n"
            f"bracket:     [{result.bracket[0]:g}, {result.bracket[1]:g}] (log10 lambda)"
        )
        return
    typer.echo(
        row_to_csv(
            {
                "objective": result.objective_kind.value,
                "lambda_star": result.lambda_star,
                "value": result.objective_value,
                "iterations": result.iterations,
                "log10_low": result.bracket[0],
                "log10_high": result.bracket[1],
            }
        ),
        nl=False,
    )


# ───────────────────────────────────────────────
# verify
# ───────────────────────────────────────────────
def _float_list(text: Optional[str]) -> Optional[list[float]]:
    if text is None:
        return None
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise typer.BadParameter(f"expected comma-separated numbers, got {text!r}")


@cli.command("verify")
def verify_command(
    ctx: typer.Context,
    trials: int = typer.Option(1_000_000, min=1, help="Monte-Carlo trials per setting."),
    tolerance_scale: float = typer.Option(
        1.0, min=0.0, help="Multiplier applied to every tolerance."
    ),
    lambdas: Optional[str] = typer.Option(None, help="Comma-separated lambda grid."),
    etas: Optional[str] = typer.Option(None, help="Comma-separated eta grid."),
    qs: Optional[str] = typer.Option(None, help="Comma-separated q grid."),
    per_photon: bool = typer.Option(False, help="Binomially thin each photon."),
):
    """Run the analytic-versus-oracle checks; exit 3 on any violation."""
    options: GlobalOptions = ctx.obj
    grid = {
        key: values
        for key, values in (
            ("lambdas", _float_list(lambdas)),
            ("etas", _float_list(etas)),
            ("qs", _float_list(qs)),
        )
        if values is not None
    }

    def verify():
        results = run_verification(
            trials=trials,
            seed=options.seed,
            tolerance_scale=tolerance_scale,
            per_photon=per_photon,
            jobs=options.jobs,
            **grid,
        )
        report = render_report(results)
        if options.output is not None:
            options.output.write_text(report, encoding="utf-8")
        typer.echo(report, nl=False)
        failed = [r.name for r in results if not r.passed]
        if failed:
            raise VerificationError(", ".join(failed))

    _guarded(verify)


if __name__ == "__main__":
    cli()

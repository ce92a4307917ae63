"""Command-line entry points for the analysis pipeline.

Exit codes: 0 success, 1 fatal input error, 2 stage failure,
3 ensemble warning rate exceeded.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click

from .io import IngestError, validate_inputs, write_csv
from .nullmodels import EnsembleWarningError, NullModel
from .pipeline import STAGES, RunConfig, StageError, run
from .synth import SynthConfig, generate_society

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_STAGE = 2
EXIT_ENSEMBLE = 3


def _build_config(ctx_params, stages):
    config_path = ctx_params.get("config")
    overrides = dict(
        events=ctx_params.get("events"),
        transactions=ctx_params.get("transactions"),
        profiles=ctx_params.get("profiles"),
        locations=ctx_params.get("locations"),
        out_dir=ctx_params.get("out"),
        seed=ctx_params.get("seed"),
        threads=ctx_params.get("threads"),
        realizations=ctx_params.get("realizations"),
        null_model=(NullModel(ctx_params["null_model"])
                    if ctx_params.get("null_model") else None),
        swap_multiplier=ctx_params.get("swap_multiplier"),
        n_classes=ctx_params.get("n_classes"),
        segments=ctx_params.get("segments"),
    )
    overrides = {k: v for k, v in overrides.items() if v is not None}
    if config_path:
        cfg = RunConfig.from_toml(config_path, **overrides)
    else:
        cfg = RunConfig(**overrides)
    if stages is not None:
        cfg.stages = stages
    if cfg.out_dir is not None:
        cfg.out_dir = Path(cfg.out_dir)
    return cfg


def _common_options(fn):
    opts = [
        click.option("--config", type=click.Path(exists=True), default=None,
                     help="TOML config file; flags override its values."),
        click.option("--events", type=click.Path(), default=None),
        click.option("--transactions", type=click.Path(), default=None),
        click.option("--profiles", type=click.Path(), default=None),
        click.option("--locations", type=click.Path(), default=None),
        click.option("--out", type=click.Path(), default=None,
                     help="Output directory."),
        click.option("--seed", type=int, default=None),
        click.option("--threads", type=int, default=None),
        click.option("--null-model", type=click.Choice(["nm1", "nm2"]),
                     default=None),
        click.option("--realizations", type=int, default=None),
        click.option("--swap-multiplier", type=float, default=None),
        click.option("--n-classes", type=int, default=None),
        click.option("--segments", type=int, default=None),
    ]
    for opt in reversed(opts):
        fn = opt(fn)
    return fn


def _execute(params, stages):
    try:
        cfg = _build_config(params, stages)
        report = run(cfg)
    except (IngestError, FileNotFoundError, ValueError) as exc:
        click.echo(f"input error: {exc}", err=True)
        sys.exit(EXIT_INPUT)
    except StageError as exc:
        if isinstance(exc.cause, (IngestError, FileNotFoundError)):
            click.echo(f"input error: {exc}", err=True)
            sys.exit(EXIT_INPUT)
        if isinstance(exc.cause, EnsembleWarningError):
            click.echo(f"ensemble warning rate exceeded: {exc}", err=True)
            sys.exit(EXIT_ENSEMBLE)
        click.echo(f"stage failure: {exc}", err=True)
        sys.exit(EXIT_STAGE)
    except EnsembleWarningError as exc:
        click.echo(f"ensemble warning rate exceeded: {exc}", err=True)
        sys.exit(EXIT_ENSEMBLE)
    for stage in report.stages_run:
        click.echo(f"stage {stage}: done")
    click.echo(f"report: {Path(cfg.out_dir) / 'report.json'}")
    sys.exit(EXIT_OK)


@click.group()
def main():
    """Socioeconomic network stratification toolkit."""


def _stage_command(name, stages, help_text):
    @main.command(name=name, help=help_text)
    @_common_options
    def _cmd(**params):
        _execute(params, stages)
    return _cmd


_stage_command("ingest", ["ingest"], "Validate inputs and write diagnostics.")
_stage_command("graph", ["graph"],
               "Build, filter, and reduce the social graph to its analysis core.")
_stage_command("classify", ["classify"],
               "Equal-wealth class partition plus inequality summary.")
_stage_command("stratify", ["stratify"],
               "Class link matrix vs a null-model ensemble.")
_stage_command("richclub", ["richclub"],
               "Wealth-thresholded residual density and rich-club curve.")
_stage_command("spatial", ["spatial"],
               "Inter-class geodesic distance matrices.")
_stage_command("commute", ["commute"],
               "Per-class commuting distance distribution deltas.")
_stage_command("run", None, "Run every configured stage end to end.")


@main.command()
@_common_options
def validate(**params):
    """Schema-check the input CSVs and print diagnostics."""
    diags = validate_inputs(events=params.get("events"),
                            transactions=params.get("transactions"),
                            profiles=params.get("profiles"),
                            locations=params.get("locations"))
    for d in diags.items:
        click.echo(str(d))
    if not diags.items:
        click.echo("no diagnostics")
    sys.exit(EXIT_INPUT if diags.has_fatal else EXIT_OK)


@main.command()
@click.option("--out", type=click.Path(), required=True)
@click.option("--seed", type=int, default=0)
@click.option("--n-nodes", type=int, default=10_000)
@click.option("--n-edges", type=int, default=50_000)
@click.option("--pareto-alpha", type=float, default=1.5)
@click.option("--n-classes", type=int, default=9)
@click.option("--homophily", type=float, default=0.0)
@click.option("--spatial-clusters", type=int, default=9)
@click.option("--cluster-dispersion-km", type=float, default=20.0)
@click.option("--class-cluster-coupling", type=float, default=0.0)
@click.option("--rich-club-boost", type=float, default=1.0)
@click.option("--commute-class-coupling", type=float, default=0.0)
def synth(out, **params):
    """Generate a synthetic society in the pipeline's input CSV formats."""
    try:
        cfg = SynthConfig(**params)
        society = generate_society(cfg)
    except ValueError as exc:
        click.echo(f"input error: {exc}", err=True)
        sys.exit(EXIT_INPUT)
    write_society_csvs(society, Path(out))
    click.echo(f"synthetic society written to {out}")
    sys.exit(EXIT_OK)


def write_society_csvs(society, out_dir: Path) -> None:
    """Emit events/transactions/locations CSVs that round-trip the pipeline.

    Each edge becomes a reciprocal event pair so every node survives the
    in/out-degree activity filter.
    """
    out_dir.mkdir(parents=True, exist_ok=True)
    g = society.graph
    events = []
    ts = 0
    for u, v in g.edges:
        events.append((g.node_ids[u], g.node_ids[v], ts, "call", 60, "", ""))
        events.append((g.node_ids[v], g.node_ids[u], ts + 1, "call", 60, "", ""))
        ts += 2
    write_csv(out_dir / "events.csv",
              ["src", "dst", "timestamp", "kind", "duration",
               "cell_lat", "cell_lon"], events)
    write_csv(out_dir / "transactions.csv",
              ["user", "month", "purchase", "debt"],
              [(g.node_ids[i], 1, float(society.wealth[i]), "")
               for i in range(g.n_nodes)])
    rows = []
    for i in range(g.n_nodes):
        uid = g.node_ids[i]
        home = society.homes.get(i)
        work = society.works.get(i)
        if home is not None:
            rows.append((uid, "zip", home.lat, home.lon))
            rows.append((uid, "home", home.lat, home.lon))
        if work is not None:
            rows.append((uid, "work", work.lat, work.lon))
    write_csv(out_dir / "locations.csv", ["user", "kind", "lat", "lon"], rows)


if __name__ == "__main__":
    main()

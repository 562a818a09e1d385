"""Terminal entry points. Every command is a thin client over the same
Workspace calls the HTTP service uses, so results match between the two."""

from __future__ import annotations

import functools
import json
import sys
from pathlib import Path

import click

from .benchmark import STRATEGIES, run_benchmark
from .engine import DialogueState
from .errors import (
    AgentNotReady,
    CatforgeError,
    DuplicateKey,
    EmptyColumn,
    EmptyTable,
    ForeignKeyViolation,
    HeaderMismatch,
    InsufficientCorpus,
    MissingSlot,
    NoFlows,
    NoTasks,
    NotFound,
    ParseError,
    TypeMismatch,
    UnboundPlaceholder,
    UnknownColumn,
    UnknownTable,
    ValidationError,
)
from .fixture import generate_fixture
from .workspace import Workspace, ingest_order

# exit code 1: the user's declarations or data need fixing
USER_ERRORS = (
    ValidationError,
    ParseError,
    TypeMismatch,
    HeaderMismatch,
    DuplicateKey,
    ForeignKeyViolation,
    MissingSlot,
    UnknownTable,
    UnknownColumn,
    NotFound,
    EmptyTable,
    EmptyColumn,
    UnboundPlaceholder,
    InsufficientCorpus,
    NoTasks,
    NoFlows,
)


def guarded(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except USER_ERRORS as exc:
            click.echo(f"error: {exc}", err=True)
            raise SystemExit(1)
        except (CatforgeError, OSError) as exc:
            click.echo(f"error: {exc}", err=True)
            raise SystemExit(2)

    return wrapper


@click.group()
@click.option(
    "--root",
    type=click.Path(file_okay=False, path_type=Path),
    default=".",
    show_default=True,
    help="Workspace directory (holds catforge.toml).",
)
@click.pass_context
def main(ctx, root: Path):
    """Build, train, and run a database-backed dialogue agent."""
    ctx.obj = root


@main.command()
@click.option("--scale", default=1000, show_default=True, help="Customer row count.")
@click.option("--seed", default=42, show_default=True)
@click.pass_obj
@guarded
def fixture(root: Path, scale: int, seed: int):
    """Write the demo cinema workspace into the root directory."""
    paths = generate_fixture(root, scale=scale, seed=seed)
    for path in paths:
        click.echo(f"wrote {path}")


@main.command()
@click.pass_obj
@guarded
def ingest(root: Path):
    """Load and validate every table's CSV, reporting row counts."""
    ws = Workspace(root)
    schema = ws.schema()
    store = ws.build_store(schema)
    width = max(len(t) for t in ingest_order(schema))
    for table in ingest_order(schema):
        click.echo(f"{table:<{width}}  {store.row_count(table):>6} rows")


@main.command()
@click.pass_obj
@guarded
def generate(root: Path):
    """Expand templates into a corpus and simulate dialogue flows."""
    counts = Workspace(root).generate()
    click.echo(
        f"{counts['utterances']} utterances from {counts['templates']} templates, "
        f"{counts['flows']} flows"
    )


@main.command()
@click.pass_obj
@guarded
def train(root: Path):
    """Fit the intent model and dialogue policy from generated artifacts."""
    ws = Workspace(root)
    counts = ws.train()
    click.echo(
        f"trained {counts['intents']} intents over {counts['vocabulary']} tokens, "
        f"{counts['dm_states']} policy states"
    )
    click.echo("ready" if ws.is_ready() else "artifacts incomplete")


@main.command()
@click.pass_obj
@guarded
def chat(root: Path):
    """Talk to the trained agent in the terminal."""
    ws = Workspace(root)
    if not ws.is_ready():
        raise AgentNotReady("no trained model in this workspace; run generate then train")
    engine = ws.build_engine()
    state = DialogueState(session_id="local")
    click.echo("connected; /quit to leave")
    while True:
        try:
            text = input("you> ")
        except EOFError:
            break
        if text.strip() == "/quit":
            break
        if not text.strip():
            continue
        state, response = engine.step(state, text)
        click.echo(f"bot> {response.text}")
        transaction = response.transaction
        if transaction is not None:
            click.echo(f"[{transaction.task}: {transaction.outcome}]")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
@click.option(
    "--ui-dir",
    type=click.Path(file_okay=False, path_type=Path),
    default=None,
    help="Static assets to mount at /ui (default: ./frontend/dist if present).",
)
@click.pass_obj
@guarded
def serve(root: Path, host: str, port: int, ui_dir: Path | None):
    """Run the HTTP API (and the web console when assets are available)."""
    import uvicorn

    from .service import create_app

    if ui_dir is None:
        for candidate in (root / "frontend" / "dist", Path("frontend/dist")):
            if candidate.is_dir():
                ui_dir = candidate
                break
    app = create_app(Workspace(root), ui_dir=ui_dir)
    uvicorn.run(app, host=host, port=port, log_level="warning")


@main.command()
@click.option("--trials", default=500, show_default=True)
@click.option("--seed", default=42, show_default=True)
@click.option(
    "--strategy",
    "strategies",
    multiple=True,
    type=click.Choice(STRATEGIES),
    help="Repeatable; default compares all three.",
)
@click.option("--base-table", default="customer", show_default=True)
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), default=None)
@click.pass_obj
@guarded
def bench(root: Path, trials: int, seed: int, strategies, base_table: str, out: Path | None):
    """Compare attribute-selection strategies on the workspace data."""
    ws = Workspace(root)
    report = run_benchmark(
        ws.build_store(),
        strategies=tuple(strategies) or STRATEGIES,
        n_trials=trials,
        seed=seed,
        base_table=base_table,
        config=ws.config.policy,
    )
    click.echo(f"{'strategy':<12} {'mean':>6} {'median':>6} {'p90':>6} {'failures':>8}")
    for name in report.strategies:
        stats = report.strategies[name]
        click.echo(
            f"{name:<12} {stats.mean_turns:>6.2f} {stats.median_turns:>6.2f} "
            f"{stats.p90_turns:>6.2f} {stats.failures:>8}"
        )
    if out is not None:
        out.write_text(report.to_json(), encoding="utf-8")
        click.echo(f"wrote {out}")


if __name__ == "__main__":
    main()

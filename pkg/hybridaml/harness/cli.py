import functools
import json
import logging
from pathlib import Path
from typing import Any, Callable, Optional, TypeVar

import click

from hybridaml import __version__
from hybridaml.encoders import write_json_atomic
from hybridaml.exceptions import HybridAMLError
from hybridaml.graph.models import FeatureMode
from hybridaml.harness.models import (
    ComparisonReport,
    ExperimentConfig,
    RunReport,
)
from hybridaml.harness.runner import (
    GRAPH_FILE,
    SPLIT_NAMES,
    check_delta,
    evaluate_checkpoint,
    generate_to_dir,
    load_config,
    run_compare,
    run_single,
)
from hybridaml.harness.table import emit_table
from hybridaml.logger import logger
from hybridaml.metrics import MetricsReport
from hybridaml.rgcn.checkpoint import CHECKPOINT_FILE

F = TypeVar("F", bound=Callable[..., Any])

SCHEMAS = {
    "config": ExperimentConfig,
    "run": RunReport,
    "comparison": ComparisonReport,
    "metrics": MetricsReport,
}


def _exits_with_error_code(func: F) -> F:
    """Map `HybridAMLError` families onto their process exit codes."""

    @functools.wraps(func)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        try:
            return func(*args, **kwargs)
        except HybridAMLError as e:
            logger.error("%s: %s", type(e).__name__, e)
            raise SystemExit(e.exit_code) from e

    return wrapper  # type: ignore[return-value]


def _config(path: Optional[Path]) -> ExperimentConfig:
    return load_config(path) if path is not None else ExperimentConfig()


config_option = click.option(
    "--config",
    "config_path",
    type=click.Path(path_type=Path, dir_okay=False),
    default=None,
    help="Experiment config JSON; defaults apply when omitted.",
)


@click.group()
@click.version_option(__version__, prog_name="hybridaml")
@click.option("-v", "--verbose", is_flag=True, help="Log at DEBUG level.")
@click.option("-q", "--quiet", is_flag=True, help="Log warnings only.")
def main(verbose: bool, quiet: bool) -> None:
    """Synthetic vs hybrid AML transaction classification experiments."""
    level = logging.INFO
    if verbose:
        level = logging.DEBUG
    elif quiet:
        level = logging.WARNING
    logging.basicConfig(
        level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s"
    )


@main.command()
@config_option
@click.option(
    "--out", type=click.Path(path_type=Path, file_okay=False), required=True
)
@click.option(
    "--seed",
    type=int,
    default=None,
    help="Derive the data seed the way `train --seed` does.",
)
@_exits_with_error_code
def generate(config_path: Optional[Path], out: Path, seed: Optional[int]) -> None:
    """Write accounts.csv, transactions.csv and summary.json."""
    generate_to_dir(_config(config_path), out, seed)
    click.echo(str(out))


@main.command()
@config_option
@click.option(
    "--mode",
    type=click.Choice([m.value for m in FeatureMode]),
    required=True,
)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option(
    "--out", type=click.Path(path_type=Path, file_okay=False), required=True
)
@_exits_with_error_code
def train(config_path: Optional[Path], mode: str, seed: int, out: Path) -> None:
    """Train one arm; writes model.json, graph.json and the run report."""
    report = run_single(
        _config(config_path),
        FeatureMode(mode),
        seed,
        out_dir=out,
        checkpoint_path=out / CHECKPOINT_FILE,
    )
    write_json_atomic(out / GRAPH_FILE, report.graph)
    click.echo(report.test.model_dump_json(indent=2))


@main.command()
@click.option(
    "--model",
    "model_path",
    type=click.Path(path_type=Path, dir_okay=False),
    required=True,
)
@click.option(
    "--data",
    "data_dir",
    type=click.Path(path_type=Path, file_okay=False),
    required=True,
)
@click.option("--out", type=click.Path(path_type=Path, dir_okay=False))
@click.option(
    "--split",
    type=click.Choice(list(SPLIT_NAMES)),
    default="test",
    show_default=True,
)
@click.option("--threshold", type=float, default=0.5, show_default=True)
@_exits_with_error_code
def evaluate(
    model_path: Path,
    data_dir: Path,
    out: Optional[Path],
    split: str,
    threshold: float,
) -> None:
    """Score a dataset directory with a saved model."""
    report = evaluate_checkpoint(model_path, data_dir, split, threshold)
    if out is not None:
        write_json_atomic(out, report)
    click.echo(report.model_dump_json(indent=2))


@main.command()
@config_option
@click.option(
    "--out", type=click.Path(path_type=Path, file_okay=False), default=None
)
@click.option(
    "--assert-delta",
    type=float,
    default=None,
    help="Exit with code 5 unless mean AUC(hybrid) - mean AUC(synthetic) "
    "reaches this value.",
)
@_exits_with_error_code
def compare(
    config_path: Optional[Path],
    out: Optional[Path],
    assert_delta: Optional[float],
) -> None:
    """Run the synthetic vs hybrid comparison over every configured seed."""
    report = run_compare(_config(config_path), out)
    click.echo(emit_table(report), nl=False)
    if assert_delta is not None:
        check_delta(report, assert_delta)


@main.command()
@click.argument(
    "name", type=click.Choice(sorted(SCHEMAS)), default="comparison"
)
def schema(name: str) -> None:
    """Print the JSON schema of a config or report document."""
    click.echo(json.dumps(SCHEMAS[name].model_json_schema(), indent=2))

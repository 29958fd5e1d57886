import contextlib
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import ValidationError
from typing_extensions import Annotated, Doc

from hybridaml import __version__
from hybridaml.datagen.models import AccountTable, TransactionTable
from hybridaml.datagen.utils import (
    generate_accounts,
    generate_transactions,
    read_dataset,
    summarize_dataset,
    write_dataset,
)
from hybridaml.encoders import write_json_atomic, write_text_atomic
from hybridaml.enrich.models import JoinPolicy, NormalizedIndicators
from hybridaml.enrich.utils import load_country_indicators, normalize_indicators
from hybridaml.exceptions import (
    AssertionGateError,
    ConfigurationError,
    HybridAMLError,
    SchemaError,
)
from hybridaml.graph.models import FeatureMode, RelGraph
from hybridaml.graph.utils import build_graph, graph_summary
from hybridaml.harness.models import (
    COMPARED_METRICS,
    ComparisonReport,
    ExperimentConfig,
    MetricAggregate,
    ModeAggregate,
    RunReport,
    SeedStreams,
)
from hybridaml.harness.table import emit_table
from hybridaml.logger import logger
from hybridaml.metrics import MetricsReport, evaluate_predictions
from hybridaml.rgcn.checkpoint import (
    load_checkpoint,
    restore_indicators,
    save_checkpoint,
)
from hybridaml.rgcn.training import train
from hybridaml.rgcn.utils import predict

COMPARISON_JSON = "comparison.json"
COMPARISON_TXT = "comparison.txt"
SUMMARY_FILE = "summary.json"
GRAPH_FILE = "graph.json"
SPLIT_NAMES = ("test", "val", "train", "all")


def report_filename(mode: FeatureMode, seed: int) -> str:
    return f"report_{FeatureMode(mode).value}_{seed}.json"


@contextlib.contextmanager
def _stage(name: str) -> Iterator[None]:
    try:
        yield
    except HybridAMLError as e:
        if e.stage is None:
            e.stage = name
        raise


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigurationError(
            f"cannot read config {path} ({e.strerror})"
        ) from e
    try:
        return ExperimentConfig.model_validate_json(text)
    except ValidationError as e:
        raise ConfigurationError(f"invalid config {path}:\n{e}") from e


def check_inputs(config: ExperimentConfig, modes: Sequence[FeatureMode]) -> None:
    """Fail before any generation work when a needed input is missing."""
    if FeatureMode.hybrid in modes and not config.indicators_path.is_file():
        raise ConfigurationError(
            f"indicator file not found: {config.indicators_path}"
        )


def seed_streams(seed: int) -> SeedStreams:
    """Independent data, split and model seeds derived from one run seed."""
    children = np.random.SeedSequence(seed).spawn(3)
    data, split, model = (int(c.generate_state(1)[0]) for c in children)
    return SeedStreams(data=data, split=split, model=model)


def generate_dataset(
    config: ExperimentConfig, data_seed: int
) -> Tuple[AccountTable, TransactionTable]:
    gen = config.generator.model_copy(update={"seed": data_seed})
    with _stage("generate"):
        accounts = generate_accounts(gen)
        transactions = generate_transactions(accounts, gen)
    return accounts, transactions


def load_indicators(config: ExperimentConfig) -> NormalizedIndicators:
    with _stage("enrich"):
        rows = load_country_indicators(config.indicators_path)
        return normalize_indicators(
            rows, config.normalization.method, config.normalization.log_gdp
        )


def _build(
    config: ExperimentConfig,
    mode: FeatureMode,
    accounts: AccountTable,
    transactions: TransactionTable,
    indicators: Optional[NormalizedIndicators],
    split_seed: int,
) -> RelGraph:
    with _stage("build"):
        return build_graph(
            accounts,
            transactions,
            mode,
            indicators if mode == FeatureMode.hybrid else None,
            config.split,
            split_seed,
            countries=config.generator.countries,
            tx_types=config.generator.tx_types,
            policy=config.normalization.policy,
        )


def _run_arm(
    config: ExperimentConfig,
    mode: FeatureMode,
    seed: int,
    streams: SeedStreams,
    accounts: AccountTable,
    transactions: TransactionTable,
    indicators: Optional[NormalizedIndicators],
    out_dir: Optional[Path],
    checkpoint_path: Optional[Path],
) -> RunReport:
    graph = _build(
        config, mode, accounts, transactions, indicators, streams.split
    )
    with _stage("train"):
        params, history = train(graph, config.model, streams.model)
    with _stage("evaluate"):
        probs = predict(graph, params, config.model)
        test_mask = graph.masks.test
        # The only place the test mask is scored.
        test = evaluate_predictions(
            probs[test_mask],
            graph.labels[test_mask],
            config.threshold,
            split="test",
            seed=seed,
            mode=mode.value,
            epochs=config.model.epochs,
        )
    logger.info(
        "%s seed %d: test accuracy %.4f, F1 %.4f, AUC %s",
        mode.value,
        seed,
        test.accuracy,
        test.f1,
        "n/a" if test.auc is None else f"{test.auc:.4f}",
    )
    report = RunReport(
        version=__version__,
        created_at=_now(),
        mode=mode,
        seed=seed,
        streams=streams._asdict(),
        test=test,
        history=history,
        dataset=summarize_dataset(accounts, transactions),
        graph=graph_summary(graph),
        config=config,
    )
    with _stage("report"):
        if out_dir is not None:
            write_json_atomic(out_dir / report_filename(mode, seed), report)
        if checkpoint_path is not None:
            save_checkpoint(
                checkpoint_path,
                params,
                config.model,
                seed=streams.model,
                mode=mode,
                countries=config.generator.countries,
                tx_types=config.generator.tx_types,
                feature_columns=graph.feature_columns,
                split=config.split,
                split_seed=streams.split,
                indicators=indicators if mode == FeatureMode.hybrid else None,
                policy=config.normalization.policy,
            )
    return report


def run_single(
    config: Annotated[ExperimentConfig, Doc("Validated experiment config.")],
    mode: Annotated[FeatureMode, Doc("Feature set to train on.")],
    seed: Annotated[int, Doc("Run seed; data, split and model derive from it.")],
    out_dir: Annotated[
        Optional[Path],
        Doc("Directory for the run report; nothing is written if omitted."),
    ] = None,
    checkpoint_path: Annotated[
        Optional[Path], Doc("Where to write `model.json`, if anywhere.")
    ] = None,
) -> RunReport:
    """
    Generate, enrich, build, train and evaluate one arm. Fully determined by
    `(config, mode, seed)`; only `created_at` varies between reruns.
    """
    mode = FeatureMode(mode)
    check_inputs(config, [mode])
    streams = seed_streams(seed)
    accounts, transactions = generate_dataset(config, streams.data)
    indicators = (
        load_indicators(config) if mode == FeatureMode.hybrid else None
    )
    return _run_arm(
        config,
        mode,
        seed,
        streams,
        accounts,
        transactions,
        indicators,
        out_dir,
        checkpoint_path,
    )


def _aggregate(values: Sequence[Optional[float]]) -> MetricAggregate:
    present = [v for v in values if v is not None]
    if not present:
        return MetricAggregate(mean=None, std=None, n=0)
    std = float(np.std(present, ddof=1)) if len(present) > 1 else None
    return MetricAggregate(mean=float(np.mean(present)), std=std, n=len(present))


def aggregate_runs(runs: Sequence[MetricsReport]) -> ModeAggregate:
    return ModeAggregate(
        **{
            metric: _aggregate([getattr(r, metric) for r in runs])
            for metric in COMPARED_METRICS
        }
    )


def run_compare(
    config: Annotated[ExperimentConfig, Doc("Validated experiment config.")],
    out_dir: Annotated[
        Optional[Path],
        Doc("Output directory; defaults to `config.output_dir`."),
    ] = None,
) -> ComparisonReport:
    """
    Run every configured mode for every seed. Within a seed both arms share
    one generated dataset and one split; only the indicator columns differ.
    Metric values never raise; use `check_delta` to gate on them.
    """
    out = Path(out_dir) if out_dir is not None else config.output_dir
    modes = config.mode.feature_modes()
    check_inputs(config, modes)
    if len(config.seeds) < 2:
        logger.warning(
            "Comparing over a single seed; standard deviations are null"
        )
    indicators = (
        load_indicators(config) if FeatureMode.hybrid in modes else None
    )
    runs: Dict[str, List[MetricsReport]] = {m.value: [] for m in modes}
    for seed in config.seeds:
        streams = seed_streams(seed)
        accounts, transactions = generate_dataset(config, streams.data)
        for mode in modes:
            report = _run_arm(
                config,
                mode,
                seed,
                streams,
                accounts,
                transactions,
                indicators,
                out,
                None,
            )
            runs[mode.value].append(report.test)

    aggregates = {name: aggregate_runs(r) for name, r in runs.items()}
    deltas = None
    if len(modes) == 2:
        synthetic = aggregates[FeatureMode.synthetic.value]
        hybrid = aggregates[FeatureMode.hybrid.value]
        deltas = {}
        for metric in COMPARED_METRICS:
            a = getattr(hybrid, metric).mean
            b = getattr(synthetic, metric).mean
            deltas[metric] = None if a is None or b is None else a - b
    comparison = ComparisonReport(
        version=__version__,
        created_at=_now(),
        seeds=list(config.seeds),
        modes=modes,
        runs=runs,
        aggregates=aggregates,
        deltas=deltas,
        config=config,
    )
    with _stage("report"):
        write_json_atomic(out / COMPARISON_JSON, comparison)
        write_text_atomic(out / COMPARISON_TXT, emit_table(comparison))
    return comparison


def check_delta(report: ComparisonReport, min_auc_delta: float) -> None:
    """Raise `AssertionGateError` unless the hybrid AUC gain reaches the bar."""
    delta = (report.deltas or {}).get("auc")
    if delta is None:
        raise AssertionGateError(
            "no AUC delta available; both modes must run with two-class "
            "test splits"
        )
    if delta < min_auc_delta:
        raise AssertionGateError(
            f"AUC delta {delta:+.4f} is below the required {min_auc_delta:+.4f}"
        )


def generate_to_dir(
    config: ExperimentConfig, out_dir: Path, seed: Optional[int] = None
) -> Path:
    """
    Write `accounts.csv`, `transactions.csv` and `summary.json`. With `seed`
    the dataset equals the one `run_single(config, mode, seed)` trains on.
    """
    data_seed = (
        config.generator.seed if seed is None else seed_streams(seed).data
    )
    accounts, transactions = generate_dataset(config, data_seed)
    with _stage("report"):
        write_dataset(accounts, transactions, out_dir)
        write_json_atomic(
            out_dir / SUMMARY_FILE, summarize_dataset(accounts, transactions)
        )
    return out_dir


def evaluate_checkpoint(
    model_path: Annotated[Path, Doc("A `model.json` written by `train`.")],
    data_dir: Annotated[
        Path, Doc("Directory with `accounts.csv` and `transactions.csv`.")
    ],
    split: Annotated[
        str, Doc("Which mask to score: `test`, `val`, `train` or `all`.")
    ] = "test",
    threshold: float = 0.5,
) -> MetricsReport:
    """
    Rebuild features with the vocabularies and indicator table stored in
    the checkpoint, then score one split of the dataset.
    """
    if split not in SPLIT_NAMES:
        raise ConfigurationError(
            f"unknown split {split!r}; expected one of {list(SPLIT_NAMES)}"
        )
    with _stage("evaluate"):
        params, checkpoint = load_checkpoint(model_path)
        accounts, transactions = read_dataset(data_dir)
    indicators = (
        restore_indicators(checkpoint.indicators)
        if checkpoint.indicators is not None
        else None
    )
    with _stage("build"):
        graph = build_graph(
            accounts,
            transactions,
            checkpoint.mode,
            indicators,
            checkpoint.split,
            checkpoint.split_seed,
            countries=checkpoint.countries,
            tx_types=checkpoint.tx_types,
            policy=(
                checkpoint.indicators.policy
                if checkpoint.indicators is not None
                else JoinPolicy.strict
            ),
        )
    with _stage("evaluate"):
        if list(graph.feature_columns) != checkpoint.feature_columns:
            raise SchemaError(
                "dataset features do not match the checkpoint",
                column="feature_columns",
            )
        probs = predict(graph, params, checkpoint.config)
        mask = graph.masks.get(split)
        return evaluate_predictions(
            probs[mask],
            graph.labels[mask],
            threshold,
            split=split,
            seed=checkpoint.seed,
            mode=checkpoint.mode.value,
            epochs=checkpoint.config.epochs,
        )

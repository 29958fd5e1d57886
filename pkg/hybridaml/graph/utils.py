from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from hybridaml.datagen.models import (
    DEFAULT_TX_TYPES,
    AccountTable,
    TransactionTable,
)
from hybridaml.encoders import write_json_atomic
from hybridaml.enrich.models import (
    INDICATOR_COLUMNS,
    JoinPolicy,
    NormalizedIndicators,
)
from hybridaml.enrich.utils import attach_country_features
from hybridaml.exceptions import (
    ConfigurationError,
    DegenerateDataError,
    ReferentialIntegrityError,
    StratificationError,
)
from hybridaml.graph.models import (
    RELATIONS,
    FeatureMode,
    GraphSummary,
    RelGraph,
    SplitConfig,
    SplitMasks,
    csr_from_edges,
)
from hybridaml.logger import logger

MIN_CLASS_SIZE = 2


def _allocate(n: int, fractions: Sequence[float]) -> List[int]:
    # Largest-remainder rounding: every count is within 1 of n * fraction.
    exact = [n * f for f in fractions]
    counts = [int(np.floor(e)) for e in exact]
    order = sorted(
        range(len(fractions)), key=lambda i: (-(exact[i] - counts[i]), i)
    )
    for i in order[: n - sum(counts)]:
        counts[i] += 1
    return counts


def stratified_split(
    labels: Sequence[int],
    fractions: Tuple[float, float, float],
    rng_seed: int,
) -> SplitMasks:
    """
    Per-class proportional split into train, val and test masks.

    Each class is shuffled with `rng_seed` and cut by largest-remainder
    allocation, so every split holds its exact share of the class to within
    one member. A class needs only MIN_CLASS_SIZE (2) members, not one per
    split: with 8 GOOD and 2 BAD labels at (0.5, 0.2, 0.3) the BAD members
    land in train and test and val gets none. A single-member class raises
    StratificationError.
    """
    fractions = tuple(float(f) for f in fractions)
    if len(fractions) != 3 or any(not f > 0 for f in fractions):
        raise ConfigurationError(
            f"split fractions must be three positive numbers (got {fractions})"
        )
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise ConfigurationError(
            f"split fractions must sum to 1 (got {sum(fractions):.12g})"
        )
    labels = np.asarray(labels)
    rng = np.random.default_rng(rng_seed)
    masks = [np.zeros(len(labels), dtype=bool) for _ in fractions]
    for value in np.unique(labels):
        members = np.flatnonzero(labels == value)
        if len(members) < MIN_CLASS_SIZE:
            raise StratificationError(
                f"class {value!r} has {len(members)} member; at least "
                f"{MIN_CLASS_SIZE} are needed to stratify"
            )
        shuffled = rng.permutation(members)
        start = 0
        for mask, count in zip(masks, _allocate(len(members), fractions)):
            mask[shuffled[start : start + count]] = True
            start += count
    return SplitMasks(*masks)


def _one_hot(index: np.ndarray, width: int) -> np.ndarray:
    out = np.zeros((len(index), width))
    out[np.arange(len(index)), index] = 1.0
    return out


def _split_by_id(
    transactions: TransactionTable, split: SplitConfig, rng_seed: int
) -> SplitMasks:
    # Split over transactions ordered by id so input order does not matter.
    order = np.argsort(transactions.tx_id, kind="stable")
    by_id = stratified_split(
        transactions.label[order], split.fractions(), rng_seed
    )
    masks = []
    for m in (by_id.train, by_id.val, by_id.test):
        restored = np.zeros(len(transactions), dtype=bool)
        restored[order] = m
        masks.append(restored)
    return SplitMasks(*masks)


def build_graph(
    accounts: AccountTable,
    transactions: TransactionTable,
    mode: FeatureMode,
    indicators: Optional[NormalizedIndicators] = None,
    split: Optional[SplitConfig] = None,
    rng_seed: int = 0,
    *,
    countries: Optional[Sequence[str]] = None,
    tx_types: Sequence[str] = DEFAULT_TX_TYPES,
    policy: JoinPolicy = JoinPolicy.strict,
) -> RelGraph:
    """
    Transaction-as-node graph.

    Feature columns: country one-hot, standardized log value, transaction
    type one-hot, then (hybrid only) the normalized indicators. Columns that
    do not apply to a node kind are zero, so a synthetic feature row is a
    prefix of the hybrid row for the same node.

    Without `split` every transaction lands in the training mask.
    """
    mode = FeatureMode(mode)
    if mode == FeatureMode.hybrid and indicators is None:
        raise ConfigurationError(
            "hybrid mode requires a country indicator table"
        )
    n_acc, n_tx = len(accounts), len(transactions)
    if not np.array_equal(accounts.account_id, np.arange(n_acc)):
        raise ReferentialIntegrityError(
            "account ids must be dense 0..n-1 in order"
        )
    for name, ends in (("src", transactions.src), ("dst", transactions.dst)):
        bad = (ends < 0) | (ends >= n_acc)
        if bad.any():
            tx = int(transactions.tx_id[np.argmax(bad)])
            raise ReferentialIntegrityError(
                f"transaction {tx} references unknown {name} account "
                f"{int(ends[np.argmax(bad)])}"
            )
    types = transactions.tx_type
    if n_tx and (types.min() < 0 or types.max() >= len(tx_types)):
        raise ReferentialIntegrityError(
            f"transaction type codes must lie in [0, {len(tx_types)})"
        )

    codes = accounts.country.astype(str)
    vocab = list(countries) if countries is not None else sorted(set(codes))
    lookup = {c: i for i, c in enumerate(vocab)}
    unknown = sorted(set(codes) - set(lookup))
    if unknown:
        raise ReferentialIntegrityError(
            f"account countries outside the country vocabulary: {unknown}"
        )

    n_nodes = n_acc + n_tx
    tx_nodes = np.arange(n_acc, n_nodes, dtype=np.int64)
    n_c, n_t = len(vocab), len(tx_types)
    n_i = len(INDICATOR_COLUMNS) if mode == FeatureMode.hybrid else 0
    width = n_c + 1 + n_t + n_i
    features = np.zeros((n_nodes, width))
    features[:n_acc, :n_c] = _one_hot(
        np.array([lookup[c] for c in codes], dtype=np.int64), n_c
    )
    if n_tx:
        log_value = np.log(transactions.value_usd)
        std = log_value.std()
        centered = log_value - log_value.mean()
        features[n_acc:, n_c] = centered / std if std > 0 else 0.0
        features[n_acc:, n_c + 1 : n_c + 1 + n_t] = _one_hot(types, n_t)
    columns = (
        [f"country={c}" for c in vocab]
        + ["log_value_z"]
        + [f"tx_type={t}" for t in tx_types]
    )
    n_imputed = 0
    if mode == FeatureMode.hybrid:
        assert indicators is not None
        attached = attach_country_features(accounts, indicators, policy)
        features[:n_acc, n_c + 1 + n_t :] = attached.matrix
        n_imputed = attached.n_imputed
        columns += list(indicators.columns)
    if not np.all(np.isfinite(features)):
        raise DegenerateDataError("feature matrix has non-finite entries")

    src_nodes, dst_nodes = transactions.src, transactions.dst
    adjacency = {
        "debit": csr_from_edges(n_nodes, src_nodes, tx_nodes),
        "credit": csr_from_edges(n_nodes, dst_nodes, tx_nodes),
        "debit_rev": csr_from_edges(n_nodes, tx_nodes, src_nodes),
        "credit_rev": csr_from_edges(n_nodes, tx_nodes, dst_nodes),
    }

    if split is None:
        masks = SplitMasks.train_only(n_tx)
    else:
        masks = _split_by_id(transactions, split, rng_seed)

    graph = RelGraph(
        n_nodes=n_nodes,
        adjacency=adjacency,
        features=features,
        target_nodes=tx_nodes,
        labels=transactions.label.astype(np.int8),
        masks=masks,
        n_accounts=n_acc,
        mode=mode,
        feature_columns=tuple(columns),
        mirrored=True,
        n_imputed=n_imputed,
    )
    logger.info(
        "Built %s graph: %d nodes, feature width %d, split %s",
        mode.value,
        n_nodes,
        width,
        graph.masks.sizes(),
    )
    return graph


def degree_table(graph: RelGraph, relation: str) -> np.ndarray:
    """In-degree of every node under `relation`."""
    return np.diff(graph.relation(relation).indptr)


def graph_summary(graph: RelGraph) -> GraphSummary:
    labels = graph.labels.astype(bool)
    return GraphSummary(
        mode=graph.mode,
        n_nodes=graph.n_nodes,
        n_accounts=graph.n_accounts,
        n_transactions=graph.n_transactions,
        relation_edges={r: int(graph.relation(r).nnz) for r in RELATIONS},
        feature_width=graph.feature_width,
        feature_columns=graph.feature_columns,
        split_sizes=graph.masks.sizes(),
        split_positives={
            name: int((labels & graph.masks.get(name)).sum())
            for name in ("train", "val", "test")
        },
        n_imputed=graph.n_imputed,
    )


def write_graph_summary(graph: RelGraph, path: Union[str, Path]) -> Path:
    return write_json_atomic(path, graph_summary(graph))

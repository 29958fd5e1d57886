from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pytest

from hybridaml.datagen.models import AccountTable, GenConfig, TransactionTable
from hybridaml.graph.models import RELATIONS, Aggregation, RelGraph, SplitMasks
from hybridaml.harness.models import ExperimentConfig
from hybridaml.rgcn.models import LayerParams, ModelConfig

TINY_COUNTRIES = ["NL", "US", "BR", "CN"]


def random_graph(
    rng: np.random.Generator,
    n_nodes: int,
    feature_dim: int,
    density: float = 0.3,
    n_targets: Optional[int] = None,
) -> RelGraph:
    """Random 4-relation graph; targets are the last `n_targets` nodes."""
    n_targets = n_targets or max(2, n_nodes // 2)
    edges = {}
    for r in RELATIONS:
        present = rng.random((n_nodes, n_nodes)) < density
        src, dst = np.nonzero(present)
        edges[r] = (src, dst)
    labels = rng.integers(0, 2, size=n_targets)
    labels[0], labels[1] = 0, 1
    return RelGraph.from_edges(
        n_nodes,
        edges,
        rng.standard_normal((n_nodes, feature_dim)),
        np.arange(n_nodes - n_targets, n_nodes),
        labels,
    )


def dense_forward(
    graph: RelGraph,
    params: Sequence[LayerParams],
    aggregation: Aggregation,
) -> np.ndarray:
    """Reference forward on dense adjacency matrices."""
    h = np.array(graph.features)
    for i, layer in enumerate(params):
        z = h @ layer.self_weight + layer.bias
        for r in graph.relations:
            a = graph.relation(r).toarray()
            if aggregation == Aggregation.mean:
                degree = a.sum(axis=1, keepdims=True)
                a = np.divide(a, degree, out=np.zeros_like(a), where=degree > 0)
            z = z + (a @ h) @ layer.relation_weights[r]
        h = z if i == len(params) - 1 else np.maximum(z, 0.0)
    return h[graph.target_nodes, 0]


def layer_from(
    d_in: int,
    d_out: int,
    weights: Optional[Dict[str, float]] = None,
    self_weight: Optional[np.ndarray] = None,
) -> LayerParams:
    weights = weights or {}
    return LayerParams(
        relation_weights={
            r: np.full((d_in, d_out), weights.get(r, 0.0)) for r in RELATIONS
        },
        self_weight=(
            self_weight
            if self_weight is not None
            else np.full((d_in, d_out), weights.get("self", 0.0))
        ),
        bias=np.zeros(d_out),
    )


def separable_tables(
    n_accounts: int = 8, n_transactions: int = 60, seed: int = 0
) -> Tuple[AccountTable, TransactionTable]:
    """Label is 1 exactly when the sender sits in the second country."""
    rng = np.random.default_rng(seed)
    countries = np.array(["NL", "US"] * (n_accounts // 2), dtype=object)
    accounts = AccountTable(
        np.arange(n_accounts, dtype=np.int64),
        np.zeros(n_accounts, dtype=np.int64),
        countries,
    )
    src = rng.integers(0, n_accounts, size=n_transactions)
    dst = rng.integers(0, n_accounts - 1, size=n_transactions)
    dst += dst >= src
    transactions = TransactionTable(
        np.arange(n_transactions, dtype=np.int64),
        src.astype(np.int64),
        dst.astype(np.int64),
        rng.integers(0, 5, size=n_transactions).astype(np.int64),
        np.round(rng.lognormal(8.0, 1.0, size=n_transactions), 2),
        (countries[src] == "US").astype(np.int8),
    )
    return accounts, transactions


def all_masks(n: int) -> SplitMasks:
    ones = np.ones(n, dtype=bool)
    return SplitMasks(ones, ones.copy(), ones.copy())


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240601)


@pytest.fixture
def tiny_gen_config() -> GenConfig:
    return GenConfig(
        n_accounts=60,
        n_transactions=200,
        n_banks=5,
        countries=TINY_COUNTRIES,
        calibration_probe=20_000,
        seed=3,
    )


@pytest.fixture
def tiny_experiment(tmp_path, tiny_gen_config: GenConfig) -> ExperimentConfig:
    return ExperimentConfig(
        generator=tiny_gen_config,
        model=ModelConfig(hidden_dims=[8], epochs=5),
        seeds=[0, 1],
        output_dir=tmp_path / "runs",
    )


def tensors_equal(a: List[LayerParams], b: List[LayerParams]) -> bool:
    return len(a) == len(b) and all(
        np.array_equal(x.named_tensors()[k], y.named_tensors()[k])
        for x, y in zip(a, b)
        for k in x.named_tensors()
    )

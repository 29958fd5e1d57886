import math
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import special

from hybridaml.exceptions import (
    ConfigurationError,
    EvaluationError,
    InternalConsistencyError,
    NumericOverflowError,
)
from hybridaml.graph.models import RELATIONS, RelGraph
from hybridaml.rgcn.models import ForwardCache, LayerParams, ModelConfig


# expit saturates to exactly 0 or 1 once |logit| exceeds about 37
PROBABILITY_EPS = 1e-12


def glorot_bound(d_in: int, d_out: int) -> float:
    return math.sqrt(6.0 / (d_in + d_out))


def init_params(
    config: ModelConfig, in_dim: int, rng_seed: int
) -> List[LayerParams]:
    """Glorot-uniform weights, zero biases; deterministic per seed."""
    dims = config.layer_dims(in_dim)
    if any(d <= 0 for pair in dims for d in pair):
        raise ConfigurationError(f"layer dimensions must be positive: {dims}")
    rng = np.random.default_rng(rng_seed)
    params = []
    for d_in, d_out in dims:
        bound = glorot_bound(d_in, d_out)
        relation_weights = {
            r: rng.uniform(-bound, bound, size=(d_in, d_out))
            for r in RELATIONS
        }
        self_weight = rng.uniform(-bound, bound, size=(d_in, d_out))
        params.append(
            LayerParams(relation_weights, self_weight, np.zeros(d_out))
        )
    return params


def forward(
    graph: RelGraph, params: Sequence[LayerParams], config: ModelConfig
) -> Tuple[np.ndarray, ForwardCache]:
    """
    h_i' = act( sum_r agg_{j in N_r(i)} W_r h_j + W_self h_i + b )

    ReLU on hidden layers, identity on the last. Messages are aggregated
    before the per-relation transform, which is the same linear map.
    """
    if not params:
        raise ConfigurationError("the model has no layers")
    if graph.feature_width != params[0].in_dim:
        raise ConfigurationError(
            f"feature width {graph.feature_width} does not match input "
            f"dimension {params[0].in_dim}"
        )
    cache = ForwardCache(aggregation=config.aggregation)
    h = graph.features
    last = len(params) - 1
    with np.errstate(over="ignore", invalid="ignore"):
        for i, layer in enumerate(params):
            messages = {
                r: graph.operator(r, config.aggregation) @ h
                for r in graph.relations
            }
            z = h @ layer.self_weight + layer.bias
            for r in graph.relations:
                z = z + messages[r] @ layer.relation_weights[r]
            out = z if i == last else np.maximum(z, 0.0)
            if not np.all(np.isfinite(out)):
                raise NumericOverflowError(i)
            cache.inputs.append(h)
            cache.messages.append(messages)
            cache.pre_activations.append(z)
            cache.outputs.append(out)
            h = out
    cache.logits = h[graph.target_nodes, 0]
    return cache.logits, cache


def class_weights(
    labels: Sequence[int], mask: np.ndarray, scheme: str = "balanced"
) -> np.ndarray:
    """`(w_good, w_bad)`; balanced weights are n_total / (2 * n_class)."""
    if scheme == "none":
        return np.ones(2)
    y = np.asarray(labels)[np.asarray(mask, dtype=bool)]
    n = len(y)
    counts = np.array([np.sum(y == 0), np.sum(y == 1)], dtype=np.float64)
    return np.where(counts > 0, n / (2.0 * np.maximum(counts, 1.0)), 1.0)


def _masked(
    logits: np.ndarray, labels: Sequence[int], mask: np.ndarray
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    mask = np.asarray(mask, dtype=bool)
    idx = np.flatnonzero(mask)
    if idx.size == 0:
        raise EvaluationError("loss mask is empty")
    y = np.asarray(labels, dtype=np.int64)
    return idx, np.asarray(logits)[idx], y[idx]


def loss(
    logits: np.ndarray,
    labels: Sequence[int],
    mask: np.ndarray,
    class_weights: Optional[np.ndarray] = None,
) -> float:
    """Weighted mean BCE-with-logits: softplus(-z) if y = 1 else softplus(z)."""
    _, z, y = _masked(logits, labels, mask)
    w = np.ones(2) if class_weights is None else np.asarray(class_weights)
    return float(np.mean(w[y] * np.logaddexp(0.0, np.where(y == 1, -z, z))))


def backward(
    graph: RelGraph,
    cache: ForwardCache,
    params: Sequence[LayerParams],
    labels: Sequence[int],
    mask: np.ndarray,
    class_weights: Optional[np.ndarray] = None,
) -> List[LayerParams]:
    """Exact gradients of `loss` with respect to every layer parameter."""
    if len(params) != len(cache.inputs) or any(
        p.in_dim != h.shape[1] for p, h in zip(params, cache.inputs)
    ):
        raise InternalConsistencyError(
            "parameters do not match the forward cache"
        )
    if len(cache.logits) != len(np.asarray(labels)):
        raise InternalConsistencyError(
            f"{len(cache.logits)} logits for {len(np.asarray(labels))} labels"
        )
    idx, z, y = _masked(cache.logits, labels, mask)
    w = np.ones(2) if class_weights is None else np.asarray(class_weights)
    d_logits = w[y] * (special.expit(z) - y) / idx.size

    grad = np.zeros((graph.n_nodes, params[-1].out_dim))
    grad[graph.target_nodes[idx], 0] = d_logits
    grads: List[Optional[LayerParams]] = [None] * len(params)
    for i in range(len(params) - 1, -1, -1):
        layer = params[i]
        h = cache.inputs[i]
        messages = cache.messages[i]
        grads[i] = LayerParams(
            relation_weights={
                r: messages[r].T @ grad for r in graph.relations
            },
            self_weight=h.T @ grad,
            bias=grad.sum(axis=0),
        )
        if i == 0:
            break
        d_h = grad @ layer.self_weight.T
        for r in graph.relations:
            transpose = graph.operator(r, cache.aggregation, transpose=True)
            d_h = d_h + transpose @ (grad @ layer.relation_weights[r].T)
        grad = d_h * (cache.pre_activations[i - 1] > 0)
    return [g for g in grads if g is not None]


def predict(
    graph: RelGraph, params: Sequence[LayerParams], config: ModelConfig
) -> np.ndarray:
    """BAD probability for every transaction node, strictly inside (0, 1)."""
    logits, _ = forward(graph, params, config)
    probabilities = special.expit(logits)
    return np.clip(probabilities, PROBABILITY_EPS, 1.0 - PROBABILITY_EPS)

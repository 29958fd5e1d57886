"""
Central finite-difference check of the analytic gradients returned by
`backward`.
"""

from typing import List, Optional, Sequence

import numpy as np

from hybridaml.graph.models import RelGraph
from hybridaml.logger import logger
from hybridaml.rgcn.models import GradientCheckReport, LayerParams, ModelConfig
from hybridaml.rgcn.utils import backward, forward, loss

MAX_REPORTED_FAILURES = 20


def numeric_gradients(
    graph: RelGraph,
    params: Sequence[LayerParams],
    config: ModelConfig,
    labels: Sequence[int],
    mask: np.ndarray,
    class_weights: Optional[np.ndarray] = None,
    step: float = 1e-5,
) -> List[LayerParams]:
    """(L(p + h) - L(p - h)) / 2h for every scalar parameter."""
    work = [p.copy() for p in params]

    def objective() -> float:
        logits, _ = forward(graph, work, config)
        return loss(logits, labels, mask, class_weights)

    result = []
    for layer in work:
        grads = {}
        for key, tensor in layer.named_tensors().items():
            g = np.zeros_like(tensor)
            flat, g_flat = tensor.reshape(-1), g.reshape(-1)
            for j in range(flat.size):
                original = flat[j]
                flat[j] = original + step
                plus = objective()
                flat[j] = original - step
                minus = objective()
                flat[j] = original
                g_flat[j] = (plus - minus) / (2.0 * step)
            grads[key] = g
        result.append(LayerParams.from_named(grads))
    return result


def gradient_check(
    graph: RelGraph,
    params: Sequence[LayerParams],
    config: ModelConfig,
    labels: Optional[Sequence[int]] = None,
    mask: Optional[np.ndarray] = None,
    class_weights: Optional[np.ndarray] = None,
    step: float = 1e-5,
    rtol: float = 1e-4,
    atol: float = 1e-7,
) -> GradientCheckReport:
    """
    Compare `backward` with central differences entry by entry. An entry
    passes when the absolute difference is within `atol` or the relative
    difference is within `rtol`.
    """
    labels = graph.labels if labels is None else labels
    mask = graph.masks.train if mask is None else mask
    _, cache = forward(graph, params, config)
    analytic = backward(graph, cache, params, labels, mask, class_weights)
    numeric = numeric_gradients(
        graph, params, config, labels, mask, class_weights, step
    )

    n_checked = n_failed = 0
    max_abs = max_rel = 0.0
    failures: List[str] = []
    for i, (a_layer, n_layer) in enumerate(zip(analytic, numeric)):
        n_tensors = n_layer.named_tensors()
        for key, a in a_layer.named_tensors().items():
            n = n_tensors[key]
            diff = np.abs(a - n)
            scale = np.maximum(np.abs(a), np.abs(n))
            rel = np.divide(
                diff, scale, out=np.zeros_like(diff), where=scale > 0
            )
            bad = (diff > atol) & (rel > rtol)
            n_checked += diff.size
            n_failed += int(bad.sum())
            max_abs = max(max_abs, float(diff.max(initial=0.0)))
            max_rel = max(max_rel, float(rel[diff > atol].max(initial=0.0)))
            for idx in zip(*np.nonzero(bad)):
                if len(failures) < MAX_REPORTED_FAILURES:
                    at = tuple(int(k) for k in idx)
                    failures.append(
                        f"layer {i} {key}{list(at)}: analytic "
                        f"{a[at]:.6e}, numeric {n[at]:.6e}"
                    )
    if n_failed:
        logger.warning(
            "Gradient check: %d of %d entries disagree", n_failed, n_checked
        )
    return GradientCheckReport(
        n_checked=n_checked,
        n_failed=n_failed,
        max_abs_error=max_abs,
        max_rel_error=max_rel,
        failures=failures,
    )

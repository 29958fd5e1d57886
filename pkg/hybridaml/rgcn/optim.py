from typing import List, Sequence, Tuple

import numpy as np

from hybridaml.exceptions import InternalConsistencyError, NumericError
from hybridaml.rgcn.models import AdamState, LayerParams


def adam_step(
    params: Sequence[LayerParams],
    grads: Sequence[LayerParams],
    state: AdamState,
    lr: float,
) -> Tuple[List[LayerParams], AdamState]:
    """
    One Adam update with bias correction. Inputs are left untouched; new
    parameter and moment tensors are returned together with the advanced
    state.
    """
    if len(params) != len(grads) or len(params) != len(state.first_moment):
        raise InternalConsistencyError(
            "parameters, gradients and optimizer state differ in depth"
        )
    t = state.step + 1
    b1, b2 = state.beta1, state.beta2
    correction1 = 1.0 - b1**t
    correction2 = 1.0 - b2**t

    new_params, new_m, new_v = [], [], []
    for i, (layer, grad, m_layer, v_layer) in enumerate(
        zip(params, grads, state.first_moment, state.second_moment)
    ):
        p_t, g_t = layer.named_tensors(), grad.named_tensors()
        m_t, v_t = m_layer.named_tensors(), v_layer.named_tensors()
        out_p, out_m, out_v = {}, {}, {}
        for key, p in p_t.items():
            g = g_t[key]
            if g.shape != p.shape:
                raise InternalConsistencyError(
                    f"layer {i} {key}: gradient shape {g.shape} != {p.shape}"
                )
            if not np.all(np.isfinite(g)):
                raise NumericError(f"non-finite gradient in layer {i} {key}")
            m = b1 * m_t[key] + (1.0 - b1) * g
            v = b2 * v_t[key] + (1.0 - b2) * g * g
            m_hat = m / correction1
            v_hat = v / correction2
            out_p[key] = p - lr * m_hat / (np.sqrt(v_hat) + state.eps)
            out_m[key] = m
            out_v[key] = v
        new_params.append(LayerParams.from_named(out_p))
        new_m.append(LayerParams.from_named(out_m))
        new_v.append(LayerParams.from_named(out_v))

    return new_params, AdamState(
        first_moment=new_m,
        second_moment=new_v,
        step=t,
        beta1=b1,
        beta2=b2,
        eps=state.eps,
    )

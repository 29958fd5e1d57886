from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import ValidationError

from hybridaml.encoders import write_json_atomic
from hybridaml.enrich.models import JoinPolicy, NormalizedIndicators
from hybridaml.exceptions import DatasetIOError, SchemaError
from hybridaml.graph.models import FeatureMode, SplitConfig
from hybridaml.logger import logger
from hybridaml.rgcn.models import (
    BIAS_KEY,
    FlatTensor,
    IndicatorSnapshot,
    LayerParams,
    ModelCheckpoint,
    ModelConfig,
)

CHECKPOINT_FILE = "model.json"


def snapshot_indicators(
    indicators: NormalizedIndicators, policy: JoinPolicy = JoinPolicy.strict
) -> IndicatorSnapshot:
    return IndicatorSnapshot(
        countries=list(indicators.countries),
        columns=list(indicators.columns),
        values=indicators.values.tolist(),
        center=indicators.center.tolist(),
        scale=indicators.scale.tolist(),
        method=indicators.method,
        log_gdp=indicators.log_gdp,
        policy=policy,
    )


def restore_indicators(snapshot: IndicatorSnapshot) -> NormalizedIndicators:
    return NormalizedIndicators(
        countries=tuple(snapshot.countries),
        values=np.asarray(snapshot.values, dtype=np.float64),
        center=np.asarray(snapshot.center, dtype=np.float64),
        scale=np.asarray(snapshot.scale, dtype=np.float64),
        method=snapshot.method,
        log_gdp=snapshot.log_gdp,
        columns=tuple(snapshot.columns),
    )


def save_checkpoint(
    path: Union[str, Path],
    params: Sequence[LayerParams],
    config: ModelConfig,
    *,
    seed: int,
    mode: FeatureMode,
    countries: Sequence[str],
    tx_types: Sequence[str],
    feature_columns: Sequence[str],
    split: SplitConfig,
    split_seed: int,
    indicators: Optional[NormalizedIndicators] = None,
    policy: JoinPolicy = JoinPolicy.strict,
) -> Path:
    checkpoint = ModelCheckpoint(
        layer_dims=[(p.in_dim, p.out_dim) for p in params],
        aggregation=config.aggregation,
        tensors=[
            {
                key: FlatTensor(
                    shape=list(t.shape), data=t.ravel(order="C").tolist()
                )
                for key, t in layer.named_tensors().items()
            }
            for layer in params
        ],
        config=config,
        seed=seed,
        mode=mode,
        countries=list(countries),
        tx_types=list(tx_types),
        feature_columns=list(feature_columns),
        split=split,
        split_seed=split_seed,
        indicators=(
            snapshot_indicators(indicators, policy)
            if indicators is not None
            else None
        ),
    )
    written = write_json_atomic(path, checkpoint)
    logger.info("Wrote checkpoint %s", written)
    return written


def load_checkpoint(
    path: Union[str, Path],
) -> Tuple[List[LayerParams], ModelCheckpoint]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise DatasetIOError(
            f"cannot read checkpoint ({e.strerror})", path=path
        ) from e
    try:
        checkpoint = ModelCheckpoint.model_validate_json(text)
    except ValidationError as e:
        first = e.errors()[0]
        column = ".".join(str(part) for part in first["loc"])
        raise SchemaError(
            f"invalid checkpoint {path}: {first['msg']}", column=column
        ) from e

    if len(checkpoint.tensors) != len(checkpoint.layer_dims):
        raise SchemaError(
            f"invalid checkpoint {path}: {len(checkpoint.tensors)} tensor "
            f"groups for {len(checkpoint.layer_dims)} layers",
            column="tensors",
        )
    for i, (prev, nxt) in enumerate(
        zip(checkpoint.layer_dims, checkpoint.layer_dims[1:])
    ):
        if prev[1] != nxt[0]:
            raise SchemaError(
                f"layer {i} emits {prev[1]} columns, layer {i + 1} takes "
                f"{nxt[0]}",
                column="layer_dims",
            )
    params = []
    for i, (tensors, dims) in enumerate(
        zip(checkpoint.tensors, checkpoint.layer_dims)
    ):
        d_in, d_out = dims
        arrays = {}
        for key, flat in tensors.items():
            expected = (d_out,) if key == BIAS_KEY else (d_in, d_out)
            if tuple(flat.shape) != expected:
                raise SchemaError(
                    f"layer {i} {key}: shape {tuple(flat.shape)}, "
                    f"expected {expected}",
                    column=key,
                )
            if int(np.prod(flat.shape)) != len(flat.data):
                raise SchemaError(
                    f"layer {i} {key}: {len(flat.data)} values for shape "
                    f"{flat.shape}",
                    column=key,
                )
            arrays[key] = np.asarray(flat.data, dtype=np.float64).reshape(
                flat.shape
            )
        try:
            layer = LayerParams.from_named(arrays)
        except KeyError as e:
            raise SchemaError(
                f"layer {i} is missing tensor {e.args[0]}", column=e.args[0]
            ) from None
        params.append(layer)
    return params, checkpoint

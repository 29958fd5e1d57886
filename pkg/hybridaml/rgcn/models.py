from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from typing_extensions import Literal

from hybridaml.enrich.models import JoinPolicy, NormalizationMethod
from hybridaml.graph.models import RELATIONS, Aggregation, FeatureMode, SplitConfig

SELF_KEY = "W_self"
BIAS_KEY = "b"


def relation_key(relation: str) -> str:
    return f"W_{relation}"


class ModelConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    hidden_dims: List[int] = Field(
        default_factory=lambda: [16],
        description="Widths of the hidden convolution layers; the last layer "
        "always maps to a single logit.",
    )
    aggregation: Aggregation = Aggregation.sum
    init: Literal["glorot_uniform"] = "glorot_uniform"
    epochs: int = Field(default=200, ge=0)
    learning_rate: float = Field(default=0.01, gt=0)
    class_weights: Literal["balanced", "none"] = "balanced"
    adam_beta1: float = Field(default=0.9, ge=0, lt=1)
    adam_beta2: float = Field(default=0.999, ge=0, lt=1)
    adam_eps: float = Field(default=1e-8, gt=0)

    def layer_dims(self, in_dim: int) -> List[Tuple[int, int]]:
        widths = [in_dim, *self.hidden_dims, 1]
        return list(zip(widths[:-1], widths[1:]))


@dataclass(frozen=True, eq=False)
class LayerParams:
    """Parameters of one relational convolution layer."""

    relation_weights: Dict[str, np.ndarray]
    self_weight: np.ndarray
    bias: np.ndarray

    @property
    def in_dim(self) -> int:
        return int(self.self_weight.shape[0])

    @property
    def out_dim(self) -> int:
        return int(self.self_weight.shape[1])

    def named_tensors(self) -> Dict[str, np.ndarray]:
        tensors = {relation_key(r): w for r, w in self.relation_weights.items()}
        tensors[SELF_KEY] = self.self_weight
        tensors[BIAS_KEY] = self.bias
        return tensors

    @classmethod
    def from_named(cls, tensors: Dict[str, np.ndarray]) -> "LayerParams":
        return cls(
            relation_weights={r: tensors[relation_key(r)] for r in RELATIONS},
            self_weight=tensors[SELF_KEY],
            bias=tensors[BIAS_KEY],
        )

    def copy(self) -> "LayerParams":
        return LayerParams.from_named(
            {k: v.copy() for k, v in self.named_tensors().items()}
        )

    def zeros_like(self) -> "LayerParams":
        return LayerParams.from_named(
            {k: np.zeros_like(v) for k, v in self.named_tensors().items()}
        )


@dataclass
class ForwardCache:
    """Per-layer inputs, aggregated messages and pre-activations."""

    aggregation: Aggregation
    inputs: List[np.ndarray] = field(default_factory=list)
    messages: List[Dict[str, np.ndarray]] = field(default_factory=list)
    pre_activations: List[np.ndarray] = field(default_factory=list)
    outputs: List[np.ndarray] = field(default_factory=list)
    logits: np.ndarray = field(default_factory=lambda: np.empty(0))


@dataclass(frozen=True, eq=False)
class AdamState:
    first_moment: List[LayerParams]
    second_moment: List[LayerParams]
    step: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def initial(
        cls,
        params: List[LayerParams],
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
    ) -> "AdamState":
        return cls(
            first_moment=[p.zeros_like() for p in params],
            second_moment=[p.zeros_like() for p in params],
            beta1=beta1,
            beta2=beta2,
            eps=eps,
        )


class EpochRecord(BaseModel):
    """Losses and val metrics of the parameters after the epoch's step."""

    epoch: int
    train_loss: float
    val_loss: float
    val_accuracy: float
    val_f1: float
    val_auc: Optional[float]


class TrainingHistory(BaseModel):
    epochs: List[EpochRecord] = Field(default_factory=list)
    best_epoch: Optional[int] = None
    selection_metric: Literal["val_auc", "val_loss"] = "val_auc"


class FlatTensor(BaseModel):
    shape: List[int]
    data: List[float]


class IndicatorSnapshot(BaseModel):
    countries: List[str]
    columns: List[str]
    values: List[List[float]]
    center: List[float]
    scale: List[float]
    method: NormalizationMethod
    log_gdp: bool
    policy: JoinPolicy = JoinPolicy.strict


class ModelCheckpoint(BaseModel):
    """Contents of `model.json`; tensors are flattened row-major."""

    model_config = ConfigDict(extra="forbid")

    format_version: int = 1
    layer_dims: List[Tuple[int, int]]
    aggregation: Aggregation
    relations: List[str] = Field(default_factory=lambda: list(RELATIONS))
    tensors: List[Dict[str, FlatTensor]]
    config: ModelConfig
    seed: int
    mode: FeatureMode
    countries: List[str]
    tx_types: List[str]
    feature_columns: List[str]
    split: SplitConfig
    split_seed: int
    indicators: Optional[IndicatorSnapshot] = None


class GradientCheckReport(BaseModel):
    n_checked: int
    n_failed: int
    max_abs_error: float
    max_rel_error: float
    failures: List[str] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.n_failed == 0

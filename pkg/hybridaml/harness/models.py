from enum import Enum
from pathlib import Path
from typing import Dict, List, NamedTuple, Optional

from pydantic import BaseModel, ConfigDict, Field

from hybridaml.datagen.models import DatasetSummary, GenConfig
from hybridaml.enrich.models import NormalizationConfig
from hybridaml.enrich.utils import DEFAULT_INDICATORS_PATH
from hybridaml.graph.models import FeatureMode, GraphSummary, SplitConfig
from hybridaml.metrics import DEFAULT_THRESHOLD, MetricsReport
from hybridaml.rgcn.models import ModelConfig, TrainingHistory

# Excluded when two reports are compared for determinism.
VOLATILE_FIELDS = {"created_at"}
COMPARED_METRICS = ("accuracy", "f1", "auc")


class ExperimentMode(str, Enum):
    synthetic = "synthetic"
    hybrid = "hybrid"
    both = "both"

    def feature_modes(self) -> List[FeatureMode]:
        if self == ExperimentMode.both:
            return [FeatureMode.synthetic, FeatureMode.hybrid]
        return [FeatureMode(self.value)]


class ExperimentConfig(BaseModel):
    """One JSON document drives every CLI command; `{}` is a valid config."""

    model_config = ConfigDict(extra="forbid")

    generator: GenConfig = Field(default_factory=GenConfig)
    indicators_path: Path = DEFAULT_INDICATORS_PATH
    normalization: NormalizationConfig = Field(
        default_factory=NormalizationConfig
    )
    mode: ExperimentMode = ExperimentMode.both
    split: SplitConfig = Field(default_factory=SplitConfig)
    model: ModelConfig = Field(default_factory=ModelConfig)
    seeds: List[int] = Field(
        default_factory=lambda: [0, 1, 2, 3, 4], min_length=1
    )
    output_dir: Path = Path("runs")
    threshold: float = Field(default=DEFAULT_THRESHOLD, gt=0, lt=1)


class SeedStreams(NamedTuple):
    data: int
    split: int
    model: int


class RunReport(BaseModel):
    model_config = ConfigDict(extra="forbid")

    version: str
    created_at: str
    mode: FeatureMode
    seed: int
    streams: Dict[str, int]
    test: MetricsReport
    history: TrainingHistory
    dataset: DatasetSummary
    graph: GraphSummary
    config: ExperimentConfig


class MetricAggregate(BaseModel):
    mean: Optional[float]
    # Sample standard deviation (ddof=1); None with fewer than two values.
    std: Optional[float]
    n: int


class ModeAggregate(BaseModel):
    accuracy: MetricAggregate
    f1: MetricAggregate
    auc: MetricAggregate


class ComparisonReport(BaseModel):
    model_config = ConfigDict(extra="forbid")

    version: str
    created_at: str
    seeds: List[int]
    modes: List[FeatureMode]
    runs: Dict[str, List[MetricsReport]]
    aggregates: Dict[str, ModeAggregate]
    # hybrid minus synthetic, per metric mean; None unless both modes ran.
    deltas: Optional[Dict[str, Optional[float]]] = None
    config: ExperimentConfig

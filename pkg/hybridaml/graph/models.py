from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Mapping, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy import sparse

from hybridaml.exceptions import RelationLookupError

RELATIONS: Tuple[str, ...] = ("debit", "credit", "debit_rev", "credit_rev")
REVERSE: Dict[str, str] = {
    "debit": "debit_rev",
    "credit": "credit_rev",
    "debit_rev": "debit",
    "credit_rev": "credit",
}


class FeatureMode(str, Enum):
    synthetic = "synthetic"
    hybrid = "hybrid"


class Aggregation(str, Enum):
    sum = "sum"
    mean = "mean"


class SplitConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    train: float = Field(default=0.70, gt=0, lt=1)
    val: float = Field(default=0.15, gt=0, lt=1)
    test: float = Field(default=0.15, gt=0, lt=1)

    def fractions(self) -> Tuple[float, float, float]:
        return (self.train, self.val, self.test)


@dataclass(frozen=True, eq=False)
class SplitMasks:
    train: np.ndarray
    val: np.ndarray
    test: np.ndarray

    def __post_init__(self) -> None:
        for m in (self.train, self.val, self.test):
            m.flags.writeable = False

    def get(self, name: str) -> np.ndarray:
        if name == "all":
            return np.ones_like(self.train)
        return {"train": self.train, "val": self.val, "test": self.test}[name]

    def sizes(self) -> Dict[str, int]:
        return {
            "train": int(self.train.sum()),
            "val": int(self.val.sum()),
            "test": int(self.test.sum()),
        }

    @classmethod
    def train_only(cls, n: int) -> "SplitMasks":
        empty = np.zeros(n, dtype=bool)
        return cls(np.ones(n, dtype=bool), empty, empty.copy())


def csr_from_edges(
    n_nodes: int, src: Sequence[int], dst: Sequence[int]
) -> sparse.csr_matrix:
    """Adjacency with rows = destination nodes, columns = source nodes."""
    src = np.asarray(src, dtype=np.int64)
    dst = np.asarray(dst, dtype=np.int64)
    matrix = sparse.csr_matrix(
        (np.ones(len(src)), (dst, src)), shape=(n_nodes, n_nodes)
    )
    matrix.sum_duplicates()
    matrix.data[:] = 1.0
    matrix.sort_indices()
    return matrix


def _row_normalize(matrix: sparse.csr_matrix) -> sparse.csr_matrix:
    degree = np.diff(matrix.indptr).astype(np.float64)
    inverse = np.divide(
        1.0, degree, out=np.zeros_like(degree), where=degree > 0
    )
    return sparse.csr_matrix(sparse.diags(inverse) @ matrix)


@dataclass(frozen=True, eq=False)
class RelGraph:
    """
    Typed graph with one CSR adjacency per relation.

    For graphs produced by `build_graph`, accounts occupy node indices
    `[0, n_accounts)` and transactions `[n_accounts, n_nodes)`; `target_nodes`
    lists the transaction nodes in input order and `labels`/`masks` are
    aligned with it.
    """

    n_nodes: int
    adjacency: Mapping[str, sparse.csr_matrix]
    features: np.ndarray
    target_nodes: np.ndarray
    labels: np.ndarray
    masks: SplitMasks
    n_accounts: int = 0
    mode: Optional[FeatureMode] = None
    feature_columns: Tuple[str, ...] = ()
    mirrored: bool = False
    n_imputed: int = 0
    relations: Tuple[str, ...] = RELATIONS
    _operators: Dict[Tuple[str, Aggregation, bool], sparse.csr_matrix] = field(
        init=False, repr=False
    )

    def __post_init__(self) -> None:
        operators = {}
        for r in self.relations:
            a = self.adjacency[r]
            mean = _row_normalize(a)
            operators[(r, Aggregation.sum, False)] = a
            operators[(r, Aggregation.mean, False)] = mean
            operators[(r, Aggregation.mean, True)] = mean.T.tocsr()
        for r in self.relations:
            if self.mirrored and REVERSE.get(r) in self.adjacency:
                # Mirror invariant: the reverse relation is the transpose.
                transpose = self.adjacency[REVERSE[r]]
            else:
                transpose = self.adjacency[r].T.tocsr()
            operators[(r, Aggregation.sum, True)] = transpose
        object.__setattr__(self, "_operators", operators)
        self.features.flags.writeable = False
        self.labels.flags.writeable = False
        self.target_nodes.flags.writeable = False

    @property
    def n_transactions(self) -> int:
        return len(self.target_nodes)

    @property
    def feature_width(self) -> int:
        return int(self.features.shape[1])

    def relation(self, name: str) -> sparse.csr_matrix:
        try:
            return self.adjacency[name]
        except KeyError:
            raise RelationLookupError(f"unknown relation {name!r}") from None

    def operator(
        self, relation: str, aggregation: Aggregation, transpose: bool = False
    ) -> sparse.csr_matrix:
        """Message-passing matrix for `relation`, or its transpose."""
        try:
            key = (relation, Aggregation(aggregation), transpose)
            return self._operators[key]
        except KeyError:
            raise RelationLookupError(f"unknown relation {relation!r}") from None

    @classmethod
    def from_edges(
        cls,
        n_nodes: int,
        edges: Mapping[str, Tuple[Sequence[int], Sequence[int]]],
        features: np.ndarray,
        target_nodes: Sequence[int],
        labels: Sequence[int],
        masks: Optional[SplitMasks] = None,
    ) -> "RelGraph":
        """Build a graph from `(src, dst)` edge lists keyed by relation."""
        adjacency = {
            r: csr_from_edges(n_nodes, *edges.get(r, ((), ())))
            for r in RELATIONS
        }
        target = np.array(target_nodes, dtype=np.int64)
        if masks is None:
            masks = SplitMasks.train_only(len(target))
        return cls(
            n_nodes=n_nodes,
            adjacency=adjacency,
            features=np.array(features, dtype=np.float64),
            target_nodes=target,
            labels=np.array(labels, dtype=np.int8),
            masks=masks,
        )


class GraphSummary(BaseModel):
    model_config = ConfigDict(extra="forbid")

    mode: Optional[FeatureMode]
    n_nodes: int
    n_accounts: int
    n_transactions: int
    relation_edges: Dict[str, int]
    feature_width: int
    feature_columns: Tuple[str, ...]
    split_sizes: Dict[str, int]
    split_positives: Dict[str, int]
    n_imputed: int

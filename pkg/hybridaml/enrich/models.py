import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterator, Mapping, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict

from hybridaml.exceptions import IndicatorValidationError

INDICATOR_COLUMNS: Tuple[str, ...] = (
    "basel_aml",
    "dei",
    "cpi",
    "gdp_per_capita_usd",
)
INDICATOR_FILE_COLUMNS: Tuple[str, ...] = ("country", *INDICATOR_COLUMNS, "year")
GDP_COLUMN = INDICATOR_COLUMNS.index("gdp_per_capita_usd")


class NormalizationMethod(str, Enum):
    zscore = "zscore"
    minmax = "minmax"


class JoinPolicy(str, Enum):
    strict = "strict"
    impute_mean = "impute_mean"


class NormalizationConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    method: NormalizationMethod = NormalizationMethod.zscore
    log_gdp: bool = True
    policy: JoinPolicy = JoinPolicy.strict


@dataclass(frozen=True)
class CountryIndicatorRow:
    country: str
    basel_aml: float
    dei: float
    cpi: float
    gdp_per_capita_usd: float
    year: int

    def __post_init__(self) -> None:
        for name in INDICATOR_COLUMNS:
            value = getattr(self, name)
            if not math.isfinite(value):
                raise IndicatorValidationError(
                    f"{self.country}: {name} must be finite (got {value})"
                )
        if not 0.0 <= self.cpi <= 100.0:
            raise IndicatorValidationError(
                f"{self.country}: cpi must lie in [0, 100] (got {self.cpi})"
            )
        if self.gdp_per_capita_usd <= 0:
            raise IndicatorValidationError(
                f"{self.country}: gdp_per_capita_usd must be positive "
                f"(got {self.gdp_per_capita_usd})"
            )

    def vector(self) -> np.ndarray:
        return np.array([getattr(self, c) for c in INDICATOR_COLUMNS])


@dataclass(frozen=True, eq=False)
class NormalizedIndicators:
    """
    Per-country indicator vectors after column-wise normalization.

    `values = (raw' - center) / scale`, where `raw'` is the raw table with GDP
    per capita log-transformed when `log_gdp` is set. For z-scores `center` is
    the column mean and `scale` the population standard deviation.
    """

    countries: Tuple[str, ...]
    values: np.ndarray
    center: np.ndarray
    scale: np.ndarray
    method: NormalizationMethod = NormalizationMethod.zscore
    log_gdp: bool = True
    columns: Tuple[str, ...] = INDICATOR_COLUMNS
    _index: Dict[str, int] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "_index", {c: i for i, c in enumerate(self.countries)}
        )
        for a in (self.values, self.center, self.scale):
            a.flags.writeable = False

    @property
    def width(self) -> int:
        return len(self.columns)

    def covers(self, country: str) -> bool:
        return country in self._index

    def vector(self, country: str) -> np.ndarray:
        return self.values[self._index[country]]

    def denormalize(self) -> np.ndarray:
        raw = self.values * self.scale + self.center
        if self.log_gdp:
            raw = raw.copy()
            raw[:, GDP_COLUMN] = np.exp(raw[:, GDP_COLUMN])
        return raw


@dataclass(frozen=True, eq=False)
class CountryFeatures(Mapping[int, np.ndarray]):
    """Account id -> indicator vector, backed by one matrix in account order."""

    account_ids: np.ndarray
    matrix: np.ndarray
    imputed_countries: Tuple[str, ...] = ()
    n_imputed: int = 0
    _row: Dict[int, int] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(
            self,
            "_row",
            {int(a): i for i, a in enumerate(self.account_ids)},
        )
        self.matrix.flags.writeable = False

    def __getitem__(self, account_id: int) -> np.ndarray:
        return self.matrix[self._row[account_id]]

    def __iter__(self) -> Iterator[int]:
        return iter(self._row)

    def __len__(self) -> int:
        return len(self._row)

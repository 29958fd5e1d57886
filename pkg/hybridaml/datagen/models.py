from dataclasses import dataclass
from typing import (
    Dict,
    Iterator,
    List,
    NamedTuple,
    Optional,
    Sequence,
    Tuple,
    Union,
    overload,
)

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field

# Ordered by ascending Basel AML score in the shipped indicator fixture, so the
# evenly spaced default risk scores follow the public risk ranking.
DEFAULT_COUNTRIES: Tuple[str, ...] = (
    "NL",
    "DE",
    "AU",
    "FR",
    "CA",
    "GB",
    "SG",
    "CH",
    "US",
    "JP",
    "BR",
    "AE",
    "IN",
    "ZA",
    "MX",
    "CN",
)
DEFAULT_TX_TYPES: Tuple[str, ...] = (
    "wire",
    "ach",
    "check",
    "cash_deposit",
    "card",
)

DESK_VALUE_MEAN_USD = 148_339.46
DESK_VALUE_STD_USD = 473_121.20
DESK_BAD_FRACTION = 0.20

ACCOUNT_COLUMNS = ("account_id", "bank_id", "country")
TRANSACTION_COLUMNS = ("tx_id", "src", "dst", "tx_type", "value_usd", "label")


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class RiskCoefficients(StrictModel):
    """
    Logistic label mechanism:

        logit(p) = intercept
                   + src_weight * risk[country(src)]
                   + dst_weight * risk[country(dst)]
                   + value_coef * z(log value)
                   + type_coefs[tx_type]
    """

    enabled: bool = True
    country_risk: Optional[Dict[str, float]] = Field(
        default=None,
        description="Per-country risk score. Defaults to evenly spaced "
        "scores in [-1, 1] following the configured country order.",
    )
    src_weight: float = 1.0
    dst_weight: float = 1.0
    value_coef: float = 0.25
    type_coefs: Optional[List[float]] = Field(
        default=None,
        description="One coefficient per transaction type. Defaults to "
        "evenly spaced values in [-0.5, 0.5].",
    )
    intercept: Optional[float] = Field(
        default=None,
        description="Fixed intercept. Calibrated to the target BAD fraction "
        "when omitted.",
    )

    @classmethod
    def null(cls) -> "RiskCoefficients":
        return cls(enabled=False)


class GenConfig(StrictModel):
    n_accounts: int = Field(default=20_000, ge=0)
    n_transactions: int = Field(default=20_000, ge=0)
    n_banks: int = Field(default=50, ge=1)
    countries: List[str] = Field(default_factory=lambda: list(DEFAULT_COUNTRIES))
    country_weights: Optional[List[float]] = None
    tx_types: List[str] = Field(default_factory=lambda: list(DEFAULT_TX_TYPES))
    tx_type_weights: Optional[List[float]] = None
    value_mean_usd: float = Field(default=DESK_VALUE_MEAN_USD, gt=0)
    value_std_usd: float = Field(default=DESK_VALUE_STD_USD, gt=0)
    target_bad_fraction: float = Field(default=DESK_BAD_FRACTION, gt=0, lt=1)
    risk: RiskCoefficients = Field(default_factory=RiskCoefficients)
    calibration_probe: int = Field(default=200_000, ge=1000)
    seed: int = 0

    def resolved_country_weights(self) -> np.ndarray:
        if self.country_weights is None:
            n = len(self.countries)
            return np.full(n, 1.0 / n)
        return np.asarray(self.country_weights, dtype=np.float64)

    def resolved_type_weights(self) -> np.ndarray:
        if self.tx_type_weights is None:
            n = len(self.tx_types)
            return np.full(n, 1.0 / n)
        return np.asarray(self.tx_type_weights, dtype=np.float64)

    def resolved_country_risk(self) -> np.ndarray:
        n = len(self.countries)
        if not self.risk.enabled:
            return np.zeros(n)
        if self.risk.country_risk is None:
            return np.linspace(-1.0, 1.0, n) if n > 1 else np.zeros(n)
        return np.array(
            [self.risk.country_risk[c] for c in self.countries], dtype=np.float64
        )

    def resolved_type_coefs(self) -> np.ndarray:
        n = len(self.tx_types)
        if not self.risk.enabled:
            return np.zeros(n)
        if self.risk.type_coefs is None:
            return np.linspace(-0.5, 0.5, n) if n > 1 else np.zeros(n)
        return np.asarray(self.risk.type_coefs, dtype=np.float64)


class AccountRecord(NamedTuple):
    account_id: int
    bank_id: int
    country: str


class TransactionRecord(NamedTuple):
    tx_id: int
    src: int
    dst: int
    tx_type: int
    value_usd: float
    label: int


def _freeze(*arrays: np.ndarray) -> None:
    for a in arrays:
        a.flags.writeable = False


@dataclass(frozen=True, eq=False)
class AccountTable(Sequence[AccountRecord]):
    """Column-oriented, read-only account records."""

    account_id: np.ndarray
    bank_id: np.ndarray
    country: np.ndarray

    def __post_init__(self) -> None:
        if not (len(self.account_id) == len(self.bank_id) == len(self.country)):
            raise ValueError("account columns must have equal length")
        _freeze(self.account_id, self.bank_id, self.country)

    def __len__(self) -> int:
        return len(self.account_id)

    @overload
    def __getitem__(self, i: int) -> AccountRecord: ...

    @overload
    def __getitem__(self, i: slice) -> "AccountTable": ...

    def __getitem__(
        self, i: Union[int, slice]
    ) -> Union[AccountRecord, "AccountTable"]:
        if isinstance(i, slice):
            return AccountTable(
                self.account_id[i].copy(),
                self.bank_id[i].copy(),
                self.country[i].copy(),
            )
        return AccountRecord(
            int(self.account_id[i]), int(self.bank_id[i]), str(self.country[i])
        )

    def __iter__(self) -> Iterator[AccountRecord]:
        for i in range(len(self)):
            yield self[i]

    @classmethod
    def from_records(cls, records: Sequence[AccountRecord]) -> "AccountTable":
        return cls(
            np.array([r.account_id for r in records], dtype=np.int64),
            np.array([r.bank_id for r in records], dtype=np.int64),
            np.array([r.country for r in records], dtype=object),
        )

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "account_id": self.account_id,
                "bank_id": self.bank_id,
                "country": self.country,
            },
            columns=list(ACCOUNT_COLUMNS),
        )

    @classmethod
    def from_frame(cls, df: pd.DataFrame) -> "AccountTable":
        return cls(
            df["account_id"].to_numpy(dtype=np.int64, copy=True),
            df["bank_id"].to_numpy(dtype=np.int64, copy=True),
            df["country"].to_numpy(dtype=object, copy=True),
        )


@dataclass(frozen=True, eq=False)
class TransactionTable(Sequence[TransactionRecord]):
    """Column-oriented, read-only transaction records."""

    tx_id: np.ndarray
    src: np.ndarray
    dst: np.ndarray
    tx_type: np.ndarray
    value_usd: np.ndarray
    label: np.ndarray

    def __post_init__(self) -> None:
        columns = self._columns()
        if len({len(c) for c in columns}) > 1:
            raise ValueError("transaction columns must have equal length")
        _freeze(*columns)

    def _columns(self) -> Tuple[np.ndarray, ...]:
        return (
            self.tx_id,
            self.src,
            self.dst,
            self.tx_type,
            self.value_usd,
            self.label,
        )

    def __len__(self) -> int:
        return len(self.tx_id)

    @overload
    def __getitem__(self, i: int) -> TransactionRecord: ...

    @overload
    def __getitem__(self, i: slice) -> "TransactionTable": ...

    def __getitem__(
        self, i: Union[int, slice]
    ) -> Union[TransactionRecord, "TransactionTable"]:
        if isinstance(i, slice):
            return TransactionTable(*(c[i].copy() for c in self._columns()))
        return TransactionRecord(
            int(self.tx_id[i]),
            int(self.src[i]),
            int(self.dst[i]),
            int(self.tx_type[i]),
            float(self.value_usd[i]),
            int(self.label[i]),
        )

    def __iter__(self) -> Iterator[TransactionRecord]:
        for i in range(len(self)):
            yield self[i]

    def take(self, order: np.ndarray) -> "TransactionTable":
        return TransactionTable(*(c[order] for c in self._columns()))

    @classmethod
    def from_records(
        cls, records: Sequence[TransactionRecord]
    ) -> "TransactionTable":
        return cls(
            np.array([r.tx_id for r in records], dtype=np.int64),
            np.array([r.src for r in records], dtype=np.int64),
            np.array([r.dst for r in records], dtype=np.int64),
            np.array([r.tx_type for r in records], dtype=np.int64),
            np.array([r.value_usd for r in records], dtype=np.float64),
            np.array([r.label for r in records], dtype=np.int8),
        )

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            dict(zip(TRANSACTION_COLUMNS, self._columns())),
            columns=list(TRANSACTION_COLUMNS),
        )

    @classmethod
    def from_frame(cls, df: pd.DataFrame) -> "TransactionTable":
        return cls(
            df["tx_id"].to_numpy(dtype=np.int64, copy=True),
            df["src"].to_numpy(dtype=np.int64, copy=True),
            df["dst"].to_numpy(dtype=np.int64, copy=True),
            df["tx_type"].to_numpy(dtype=np.int64, copy=True),
            df["value_usd"].to_numpy(dtype=np.float64, copy=True),
            df["label"].to_numpy(dtype=np.int8, copy=True),
        )


class DatasetSummary(StrictModel):
    n_accounts: int
    n_transactions: int
    n_countries: int
    bad_fraction: Optional[float]
    value_mean_usd: Optional[float]
    value_std_usd: Optional[float]
    accounts_per_country: Dict[str, int]

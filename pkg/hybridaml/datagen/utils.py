import math
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy import optimize, special

from hybridaml.datagen.models import (
    ACCOUNT_COLUMNS,
    TRANSACTION_COLUMNS,
    AccountTable,
    DatasetSummary,
    GenConfig,
    TransactionTable,
)
from hybridaml.exceptions import (
    CalibrationError,
    ConfigurationError,
    DatasetIOError,
)
from hybridaml.logger import logger

ACCOUNTS_FILE = "accounts.csv"
TRANSACTIONS_FILE = "transactions.csv"

CALIBRATION_BRACKET = (-20.0, 20.0)
CALIBRATION_TOLERANCE = 0.005


def validate_gen_config(cfg: GenConfig) -> None:
    if not cfg.countries:
        raise ConfigurationError("country set is empty")
    if len(set(cfg.countries)) != len(cfg.countries):
        raise ConfigurationError("country codes must be unique")
    for code in cfg.countries:
        if len(code) != 2 or not code.isalpha() or not code.isupper():
            raise ConfigurationError(
                f"{code!r} is not an ISO-3166 alpha-2 country code"
            )
    _check_weights(cfg.country_weights, len(cfg.countries), "country_weights")
    if not cfg.tx_types:
        raise ConfigurationError("transaction type set is empty")
    _check_weights(cfg.tx_type_weights, len(cfg.tx_types), "tx_type_weights")
    risk = cfg.risk
    if risk.country_risk is not None:
        missing = sorted(set(cfg.countries) - set(risk.country_risk))
        extra = sorted(set(risk.country_risk) - set(cfg.countries))
        if missing or extra:
            raise ConfigurationError(
                f"country_risk must cover exactly the country set "
                f"(missing {missing}, unknown {extra})"
            )
    if risk.type_coefs is not None and len(risk.type_coefs) != len(cfg.tx_types):
        raise ConfigurationError(
            f"type_coefs has {len(risk.type_coefs)} entries for "
            f"{len(cfg.tx_types)} transaction types"
        )


def _check_weights(
    weights: Optional[Sequence[float]], n: int, name: str
) -> None:
    if weights is None:
        return
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != (n,):
        raise ConfigurationError(f"{name} must have {n} entries")
    if not np.all(np.isfinite(w)) or np.any(w < 0):
        raise ConfigurationError(f"{name} must be finite and non-negative")
    if abs(float(w.sum()) - 1.0) > 1e-9:
        raise ConfigurationError(f"{name} must sum to 1 (got {w.sum():.12g})")


def lognormal_parameters(mean: float, std: float) -> Tuple[float, float]:
    """Moment-matched (mu, sigma) of the underlying normal."""
    if mean <= 0 or std <= 0:
        raise ConfigurationError("log-normal mean and std must be positive")
    sigma2 = math.log1p((std / mean) ** 2)
    return math.log(mean) - sigma2 / 2.0, math.sqrt(sigma2)


def _streams(seed: int) -> Tuple[np.random.Generator, ...]:
    children = np.random.SeedSequence(seed).spawn(3)
    return tuple(np.random.default_rng(c) for c in children)


def generate_accounts(cfg: GenConfig) -> AccountTable:
    validate_gen_config(cfg)
    if cfg.n_accounts < 2:
        raise ConfigurationError(
            f"n_accounts must be at least 2 (got {cfg.n_accounts})"
        )
    rng = _streams(cfg.seed)[0]
    n = cfg.n_accounts
    country_idx = rng.choice(
        len(cfg.countries), size=n, p=cfg.resolved_country_weights()
    )
    bank_id = rng.integers(0, cfg.n_banks, size=n, dtype=np.int64)
    countries = np.array(cfg.countries, dtype=object)
    logger.info("Generated %d accounts over %d countries", n, len(countries))
    return AccountTable(
        np.arange(n, dtype=np.int64), bank_id, countries[country_idx]
    )


def risk_terms(
    cfg: GenConfig,
    src_country: np.ndarray,
    dst_country: np.ndarray,
    log_value_z: np.ndarray,
    tx_type: np.ndarray,
) -> np.ndarray:
    """Label logit without the intercept; country arguments are indices."""
    if not cfg.risk.enabled:
        return np.zeros(len(tx_type))
    country_risk = cfg.resolved_country_risk()
    return (
        cfg.risk.src_weight * country_risk[src_country]
        + cfg.risk.dst_weight * country_risk[dst_country]
        + cfg.risk.value_coef * log_value_z
        + cfg.resolved_type_coefs()[tx_type]
    )


def calibrate_intercept(cfg: GenConfig, n_probe: Optional[int] = None) -> float:
    """
    Find the intercept whose mean BAD probability over `n_probe` simulated
    transactions equals the target fraction.
    """
    validate_gen_config(cfg)
    n_probe = cfg.calibration_probe if n_probe is None else n_probe
    if n_probe < 1000:
        raise ConfigurationError(f"n_probe must be at least 1000 (got {n_probe})")
    rng = _streams(cfg.seed)[2]
    weights = cfg.resolved_country_weights()
    src = rng.choice(len(cfg.countries), size=n_probe, p=weights)
    dst = rng.choice(len(cfg.countries), size=n_probe, p=weights)
    tx_type = rng.choice(
        len(cfg.tx_types), size=n_probe, p=cfg.resolved_type_weights()
    )
    z = rng.standard_normal(n_probe)
    terms = risk_terms(cfg, src, dst, z, tx_type)
    target = cfg.target_bad_fraction

    def excess(b: float) -> float:
        return float(special.expit(b + terms).mean()) - target

    lo, hi = CALIBRATION_BRACKET
    try:
        b = float(optimize.bisect(excess, lo, hi, xtol=1e-12, maxiter=200))
    except (ValueError, RuntimeError) as e:
        raise CalibrationError(
            f"cannot bracket an intercept in [{lo}, {hi}] for target "
            f"BAD fraction {target}: {e}"
        ) from e
    if abs(excess(b)) > CALIBRATION_TOLERANCE:
        raise CalibrationError(
            f"calibrated intercept {b:.6f} misses the target by {excess(b):.4f}"
        )
    logger.info("Calibrated label intercept %.6f for target %.3f", b, target)
    return b


def _stratified_standard_normal(rng: np.random.Generator, n: int) -> np.ndarray:
    # One draw per equal-probability stratum, strata shuffled: each draw is
    # marginally N(0, 1) while sample moments of exp(.) stay near target.
    if n == 0:
        return np.empty(0)
    q = (rng.permutation(n) + rng.random(n)) / n
    q = np.clip(q, np.finfo(np.float64).tiny, None)
    return special.ndtri(q)


def generate_transactions(
    accounts: AccountTable, cfg: GenConfig
) -> TransactionTable:
    validate_gen_config(cfg)
    n_acc = len(accounts)
    if n_acc < 2:
        raise ConfigurationError(
            f"at least 2 accounts are required (got {n_acc})"
        )
    lookup = {c: i for i, c in enumerate(cfg.countries)}
    try:
        account_country = np.array(
            [lookup[c] for c in accounts.country], dtype=np.int64
        )
    except KeyError as e:
        raise ConfigurationError(
            f"account country {e.args[0]!r} is not in the configured set"
        ) from None

    rng = _streams(cfg.seed)[1]
    n = cfg.n_transactions
    src = rng.integers(0, n_acc, size=n, dtype=np.int64)
    dst = rng.integers(0, n_acc - 1, size=n, dtype=np.int64)
    dst += dst >= src
    tx_type = rng.choice(len(cfg.tx_types), size=n, p=cfg.resolved_type_weights())
    mu, sigma = lognormal_parameters(cfg.value_mean_usd, cfg.value_std_usd)
    z = _stratified_standard_normal(rng, n)
    value = np.maximum(np.round(np.exp(mu + sigma * z), 2), 0.01)

    # src/dst are row positions here; mapped to account ids below.
    terms = risk_terms(
        cfg, account_country[src], account_country[dst], z, tx_type
    )
    intercept = cfg.risk.intercept
    if intercept is None:
        intercept = calibrate_intercept(cfg)
    p = special.expit(intercept + terms)
    label = (rng.random(n) < p).astype(np.int8)

    ids = accounts.account_id
    table = TransactionTable(
        np.arange(n, dtype=np.int64),
        ids[src],
        ids[dst],
        tx_type.astype(np.int64),
        value,
        label,
    )
    if n:
        logger.info(
            "Generated %d transactions, BAD fraction %.4f", n, label.mean()
        )
    return table


def summarize_dataset(
    accounts: AccountTable, transactions: TransactionTable
) -> DatasetSummary:
    n = len(transactions)
    countries, counts = np.unique(accounts.country.astype(str), return_counts=True)
    return DatasetSummary(
        n_accounts=len(accounts),
        n_transactions=n,
        n_countries=len(countries),
        bad_fraction=float(transactions.label.mean()) if n else None,
        value_mean_usd=float(transactions.value_usd.mean()) if n else None,
        value_std_usd=float(transactions.value_usd.std(ddof=1)) if n > 1 else None,
        accounts_per_country={
            str(c): int(k) for c, k in zip(countries, counts)
        },
    )


def write_dataset(
    accounts: AccountTable,
    transactions: TransactionTable,
    dir_path: Union[str, Path],
) -> None:
    dir_path = Path(dir_path)
    try:
        dir_path.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise DatasetIOError(
            f"cannot create directory ({e.strerror})", path=dir_path
        ) from e
    for name, frame in (
        (ACCOUNTS_FILE, accounts.to_frame()),
        (TRANSACTIONS_FILE, transactions.to_frame()),
    ):
        path = dir_path / name
        try:
            frame.to_csv(
                path,
                index=False,
                float_format="%.2f",
                lineterminator="\n",
                encoding="utf-8",
            )
        except OSError as e:
            raise DatasetIOError(f"cannot write ({e.strerror})", path=path) from e
    logger.info(
        "Wrote %d accounts and %d transactions to %s",
        len(accounts),
        len(transactions),
        dir_path,
    )


def _read_csv(
    path: Path, columns: Tuple[str, ...], dtypes: Dict[str, Any]
) -> pd.DataFrame:
    try:
        frame = pd.read_csv(
            path, dtype=dtypes, keep_default_na=False, encoding="utf-8"
        )
    except (OSError, ValueError) as e:
        raise DatasetIOError(f"cannot read ({e})", path=path) from e
    if tuple(frame.columns) != columns:
        raise DatasetIOError(
            f"unexpected header {list(frame.columns)}, expected {list(columns)}",
            path=path,
        )
    return frame


def read_dataset(
    dir_path: Union[str, Path],
) -> Tuple[AccountTable, TransactionTable]:
    dir_path = Path(dir_path)
    accounts = _read_csv(
        dir_path / ACCOUNTS_FILE,
        ACCOUNT_COLUMNS,
        {"account_id": np.int64, "bank_id": np.int64, "country": str},
    )
    transactions = _read_csv(
        dir_path / TRANSACTIONS_FILE,
        TRANSACTION_COLUMNS,
        {
            "tx_id": np.int64,
            "src": np.int64,
            "dst": np.int64,
            "tx_type": np.int64,
            "value_usd": np.float64,
            "label": np.int8,
        },
    )
    return AccountTable.from_frame(accounts), TransactionTable.from_frame(
        transactions
    )

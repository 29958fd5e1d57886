from pathlib import Path
from typing import List, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from hybridaml.datagen.models import AccountTable
from hybridaml.enrich.models import (
    GDP_COLUMN,
    INDICATOR_COLUMNS,
    INDICATOR_FILE_COLUMNS,
    CountryFeatures,
    CountryIndicatorRow,
    JoinPolicy,
    NormalizationMethod,
    NormalizedIndicators,
)
from hybridaml.exceptions import (
    CoverageError,
    DatasetIOError,
    DegenerateDataError,
    IndicatorParseError,
    IndicatorValidationError,
    SchemaError,
)
from hybridaml.logger import logger

DEFAULT_INDICATORS_PATH = (
    Path(__file__).resolve().parent.parent / "data" / "country_indicators.csv"
)


def load_country_indicators(
    path: Union[str, Path],
) -> List[CountryIndicatorRow]:
    """
    Read `country_indicators.csv`. Lines starting with `#` are comments.
    Row numbers in errors count data rows from 1.
    """
    path = Path(path)
    try:
        frame = pd.read_csv(
            path,
            dtype=str,
            comment="#",
            keep_default_na=False,
            skipinitialspace=True,
            encoding="utf-8",
        )
    except pd.errors.EmptyDataError:
        raise SchemaError(
            f"{path} has no header", column=INDICATOR_FILE_COLUMNS[0]
        ) from None
    except (OSError, ValueError) as e:
        raise DatasetIOError(f"cannot read indicators ({e})", path=path) from e
    for column in INDICATOR_FILE_COLUMNS:
        if column not in frame.columns:
            raise SchemaError(f"missing column {column!r} in {path}", column=column)

    rows: List[CountryIndicatorRow] = []
    seen = set()
    for i, record in enumerate(frame.to_dict("records"), start=1):
        country = str(record["country"]).strip()
        if country in seen:
            raise IndicatorValidationError(f"duplicate country {country!r}")
        seen.add(country)
        numbers = {}
        for column in INDICATOR_COLUMNS:
            value = pd.to_numeric(record[column], errors="coerce")
            if not np.isfinite(value):
                raise IndicatorParseError(
                    f"{column}={record[column]!r} is not a finite number",
                    row=i,
                )
            numbers[column] = float(value)
        try:
            year = int(record["year"])
        except ValueError:
            raise IndicatorParseError(
                f"year={record['year']!r} is not an integer", row=i
            ) from None
        rows.append(CountryIndicatorRow(country=country, year=year, **numbers))
    logger.info("Loaded indicators for %d countries from %s", len(rows), path)
    return rows


def standardize_columns(
    matrix: np.ndarray,
    method: NormalizationMethod = NormalizationMethod.zscore,
    columns: Sequence[str] = INDICATOR_COLUMNS,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return `(values, center, scale)` for a countries x columns matrix."""
    if method == NormalizationMethod.zscore:
        center = matrix.mean(axis=0)
        scale = matrix.std(axis=0, ddof=0)
    else:
        center = matrix.min(axis=0)
        scale = matrix.max(axis=0) - center
    magnitude = np.maximum(1.0, np.abs(matrix).max(axis=0))
    for j, name in enumerate(columns):
        if not scale[j] > 1e-12 * magnitude[j]:
            raise DegenerateDataError(
                f"column {name!r} has zero variance", column=name
            )
    return (matrix - center) / scale, center, scale


def normalize_indicators(
    rows: Sequence[CountryIndicatorRow],
    method: NormalizationMethod = NormalizationMethod.zscore,
    log_gdp: bool = True,
) -> NormalizedIndicators:
    if len(rows) < 2:
        raise DegenerateDataError(
            f"at least 2 countries are required to normalize (got {len(rows)})"
        )
    raw = np.vstack([r.vector() for r in rows])
    if log_gdp:
        raw[:, GDP_COLUMN] = np.log(raw[:, GDP_COLUMN])
    values, center, scale = standardize_columns(raw, NormalizationMethod(method))
    return NormalizedIndicators(
        countries=tuple(r.country for r in rows),
        values=values,
        center=center,
        scale=scale,
        method=NormalizationMethod(method),
        log_gdp=log_gdp,
    )


def attach_country_features(
    accounts: AccountTable,
    normalized: NormalizedIndicators,
    policy: JoinPolicy = JoinPolicy.strict,
) -> CountryFeatures:
    policy = JoinPolicy(policy)
    codes = accounts.country.astype(str)
    missing = sorted({c for c in np.unique(codes) if not normalized.covers(c)})
    if missing and policy == JoinPolicy.strict:
        raise CoverageError(missing)

    if normalized.method == NormalizationMethod.zscore:
        fill = np.zeros(normalized.width)
    else:
        fill = normalized.values.mean(axis=0)
    lookup = {c: normalized.vector(c) for c in normalized.countries}
    matrix = np.vstack(
        [lookup.get(c, fill) for c in codes]
        if len(codes)
        else [np.empty((0, normalized.width))]
    )
    n_imputed = int(np.isin(codes, missing).sum()) if missing else 0
    if n_imputed:
        logger.warning(
            "Imputed indicator vectors for %d accounts in %s",
            n_imputed,
            ", ".join(missing),
        )
    return CountryFeatures(
        account_ids=accounts.account_id,
        matrix=matrix,
        imputed_countries=tuple(missing),
        n_imputed=n_imputed,
    )

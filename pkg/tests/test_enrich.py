import numpy as np
import pytest

from hybridaml.datagen.models import DEFAULT_COUNTRIES, AccountTable
from hybridaml.enrich import (
    DEFAULT_INDICATORS_PATH,
    INDICATOR_COLUMNS,
    CountryIndicatorRow,
    JoinPolicy,
    NormalizationMethod,
    attach_country_features,
    load_country_indicators,
    normalize_indicators,
    standardize_columns,
)
from hybridaml.exceptions import (
    CoverageError,
    DatasetIOError,
    DegenerateDataError,
    IndicatorParseError,
    IndicatorValidationError,
    SchemaError,
)

HEADER = "country,basel_aml,dei,cpi,gdp_per_capita_usd,year\n"


def row(country: str, basel: float, dei: float, cpi: float, gdp: float):
    return CountryIndicatorRow(country, basel, dei, cpi, gdp, 2022)


def accounts_in(*countries: str) -> AccountTable:
    n = len(countries)
    return AccountTable(
        np.arange(n, dtype=np.int64),
        np.zeros(n, dtype=np.int64),
        np.array(countries, dtype=object),
    )


@pytest.fixture
def indicators():
    return load_country_indicators(DEFAULT_INDICATORS_PATH)


def test_shipped_fixture_covers_default_countries(indicators):
    assert tuple(r.country for r in indicators) == DEFAULT_COUNTRIES
    assert all(r.year == 2022 for r in indicators)


def test_header_only_file(tmp_path):
    path = tmp_path / "ind.csv"
    path.write_text("# comment\n" + HEADER)
    assert load_country_indicators(path) == []


def test_missing_file(tmp_path):
    with pytest.raises(DatasetIOError):
        load_country_indicators(tmp_path / "absent.csv")


def test_missing_column(tmp_path):
    path = tmp_path / "ind.csv"
    path.write_text("country,basel_aml,dei,cpi,year\nNL,3.8,3.6,80,2022\n")
    with pytest.raises(SchemaError) as info:
        load_country_indicators(path)
    assert info.value.column == "gdp_per_capita_usd"


def test_non_finite_value_reports_row(tmp_path):
    path = tmp_path / "ind.csv"
    path.write_text(
        HEADER + "NL,3.8,3.6,80,57025,2022\nUS,4.8,nan,69,76399,2022\n"
    )
    with pytest.raises(IndicatorParseError) as info:
        load_country_indicators(path)
    assert info.value.row == 2


@pytest.mark.parametrize(
    "body",
    [
        "NL,3.8,3.6,101,57025,2022\n",
        "NL,3.8,3.6,80,0,2022\n",
        "NL,3.8,3.6,80,57025,2022\nNL,3.9,3.6,80,57025,2022\n",
    ],
)
def test_invalid_rows(tmp_path, body):
    path = tmp_path / "ind.csv"
    path.write_text(HEADER + body)
    with pytest.raises(IndicatorValidationError):
        load_country_indicators(path)


def test_two_countries_standardize_to_unit_signs():
    normalized = normalize_indicators(
        [row("AA", 2.0, 1.0, 10.0, 100.0), row("BB", 4.0, 3.0, 30.0, 10_000.0)]
    )
    assert np.allclose(normalized.vector("AA"), -1.0)
    assert np.allclose(normalized.vector("BB"), 1.0)


def test_normalization_moments(indicators):
    values = normalize_indicators(indicators).values
    assert values.shape == (16, len(INDICATOR_COLUMNS))
    assert np.allclose(values.mean(axis=0), 0.0, atol=1e-12)
    assert np.allclose(values.std(axis=0, ddof=0), 1.0, atol=1e-12)


def test_standardization_is_idempotent(indicators):
    once = normalize_indicators(indicators).values
    twice, center, scale = standardize_columns(once)
    assert np.allclose(twice, once, atol=1e-12)
    assert np.allclose(center, 0.0, atol=1e-12)
    assert np.allclose(scale, 1.0)


def test_denormalize_recovers_raw(indicators):
    raw = np.vstack([r.vector() for r in indicators])
    for method in NormalizationMethod:
        normalized = normalize_indicators(indicators, method=method)
        assert np.allclose(normalized.denormalize(), raw, rtol=1e-10)


def test_minmax_range(indicators):
    values = normalize_indicators(indicators, method="minmax").values
    assert values.min() == 0.0 and values.max() == 1.0
    assert np.allclose(values.min(axis=0), 0.0)
    assert np.allclose(values.max(axis=0), 1.0)


def test_zero_variance_column():
    rows = [row("AA", 2.0, 1.0, 50.0, 100.0), row("BB", 4.0, 3.0, 50.0, 200.0)]
    with pytest.raises(DegenerateDataError) as info:
        normalize_indicators(rows)
    assert info.value.column == "cpi"


def test_single_country_cannot_be_normalized():
    with pytest.raises(DegenerateDataError):
        normalize_indicators([row("AA", 2.0, 1.0, 50.0, 100.0)])


def test_attach_strict(indicators):
    normalized = normalize_indicators(indicators)
    features = attach_country_features(
        accounts_in("NL", "CN", "NL"), normalized
    )
    assert len(features) == 3
    assert np.array_equal(features[0], normalized.vector("NL"))
    assert np.array_equal(features[1], normalized.vector("CN"))
    assert np.array_equal(features[2], features[0])
    assert features.n_imputed == 0


def test_attach_strict_reports_missing_countries(indicators):
    normalized = normalize_indicators(indicators)
    with pytest.raises(CoverageError) as info:
        attach_country_features(accounts_in("XX", "NL", "QQ"), normalized)
    assert info.value.missing == ["QQ", "XX"]


def test_attach_imputes_column_mean(indicators):
    normalized = normalize_indicators(indicators)
    features = attach_country_features(
        accounts_in("XX", "NL"), normalized, policy=JoinPolicy.impute_mean
    )
    assert np.array_equal(features[0], np.zeros(len(INDICATOR_COLUMNS)))
    assert features.imputed_countries == ("XX",)
    assert features.n_imputed == 1

    minmax = normalize_indicators(indicators, method="minmax")
    features = attach_country_features(
        accounts_in("XX"), minmax, policy="impute_mean"
    )
    assert np.allclose(features[0], minmax.values.mean(axis=0))


def test_attach_is_row_order_invariant(indicators, rng):
    accounts = accounts_in(*DEFAULT_COUNTRIES)
    reference = attach_country_features(
        accounts, normalize_indicators(indicators)
    )
    shuffled = [indicators[i] for i in rng.permutation(len(indicators))]
    features = attach_country_features(accounts, normalize_indicators(shuffled))
    for account_id in reference:
        assert np.allclose(
            features[account_id], reference[account_id], atol=1e-12
        )


def test_attach_empty_accounts(indicators):
    features = attach_country_features(
        accounts_in(), normalize_indicators(indicators)
    )
    assert len(features) == 0
    assert features.matrix.shape == (0, len(INDICATOR_COLUMNS))

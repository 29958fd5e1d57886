import math

import numpy as np
import pandas as pd
import pytest
from scipy import special
from scipy.stats import chi2_contingency

from hybridaml.datagen import (
    AccountTable,
    GenConfig,
    RiskCoefficients,
    TransactionTable,
    calibrate_intercept,
    generate_accounts,
    generate_transactions,
    lognormal_parameters,
    read_dataset,
    summarize_dataset,
    write_dataset,
)
from hybridaml.datagen.models import (
    DEFAULT_COUNTRIES,
    DESK_VALUE_MEAN_USD,
    DESK_VALUE_STD_USD,
)
from hybridaml.datagen.utils import TRANSACTIONS_FILE
from hybridaml.exceptions import ConfigurationError, DatasetIOError


def test_accounts_require_two():
    with pytest.raises(ConfigurationError):
        generate_accounts(GenConfig(n_accounts=0))
    with pytest.raises(ConfigurationError):
        generate_accounts(GenConfig(n_accounts=1))


@pytest.mark.parametrize(
    "overrides",
    [
        {"countries": []},
        {"countries": ["NL", "NL"]},
        {"countries": ["nl"]},
        {"countries": ["NL", "US"], "country_weights": [0.7, 0.7]},
        {"tx_types": []},
        {"risk": RiskCoefficients(type_coefs=[0.1])},
        {
            "countries": ["NL", "US"],
            "risk": RiskCoefficients(country_risk={"NL": 1}),
        },
    ],
)
def test_invalid_generator_config(overrides):
    with pytest.raises(ConfigurationError):
        generate_accounts(GenConfig(n_accounts=10, **overrides))


def test_account_country_shares():
    accounts = generate_accounts(GenConfig(n_accounts=10_000, seed=7))
    shares = pd.Series(accounts.country).value_counts(normalize=True)
    assert set(shares.index) <= set(DEFAULT_COUNTRIES)
    for code in DEFAULT_COUNTRIES:
        assert abs(shares.get(code, 0.0) - 1 / len(DEFAULT_COUNTRIES)) < 0.05
    assert np.array_equal(accounts.account_id, np.arange(10_000))
    assert accounts.bank_id.min() >= 0 and accounts.bank_id.max() < 50


def test_generation_is_deterministic(tmp_path, tiny_gen_config):
    outputs = []
    for name in ("a", "b"):
        accounts = generate_accounts(tiny_gen_config)
        transactions = generate_transactions(accounts, tiny_gen_config)
        write_dataset(accounts, transactions, tmp_path / name)
        outputs.append(
            [
                (tmp_path / name / f).read_bytes()
                for f in ("accounts.csv", "transactions.csv")
            ]
        )
    assert outputs[0] == outputs[1]

    other = tiny_gen_config.model_copy(update={"seed": 4})
    changed = generate_transactions(generate_accounts(other), other)
    assert not np.array_equal(changed.src, transactions.src)


def test_transaction_invariants(tiny_gen_config):
    accounts = generate_accounts(tiny_gen_config)
    transactions = generate_transactions(accounts, tiny_gen_config)
    assert len(transactions) == tiny_gen_config.n_transactions
    assert np.all(transactions.src != transactions.dst)
    assert set(transactions.src) | set(transactions.dst) <= set(
        accounts.account_id
    )
    assert np.all(transactions.value_usd > 0)
    assert set(np.unique(transactions.label)) <= {0, 1}
    assert np.array_equal(transactions.tx_id, np.arange(len(transactions)))
    assert transactions.tx_type.max() < len(tiny_gen_config.tx_types)


def test_unknown_account_country(tiny_gen_config):
    accounts = AccountTable(
        np.arange(3, dtype=np.int64),
        np.zeros(3, dtype=np.int64),
        np.array(["NL", "US", "XX"], dtype=object),
    )
    with pytest.raises(ConfigurationError):
        generate_transactions(accounts, tiny_gen_config)


def test_lognormal_parameters():
    mu, sigma = lognormal_parameters(DESK_VALUE_MEAN_USD, DESK_VALUE_STD_USD)
    assert mu == pytest.approx(10.7005, abs=1e-3)
    assert sigma**2 == pytest.approx(2.4135, abs=1e-3)
    assert math.exp(mu + sigma**2 / 2) == pytest.approx(DESK_VALUE_MEAN_USD)

    rng = np.random.default_rng(11)
    draws = rng.lognormal(mu, sigma, size=1_000_000)
    assert draws.mean() == pytest.approx(DESK_VALUE_MEAN_USD, rel=0.03)

    with pytest.raises(ConfigurationError):
        lognormal_parameters(0.0, 1.0)


def test_calibration_without_signal_is_the_logit():
    cfg = GenConfig(risk=RiskCoefficients.null(), calibration_probe=5000)
    assert calibrate_intercept(cfg) == pytest.approx(
        special.logit(0.2), abs=1e-6
    )
    assert special.logit(0.2) == pytest.approx(-1.386294, abs=1e-6)


def test_calibration_of_symmetric_risk_is_near_zero(tiny_gen_config):
    cfg = tiny_gen_config.model_copy(update={"target_bad_fraction": 0.5})
    assert abs(calibrate_intercept(cfg)) < 0.05


def test_calibration_probe_minimum(tiny_gen_config):
    with pytest.raises(ConfigurationError):
        calibrate_intercept(tiny_gen_config, n_probe=999)


def test_realized_bad_fraction_near_target(tiny_gen_config):
    cfg = tiny_gen_config.model_copy(
        update={"n_accounts": 2000, "n_transactions": 5000}
    )
    transactions = generate_transactions(generate_accounts(cfg), cfg)
    se = math.sqrt(0.2 * 0.8 / len(transactions))
    assert abs(transactions.label.mean() - 0.2) < 4 * se


def test_fixed_intercept_skips_calibration(tiny_gen_config):
    cfg = tiny_gen_config.model_copy(
        update={"risk": RiskCoefficients(enabled=False, intercept=-30.0)}
    )
    transactions = generate_transactions(generate_accounts(cfg), cfg)
    assert transactions.label.sum() == 0


def _country_contingency(cfg: GenConfig) -> np.ndarray:
    accounts = generate_accounts(cfg)
    transactions = generate_transactions(accounts, cfg)
    country = accounts.country[transactions.src]
    return pd.crosstab(country, transactions.label).to_numpy()


def test_country_signal_present_only_when_enabled(tiny_gen_config):
    cfg = tiny_gen_config.model_copy(
        update={"n_accounts": 400, "n_transactions": 5000}
    )
    _, p_signal, _, _ = chi2_contingency(_country_contingency(cfg))
    assert p_signal < 1e-6

    null = cfg.model_copy(update={"risk": RiskCoefficients.null()})
    _, p_null, _, _ = chi2_contingency(_country_contingency(null))
    assert p_null > 1e-3


def test_per_country_bad_fraction_follows_risk(tiny_gen_config):
    cfg = tiny_gen_config.model_copy(
        update={
            "n_accounts": 400,
            "n_transactions": 8000,
            "risk": RiskCoefficients(
                dst_weight=0.0, value_coef=0.0, type_coefs=[0.0] * 5
            ),
        }
    )
    accounts = generate_accounts(cfg)
    transactions = generate_transactions(accounts, cfg)
    intercept = calibrate_intercept(cfg)
    src_country = accounts.country[transactions.src]
    for code, risk in zip(cfg.countries, cfg.resolved_country_risk()):
        labels = transactions.label[src_country == code]
        expected = special.expit(intercept + risk)
        se = math.sqrt(expected * (1 - expected) / len(labels))
        assert abs(labels.mean() - expected) < 4 * se


def test_dataset_round_trip(tmp_path, tiny_gen_config):
    accounts = generate_accounts(tiny_gen_config)
    transactions = generate_transactions(accounts, tiny_gen_config)
    write_dataset(accounts, transactions, tmp_path / "data")
    read_accounts, read_transactions = read_dataset(tmp_path / "data")
    assert list(read_accounts) == list(accounts)
    assert np.array_equal(read_transactions.src, transactions.src)
    assert np.array_equal(read_transactions.label, transactions.label)
    assert np.allclose(read_transactions.value_usd, transactions.value_usd)


def test_empty_transactions_write_header_only(tmp_path, tiny_gen_config):
    cfg = tiny_gen_config.model_copy(update={"n_transactions": 0})
    accounts = generate_accounts(cfg)
    transactions = generate_transactions(accounts, cfg)
    assert len(transactions) == 0
    write_dataset(accounts, transactions, tmp_path)
    assert (tmp_path / TRANSACTIONS_FILE).read_text() == (
        "tx_id,src,dst,tx_type,value_usd,label\n"
    )
    assert summarize_dataset(accounts, transactions).bad_fraction is None


def test_values_written_with_cents(tmp_path):
    accounts = AccountTable(
        np.arange(2, dtype=np.int64),
        np.zeros(2, dtype=np.int64),
        np.array(["NL", "US"], dtype=object),
    )
    transactions = TransactionTable(
        np.array([0], dtype=np.int64),
        np.array([0], dtype=np.int64),
        np.array([1], dtype=np.int64),
        np.array([2], dtype=np.int64),
        np.array([148339.46]),
        np.array([1], dtype=np.int8),
    )
    write_dataset(accounts, transactions, tmp_path)
    lines = (tmp_path / TRANSACTIONS_FILE).read_text().splitlines()
    assert lines[1] == "0,0,1,2,148339.46,1"


def test_read_missing_directory(tmp_path):
    with pytest.raises(DatasetIOError):
        read_dataset(tmp_path / "nowhere")


def test_read_rejects_wrong_header(tmp_path, tiny_gen_config):
    accounts = generate_accounts(tiny_gen_config)
    write_dataset(
        accounts, generate_transactions(accounts, tiny_gen_config), tmp_path
    )
    (tmp_path / TRANSACTIONS_FILE).write_text("a,b\n1,2\n")
    with pytest.raises(DatasetIOError):
        read_dataset(tmp_path)


@pytest.mark.slow
def test_desk_scale_marginals():
    cfg = GenConfig(n_transactions=100_000, seed=1)
    accounts = generate_accounts(cfg)
    summary = summarize_dataset(accounts, generate_transactions(accounts, cfg))
    assert summary.value_mean_usd == pytest.approx(
        DESK_VALUE_MEAN_USD, rel=0.05
    )
    assert summary.value_std_usd == pytest.approx(DESK_VALUE_STD_USD, rel=0.10)
    assert summary.bad_fraction == pytest.approx(0.2, abs=0.01)

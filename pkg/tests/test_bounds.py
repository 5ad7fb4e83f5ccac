import math

import numpy as np
import pytest

from fastrelay.bounds import eta_from_distance, skc_bound


def test_zero_length_is_lossless():
    assert eta_from_distance(0.0, 0.2) == 1.0


def test_ten_db_is_one_decade():
    assert eta_from_distance(50.0, 0.2) == pytest.approx(0.1, rel=1e-14)


def test_crossover_distance_transmissivity():
    # frozen from a 30-digit evaluation of 10**(-0.2*41.2/10)
    assert eta_from_distance(41.2, 0.2) == pytest.approx(
        0.149968483550237349808770814198, rel=1e-14)


def test_negative_inputs_rejected():
    with pytest.raises(ValueError):
        eta_from_distance(-1.0, 0.2)
    with pytest.raises(ValueError):
        eta_from_distance(10.0, -0.2)
    with pytest.raises(ValueError):
        eta_from_distance(math.nan, 0.2)


def test_loss_multiplicativity():
    rng = np.random.default_rng(7)
    for _ in range(200):
        a, b = rng.uniform(0.0, 400.0, size=2)
        alpha = rng.uniform(0.0, 1.0)
        combined = eta_from_distance(a + b, alpha)
        split = eta_from_distance(a, alpha) * eta_from_distance(b, alpha)
        assert combined == pytest.approx(split, rel=1e-12)


def test_skc_half_transmissivity():
    assert skc_bound(0.5, 0) == pytest.approx(1.0, rel=1e-14)


def test_skc_single_repeater_quarter():
    assert skc_bound(0.25, 1) == pytest.approx(1.0, rel=1e-14)


def test_skc_matches_asymptotic_rate_at_first_crossover():
    eta = eta_from_distance(41.2, 0.2)
    assert skc_bound(eta, 0) == pytest.approx(0.2345, abs=1e-3)
    # frozen 30-digit value of -log2(1 - eta)
    assert skc_bound(eta, 0) == pytest.approx(
        0.234411762127784141128648380786, rel=1e-13)


def test_skc_unit_transmissivity_flag():
    with pytest.raises(ValueError):
        skc_bound(1.0, 0)
    assert skc_bound(1.0, 0, allow_infinite=True) == math.inf


def test_skc_out_of_range():
    with pytest.raises(ValueError):
        skc_bound(-0.1, 0)
    with pytest.raises(ValueError):
        skc_bound(1.1, 0)
    with pytest.raises(ValueError):
        skc_bound(0.5, -1)


def test_skc_monotone_in_distance_and_repeaters():
    alpha = 0.2
    lengths = np.linspace(1.0, 600.0, 40)
    for n in (0, 1, 2):
        values = [skc_bound(eta_from_distance(L, alpha), n) for L in lengths]
        assert all(a > b for a, b in zip(values, values[1:]))
    for L in (50.0, 200.0, 500.0):
        eta = eta_from_distance(L, alpha)
        by_n = [skc_bound(eta, n) for n in range(4)]
        assert all(a < b for a, b in zip(by_n, by_n[1:]))


def test_skc_small_eta_asymptote():
    # skc(eta, n) -> eta**(1/(n+1)) / ln 2 once the root itself is small
    for n in (0, 1, 3):
        for root in (1e-5, 1e-7):
            eta = root ** (n + 1)
            ratio = skc_bound(eta, n) / (root / math.log(2.0))
            assert ratio == pytest.approx(1.0, abs=1e-4)


def test_skc_survives_deep_loss():
    # log1p keeps the bound finite and positive far below machine epsilon
    eta = eta_from_distance(1800.0, 0.2)
    value = skc_bound(eta, 1)
    assert 0.0 < value < 1e-15

import numpy as np
import pytest

from fastrelay.errors import ProbabilityOverflowError
from fastrelay.geometry import ChannelParams, d2_upper_bound, solve_geometry
from fastrelay.rates import (p0_small_chi, p1_small_chi, skr_small_chi,
                             skr_small_chi_closed_form, z0_mean_wait,
                             z1_mean_wait)


def z0_markov(p0: float, m: int) -> float:
    """Independent oracle: expected hitting time of the matching chain.

    States: both-empty, then one-side-held with r = m..1 window slots left;
    an exhausted window returns to both-empty.  Solved as a linear system.
    """
    q = 1.0 - p0
    n = m + 1
    A = np.zeros((n, n))
    b = np.ones(n)
    A[0, 0] = 1.0 - q * q
    if m >= 1:
        A[0, 1] = -2.0 * p0 * q
        for j in range(1, n):
            A[j, j] = 1.0
            if j < m:
                A[j, j + 1] = -q
            else:
                A[j, 0] = -q
    else:
        A[0, 0] -= 2.0 * p0 * q  # lone herald dies immediately, retry
    return float(np.linalg.solve(A, b)[0])


def test_p0_examples():
    assert p0_small_chi(1.0) == 0.5
    assert p0_small_chi(0.0) == 0.0
    assert p0_small_chi(0.1) == pytest.approx(0.05, rel=1e-15)


def test_p1_examples():
    assert p1_small_chi(0.25, 1.0) == pytest.approx(0.125, rel=1e-15)
    assert p1_small_chi(1e-6, 0.9) == pytest.approx(1.8e-12, rel=1e-12)
    assert p1_small_chi(0.1, 0.5) == pytest.approx(0.01, rel=1e-15)


def test_p1_overflow():
    with pytest.raises(ProbabilityOverflowError):
        p1_small_chi(0.9, 1.0)


def test_z0_simultaneous_window():
    for p0 in (0.02, 0.1, 0.5, 0.9):
        assert z0_mean_wait(p0, 0) == pytest.approx(1.0 / p0 ** 2, rel=1e-12)


def test_z0_infinite_window_limit():
    # expected maximum of two independent geometric waits
    assert z0_mean_wait(0.1, 10_000) == pytest.approx(
        14.7368421052631578947, rel=1e-12)
    q = 1.0 - 0.37
    assert z0_mean_wait(0.37, 10_000) == pytest.approx(
        (1 + 2 * q) / (0.37 * (1 + q)), rel=1e-12)


def test_z0_deterministic_heralds():
    for m in (0, 3, 50):
        assert z0_mean_wait(1.0, m) == 1.0


def test_z0_against_markov_oracle():
    for p0 in (0.5, 0.3, 0.1, 0.05):
        for m in (0, 1, 2, 5, 11):
            assert z0_mean_wait(p0, m) == pytest.approx(
                z0_markov(p0, m), rel=1e-10)


def test_z0_monotone_in_window_and_floor():
    for p0 in (0.05, 0.3, 0.8):
        values = [z0_mean_wait(p0, m) for m in range(0, 60)]
        assert all(a >= b - 1e-12 for a, b in zip(values, values[1:]))
        assert all(v >= 1.0 / p0 - 1e-12 for v in values)


def test_z0_validation():
    with pytest.raises(ValueError):
        z0_mean_wait(0.0, 3)
    with pytest.raises(ValueError):
        z0_mean_wait(0.5, -1)
    with pytest.raises(ValueError):
        z1_mean_wait(0.0)


def _random_geometry(rng, params):
    L = rng.uniform(5.0, 600.0)
    d2 = rng.uniform(0.0, 1.0) * d2_upper_bound(L, params)
    m = int(rng.integers(0, 200))
    return solve_geometry(L, d2, params, m)


def test_closed_form_identity_on_example_point():
    params = ChannelParams.default(0.2)
    geom = solve_geometry(140.0, 20.0, params, 5)
    breakdown = skr_small_chi(geom, params, 0.1)
    closed = skr_small_chi_closed_form(geom, params, 0.1)
    assert breakdown.skr_bits_per_s == pytest.approx(closed, rel=1e-12)


def test_closed_form_identity_random_grid():
    params = ChannelParams.default(0.2)
    rng = np.random.default_rng(5)
    for _ in range(100):
        geom = _random_geometry(rng, params)
        chi = rng.uniform(0.005, 0.3)
        pipeline = skr_small_chi(geom, params, chi).skr_bits_per_s
        closed = skr_small_chi_closed_form(geom, params, chi)
        assert pipeline == pytest.approx(closed, rel=1e-12)


def test_skr_quadratic_in_chi():
    params = ChannelParams.default(0.2)
    geom = solve_geometry(200.0, 30.0, params, 10)
    r3 = skr_small_chi(geom, params, 1e-3).skr_bits_per_s / 1e-6
    r4 = skr_small_chi(geom, params, 1e-4).skr_bits_per_s / 1e-8
    assert r3 == pytest.approx(r4, rel=1e-2)


def test_skr_large_window_limit():
    # with lossless buffers the rate saturates at the no-cutoff fraction
    params = ChannelParams.default(0.0, eta_switch=1.0)
    chi = 0.05
    geom = solve_geometry(120.0, 10.0, params, 6000)
    eta1, eta2 = geom.eta1, geom.eta2
    expected = (chi ** 2 * eta1 * eta2 * (eta1 / 2.0 - 2.0)
                / (params.tau_s * (eta1 - 3.0)))
    assert skr_small_chi(geom, params, chi).skr_bits_per_s == pytest.approx(
        expected, rel=1e-6)


def test_skr_monotonicity():
    params = ChannelParams.default(0.2)
    chi = 0.05

    def rate(p, L=240.0, d2=20.0, m=8):
        return skr_small_chi(solve_geometry(L, d2, p, m), p, chi).skr_bits_per_s

    base = rate(params)
    assert rate(params, L=300.0) < base
    assert rate(params.with_(alpha_db_per_km=0.3)) < base
    assert rate(params.with_(alpha_qm_db_per_km=0.3)) < base
    assert rate(params.with_(eta_switch=0.95)) < base


def test_breakdown_consistency():
    params = ChannelParams.default(0.2)
    geom = solve_geometry(180.0, 25.0, params, 12)
    b = skr_small_chi(geom, params, 0.08)
    assert b.z1 == pytest.approx(1.0 / b.p1, rel=1e-15)
    assert b.repeater_rate == pytest.approx(1.0 / (b.z0 * b.z1), rel=1e-14)
    assert b.repeater_rate <= min(b.p0, b.p1) + 1e-15
    assert b.skr_bits_per_s == pytest.approx(
        b.raw_rate_bits * b.repeater_rate / params.tau_s, rel=1e-14)
    assert b.mode == "analytic"

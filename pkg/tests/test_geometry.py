import numpy as np
import pytest

from fastrelay.errors import InfeasibleD2Error
from fastrelay.geometry import (ChannelParams, SPEED_OF_LIGHT_KM_S,
                                buffer_transmissivity, d2_upper_bound,
                                solve_geometry, switch_count)


@pytest.fixture
def params():
    return ChannelParams.default(0.2)


def test_default_speed_convention():
    fiber_loop = ChannelParams.default(0.2)
    assert fiber_loop.c_qm == pytest.approx(2.0 * SPEED_OF_LIGHT_KM_S / 3.0)
    free_space = ChannelParams.default(0.05)
    assert free_space.c_qm == SPEED_OF_LIGHT_KM_S


def test_param_validation():
    with pytest.raises(ValueError):
        ChannelParams(eta_switch=0.0)
    with pytest.raises(ValueError):
        ChannelParams(eta_det=1.5)
    with pytest.raises(ValueError):
        ChannelParams(base_b=1)
    with pytest.raises(ValueError):
        ChannelParams(tau_s=0.0)


def test_total_length_identity(params):
    geom = solve_geometry(400.0, 70.0, params, 5)
    assert 2.0 * (2.0 * geom.d1_km + geom.d2_km) == pytest.approx(400.0, rel=1e-15)


def test_d_qm1_closed_form_at_zero_offset(params):
    # substituting d2 = 0 into the mismatch solution gives
    # d_qm1 = L c_qm (c_c + c_q) / (4 c_c c_q)
    L = 250.0
    geom = solve_geometry(L, 0.0, params, 0)
    expected = (L * params.c_qm * (params.c_c + params.c_q)
                / (4.0 * params.c_c * params.c_q))
    assert geom.d_qm1_km == pytest.approx(expected, rel=1e-12)


def test_d_qm1_vanishes_at_bound(params):
    L = 300.0
    bound = d2_upper_bound(L, params)
    geom = solve_geometry(L, bound, params, 3)
    assert geom.d_qm1_km == pytest.approx(0.0, abs=1e-9)


def test_d2_above_bound_raises(params):
    L = 300.0
    bound = d2_upper_bound(L, params)
    with pytest.raises(InfeasibleD2Error) as err:
        solve_geometry(L, bound * 1.001, params, 0)
    assert err.value.bound == pytest.approx(bound)


def test_bound_is_below_half_length(params):
    # the timing window binds before d1 would go negative
    for L in (10.0, 100.0, 1000.0):
        assert d2_upper_bound(L, params) < L / 2.0


def test_zero_storage_steps(params):
    geom = solve_geometry(100.0, 0.0, params, 0)
    assert geom.d_qm2_km == 0.0
    assert geom.switch_uses == 1


@pytest.mark.parametrize("m,b,expected", [
    (9, 10, 11),
    (8, 2, 7),
    (1, 2, 1),
    (0, 2, 1),
    (1000, 10, 31),
    (1001, 10, 41),
    (2, 2, 3),
])
def test_switch_count(m, b, expected):
    assert switch_count(m, b) == expected


def test_switch_count_validation():
    with pytest.raises(ValueError):
        switch_count(-1, 2)
    with pytest.raises(ValueError):
        switch_count(4, 1)


def test_timing_identity_random_configs(params):
    rng = np.random.default_rng(11)
    for _ in range(1000):
        L = rng.uniform(1.0, 2000.0)
        d2 = rng.uniform(0.0, 1.0) * d2_upper_bound(L, params)
        m = int(rng.integers(0, 200))
        geom = solve_geometry(L, d2, params, m)
        assert geom.t2_s + geom.t_qm1_s == pytest.approx(
            geom.t1_s + geom.tc_s, abs=1e-12)


def test_buffer_transmissivity_lossless():
    params = ChannelParams.default(0.0, eta_switch=1.0)
    geom = solve_geometry(200.0, 10.0, params, 7)
    assert buffer_transmissivity(geom, params) == pytest.approx(1.0, rel=1e-15)


def test_buffer_transmissivity_switches_only():
    params = ChannelParams.default(0.0, eta_switch=0.99, base_b=10)
    geom = solve_geometry(200.0, 10.0, params, 9)
    assert buffer_transmissivity(geom, params) == pytest.approx(
        0.99 ** 11, rel=1e-12)


def test_buffer_transmissivity_one_db():
    # 5 km of 0.2 dB/km buffer is 1 dB in total
    params = ChannelParams.default(0.2, eta_switch=1.0)
    m = int(round(5.0 / (params.c_qm * params.tau_s)))
    geom = solve_geometry(1e-6, 0.0, params, m)
    assert geom.d_qm2_km == pytest.approx(5.0, rel=1e-10)
    assert buffer_transmissivity(geom, params) == pytest.approx(
        10 ** -0.1, rel=1e-9)


def test_eta_c_monotonicity(params):
    L = 400.0
    base = solve_geometry(L, 50.0, params, 10)
    assert solve_geometry(L, 50.0, params, 40).eta_c <= base.eta_c
    assert solve_geometry(L, 90.0, params, 10).eta_c <= base.eta_c
    lossier = params.with_(alpha_qm_db_per_km=0.4)
    assert solve_geometry(L, 50.0, lossier, 10).eta_c <= base.eta_c
    worse_switch = params.with_(eta_switch=0.9)
    assert solve_geometry(L, 50.0, worse_switch, 10).eta_c <= base.eta_c


def test_eta_c_composition(params):
    geom = solve_geometry(500.0, 80.0, params, 12)
    assert geom.eta_c == pytest.approx(
        geom.eta2 * buffer_transmissivity(geom, params), rel=1e-12)

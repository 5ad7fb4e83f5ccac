import math
from fractions import Fraction

import numpy as np
import pytest

from fastrelay.bounds import eta_from_distance, skc_bound
from fastrelay.errors import InfeasibleGeometryError
from fastrelay.nesting import (critical_memory_loss, e1_min, ideal_rate,
                               memory_threshold, scaling_asymptote,
                               scaling_exponent, scaling_polynomial,
                               segment_lengths)

# exact exponents of the depth-0..5 layouts at f = 2/3
EXACT_EXPONENTS = [Fraction(1, 2), Fraction(3, 7), Fraction(35, 86),
                   Fraction(104, 259), Fraction(249, 622), Fraction(3733, 9331)]


def test_exponent_table_exact():
    for depth, expected in enumerate(EXACT_EXPONENTS):
        assert scaling_exponent(2.0 / 3.0, depth) == pytest.approx(
            float(expected), abs=1e-12)


def test_exponent_matches_rational_forms():
    for f in np.arange(0.1, 0.95, 0.1):
        for depth in range(1, 6):
            assert scaling_exponent(f, depth) == pytest.approx(
                scaling_polynomial(f, depth), abs=1e-12)


def test_exponent_depth_zero_is_half():
    for f in (0.1, 0.5, 0.9):
        assert scaling_exponent(f, 0) == 0.5


def test_polynomial_depth_range():
    with pytest.raises(ValueError):
        scaling_polynomial(0.5, 0)
    with pytest.raises(ValueError):
        scaling_polynomial(0.5, 6)


def test_asymptote_values():
    assert scaling_asymptote(2.0 / 3.0) == pytest.approx(0.4, abs=1e-15)
    assert scaling_asymptote(0.0) == 0.0
    assert scaling_asymptote(1.0) == 0.5


def test_exponent_converges_monotonically():
    values = [scaling_exponent(2.0 / 3.0, depth) for depth in range(0, 61)]
    assert values[50] == pytest.approx(0.4, abs=1e-6)
    # strictly decreasing until double precision saturates near the limit
    assert all(a > b for a, b in zip(values[:21], values[1:22]))
    assert all(a >= b for a, b in zip(values, values[1:]))
    limit = scaling_asymptote(2.0 / 3.0)
    assert all(v >= limit - 1e-15 for v in values)


def test_infeasible_speed_ratio():
    for f in (1.0, 1.5, 0.0, -0.2, 1.0 - 1e-12):
        with pytest.raises(InfeasibleGeometryError):
            scaling_exponent(f, 2)


def test_segments_depth_one():
    sol = segment_lengths(2.0 / 3.0, 1, 1.0)
    assert sol.lengths[0] == pytest.approx(1.0 / 14.0, abs=1e-15)
    assert sol.lengths[1] == pytest.approx(5.0 / 14.0, abs=1e-15)
    assert sol.scaling == pytest.approx(3.0 / 7.0, abs=1e-13)


def test_segments_depth_zero():
    # single span of L/2 per side; the scaling cost is L/2
    sol = segment_lengths(2.0 / 3.0, 0, 1.0)
    assert sol.lengths.tolist() == [0.5]
    assert sol.scaling == pytest.approx(0.5, abs=1e-15)


def test_segments_total_length_identity():
    for f, depth, L in ((0.37, 3, 100.0), (0.8, 5, 42.0), (2.0 / 3.0, 7, 1.0)):
        sol = segment_lengths(f, depth, L)
        total = 2.0 * sum(2.0 ** (sol.m - k) * d
                          for k, d in enumerate(sol.lengths, start=1))
        assert total == pytest.approx(L, rel=1e-10)


def test_segments_constraint_families():
    rng = np.random.default_rng(3)
    for _ in range(100):
        f = rng.uniform(0.05, 0.95)
        depth = int(rng.integers(0, 9))
        L = rng.uniform(0.5, 900.0)
        sol = segment_lengths(f, depth, L)
        S, d = sol.partial_sums, sol.lengths
        assert S[0] == 0.0
        assert S[-1] == pytest.approx(L / 2.0, rel=1e-12)
        assert np.all(d >= -1e-12 * L)
        for k in range(1, sol.m):  # timing recursion, k = 1..N
            assert (1.0 - f) * d[k] == pytest.approx(
                d[k - 1] + f * S[k], abs=1e-10 * L)
        for k in range(sol.m):     # partial-sum recursion
            assert S[k + 1] == pytest.approx(2.0 * S[k] + d[k], rel=1e-12)


def test_ideal_rate_known_forms():
    L, alpha = 120.0, 0.2
    eta = eta_from_distance(L, alpha)
    assert ideal_rate(2.0 / 3.0, 1, L, alpha) == pytest.approx(
        0.5 * eta ** (3.0 / 7.0), rel=1e-13)
    assert ideal_rate(2.0 / 3.0, math.inf, L, alpha) == pytest.approx(
        0.5 * eta ** 0.4, rel=1e-13)
    # depth-1 exponent tends to 1/3 when classical signalling is much faster
    assert scaling_polynomial(1e-9, 1) == pytest.approx(1.0 / 3.0, abs=1e-9)


def test_ideal_rate_meets_single_repeater_bound():
    L = 230.6
    eta = eta_from_distance(L, 0.2)
    assert ideal_rate(2.0 / 3.0, math.inf, L, 0.2) == pytest.approx(
        skc_bound(eta, 1), abs=1e-3)


def test_ideal_rate_ordering_in_depth():
    for L in (50.0, 200.0, 450.0):
        rates = [ideal_rate(2.0 / 3.0, depth, L, 0.2)
                 for depth in [0, 1, 2, 3, 4, 5, math.inf]]
        assert all(a <= b + 1e-18 for a, b in zip(rates, rates[1:]))


def test_gamma_star_values():
    assert memory_threshold(1.0, 1.0, 1.0).gamma_star == pytest.approx(0.5, abs=1e-15)
    assert memory_threshold(2.0 / 3.0, 1.0, 1.0).gamma_star == pytest.approx(
        2.0 / 7.0, abs=1e-15)


def test_critical_memory_loss_values():
    assert critical_memory_loss(1.0, 1.0, 1.0, 0.2) == pytest.approx(0.1, abs=1e-15)
    assert critical_memory_loss(2.0 / 3.0, 1.0, 1.0, 0.2) == pytest.approx(
        0.0571428571428571428571, abs=1e-15)


def test_e1_min_piecewise():
    assert e1_min(0.0, 1.0, 1.0, 1.0, 1.0) == pytest.approx(0.25, abs=1e-15)
    # slope gamma/2 at f = 1
    assert e1_min(0.3, 1.0, 1.0, 1.0, 1.0) == pytest.approx(0.25 + 0.15, abs=1e-14)
    # flat above the critical ratio
    assert e1_min(0.9, 1.0, 1.0, 1.0, 1.0) == pytest.approx(0.5, abs=1e-15)
    assert e1_min(5.0, 1.0, 1.0, 1.0, 1.0) == e1_min(0.9, 1.0, 1.0, 1.0, 1.0)


def test_e1_min_continuous_at_threshold():
    for f in (1.0, 2.0 / 3.0, 0.4):
        gs = memory_threshold(f, 1.0, 1.0).gamma_star
        below = e1_min(gs * (1 - 1e-13), f, 1.0, 1.0, 1.0)
        above = e1_min(gs * (1 + 1e-13), f, 1.0, 1.0, 1.0)
        assert below == pytest.approx(above, abs=1e-12)


def test_e1_min_saturates_at_depth_one_exponent():
    for f in (0.3, 2.0 / 3.0, 0.9):
        assert e1_min(1.0, f, 1.0, 1.0, 1.0) == pytest.approx(
            scaling_exponent(f, 1), abs=1e-13)


def test_threshold_domain():
    with pytest.raises(ValueError):
        memory_threshold(3.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        e1_min(-0.1, 0.5, 1.0, 1.0)


def test_buffer_lengths_in_threshold_record():
    info = memory_threshold(2.0 / 3.0, 1.0, 1.0, gamma=0.1, L=1.0)
    assert info.s1 == 0.0
    # timing constraint with d1 = L/4, d2 = 0: s2 = c_qm*(L/4)(1/c_c + 1/c_q)
    assert info.s2 == pytest.approx(0.25 * (1.0 + 1.5), abs=1e-14)
    dry = memory_threshold(2.0 / 3.0, 1.0, 1.0, gamma=0.5, L=1.0)
    assert dry.s1 == dry.s2 == 0.0

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from selmask.errors import CalibrationError, ConfigError
from selmask.maskfn import (MaskFnConfig, calibrate, default_oov_score, expected_mask_rate, extremity,
                            probabilities, probability)

scores = st.floats(0.0, 10.0, allow_nan=False)


def step_oracle(s, alpha, sidedness):
    """Threshold check written straight from the step definition."""
    if sidedness == "two_sided":
        return 1.0 if (s <= alpha or s >= 10 - alpha) else 0.0
    m = s if sidedness == "one_sided_hi" else 10 - s
    return 1.0 if m >= 10 - alpha else 0.0


@pytest.mark.parametrize("s,side,m", [(5, "two_sided", 5), (2, "two_sided", 8), (2, "one_sided_hi", 2),
                                      (2, "one_sided_lo", 8), (10, "two_sided", 10)])
def test_extremity(s, side, m):
    assert extremity(s, side) == m


def test_step_example():
    assert probability(MaskFnConfig("step", alpha=2.0), 9.5) == 1.0
    assert probability(MaskFnConfig("step", alpha=2.0), 5.0) == 0.0
    assert probability(MaskFnConfig("step", alpha=2.0), 2.0) == 1.0


def test_linear_endpoints():
    cfg = MaskFnConfig("linear", alpha=5.0, beta=5.0)
    assert probability(cfg, 0.0) == 1.0
    assert probability(cfg, 5.0) == 0.0
    assert probability(cfg, 7.5) == pytest.approx(0.5)


def test_exponential_example():
    gamma = math.exp(5) - math.exp(2.5)
    cfg = MaskFnConfig("exponential", alpha=0.5, beta=2.5, gamma=gamma)
    assert probability(cfg, 10.0) == pytest.approx(1.0, abs=1e-12)
    assert probability(cfg, 0.0) == pytest.approx(1.0, abs=1e-12)
    assert probability(cfg, 5.0) == 0.0
    # direct formula at an interior point
    assert probability(cfg, 8.0) == pytest.approx((math.exp(4.0) - math.exp(2.5)) / gamma)


def test_random_baseline_constant():
    cfg = MaskFnConfig("random_baseline", target_rate=0.15)
    np.testing.assert_array_equal(probabilities(cfg, [0.0, 5.0, 10.0]), 0.15)


def test_non_finite_rejected():
    with pytest.raises(ValueError):
        probability(MaskFnConfig("step", alpha=1.0), float("nan"))


@pytest.mark.parametrize("kwargs", [
    dict(family="step", alpha=6.0), dict(family="step", alpha=-0.1), dict(family="linear", beta=0.0),
    dict(family="exponential", alpha=0.5, gamma=0.0), dict(family="bogus"), dict(family="linear", beta=1.0,
                                                                                   sidedness="sideways"),
    dict(family="linear", beta=1.0, target_rate=1.5),
])
def test_invalid_configs(kwargs):
    with pytest.raises(ConfigError):
        MaskFnConfig(**kwargs)


def test_oov_defaults():
    assert default_oov_score("two_sided") == 5.0
    assert default_oov_score("one_sided_hi") == 0.0
    assert default_oov_score("one_sided_lo") == 10.0
    for side in ("two_sided", "one_sided_hi", "one_sided_lo"):
        for fam in ("step", "linear", "exponential"):
            cfg = MaskFnConfig.default(fam, side)
            grid = np.linspace(0, 10, 1001)
            assert probability(cfg, default_oov_score(side)) == probabilities(cfg, grid).min()


def test_step_matches_threshold_oracle():
    rng = np.random.default_rng(11)
    s = rng.uniform(0, 10, 10_000)
    for side in ("two_sided", "one_sided_hi", "one_sided_lo"):
        for alpha in (0.0, 0.75, 2.0, 5.0):
            cfg = MaskFnConfig("step", side, alpha=alpha)
            got = probabilities(cfg, s)
            want = np.array([step_oracle(x, alpha, side) for x in s])
            assert np.array_equal(got, want)


def test_expected_rate_examples():
    assert expected_mask_rate(MaskFnConfig("linear", alpha=5.0, beta=5.0), [5.0] * 10) == 0.0
    assert expected_mask_rate(MaskFnConfig("step", alpha=5.0), [0.0, 3.0, 10.0]) == 1.0
    s = np.random.default_rng(0).uniform(0, 10, 100_000)
    assert expected_mask_rate(MaskFnConfig("step", alpha=0.75), s) == pytest.approx(0.15, abs=0.005)


def test_expected_rate_weights():
    cfg = MaskFnConfig("step", alpha=1.0)
    # duplicates vs weights must agree
    assert expected_mask_rate(cfg, [0.5, 5.0], [3, 1]) == expected_mask_rate(cfg, [0.5, 0.5, 0.5, 5.0])
    with pytest.raises(ValueError):
        expected_mask_rate(cfg, [])
    with pytest.raises(ValueError):
        expected_mask_rate(cfg, [1.0], [0.0])


families = st.sampled_from(["step", "linear", "exponential"])
sides = st.sampled_from(["two_sided", "one_sided_hi", "one_sided_lo"])


def random_cfg(family, side, a):
    if family == "step":
        return MaskFnConfig("step", side, alpha=a * 5)
    if family == "linear":
        return MaskFnConfig("linear", side, alpha=5.0, beta=0.1 + 20 * a)
    return MaskFnConfig("exponential", side, alpha=0.5, beta=2.5, gamma=0.1 + 200 * a)


# scores on a 1/1024 grid so 10 - s is exact; off-grid, 10 - s can round onto the threshold
grid_scores = st.integers(0, 10240).map(lambda i: i / 1024)


@settings(max_examples=300, deadline=None)
@given(families, sides, st.floats(0, 1), grid_scores, grid_scores)
def test_monotone_in_extremity(family, side, a, s1, s2):
    cfg = random_cfg(family, side, a)
    if extremity(s1, side) > extremity(s2, side):
        s1, s2 = s2, s1
    assert probability(cfg, s1) <= probability(cfg, s2)


@settings(max_examples=300, deadline=None)
@given(families, st.floats(0, 1), scores)
def test_two_sided_symmetry(family, a, s):
    cfg = random_cfg(family, "two_sided", a)
    s = round(s * 1024) / 1024
    assert probability(cfg, s) == probability(cfg, 10.0 - s)


@settings(max_examples=300, deadline=None)
@given(families, sides, st.floats(0, 1), scores)
def test_probability_in_unit_interval(family, side, a, s):
    p = probability(random_cfg(family, side, a), s)
    assert 0.0 <= p <= 1.0


@settings(max_examples=60, deadline=None)
@given(families, sides, st.integers(0, 2**32 - 1), st.floats(0.01, 0.99), st.floats(0.01, 0.99))
def test_rate_monotone_in_solved_parameter(family, side, seed, a1, a2):
    s = np.random.default_rng(seed).uniform(0, 10, 500)
    lo, hi = sorted((a1, a2))
    r_lo = expected_mask_rate(random_cfg(family, side, lo), s)
    r_hi = expected_mask_rate(random_cfg(family, side, hi), s)
    if family == "step":
        assert r_lo <= r_hi
    else:
        assert r_lo >= r_hi


def test_calibrate_step_uniform():
    s = np.linspace(0, 10, 100_001)
    cfg, rep = calibrate("step", "two_sided", s, target_rate=0.15, tolerance=0.002)
    assert rep.converged and rep.parameter == "alpha"
    assert abs(rep.achieved_rate - 0.15) <= 0.002
    # rate = 2 alpha / 10, so tolerance 0.002 bounds alpha within 0.01
    assert cfg.alpha == pytest.approx(0.75, abs=0.01)


def test_calibrate_linear_uniform():
    s = np.linspace(0, 10, 100_001)
    cfg, rep = calibrate("linear", "two_sided", s, target_rate=0.15, tolerance=0.002)
    assert cfg.alpha == 5.0
    # rate = 2.5 / beta, so |d beta| <= 2.5/0.148 - 2.5/0.15
    assert cfg.beta == pytest.approx(2.5 / 0.15, abs=0.23)
    assert rep.converged


def test_calibrate_exponential_uniform():
    s = np.linspace(0, 10, 100_001)
    cfg, rep = calibrate("exponential", "two_sided", s, target_rate=0.15, tolerance=0.002)
    assert cfg.beta == 5 * cfg.alpha
    # closed form: m uniform on [5, 10]; E[e^{a m} - e^{5a}] = (e^{10a} - e^{5a}) / (5a) - e^{5a}
    a = cfg.alpha
    mean_num = (math.exp(10 * a) - math.exp(5 * a)) / (5 * a) - math.exp(5 * a)
    # valid while gamma >= e^{10a} - e^{5a} (no clamping)
    assert cfg.gamma == pytest.approx(mean_num / 0.15, rel=0.02)
    assert rep.converged


@pytest.mark.parametrize("family", ["step", "linear", "exponential"])
def test_calibrate_unreachable_at_neutral(family):
    with pytest.raises(CalibrationError, match="unreachable target rate"):
        calibrate(family, "two_sided", [5.0] * 100, target_rate=0.15)


def test_calibrate_unreachable_above_supremum():
    with pytest.raises(CalibrationError, match="unreachable target rate"):
        calibrate("linear", "two_sided", [5.0] * 95 + [10.0] * 5, target_rate=0.5)


@settings(max_examples=40, deadline=None)
@given(families, sides, st.integers(0, 2**32 - 1), st.floats(0.05, 0.3))
def test_calibration_hits_reachable_targets(family, side, seed, target):
    # continuous score distributions make every rate in range reachable
    s = np.random.default_rng(seed).uniform(0, 10, 2000)
    cfg, rep = calibrate(family, side, s, target_rate=target, tolerance=0.002)
    assert rep.converged
    assert abs(expected_mask_rate(cfg, s) - target) <= 0.002

import math

import numpy as np
import pytest

from gsbm_lab import conf
from gsbm_lab.bounds import (
    COROLLARY, EXACT_ENUM, MONTE_CARLO, bound_corollary, bound_exact, bound_mc, corollary_overlap,
    corollary_overlap_sup, marginal_expansion, multifreq_advantage, overlap_value,
)
from gsbm_lab.builders import build_truth_or_haar, trivial_family
from gsbm_lab.exceptions import BudgetExceeded, ConfigError
from gsbm_lab.tensor import characteristic_tensor, marginal_profile
from gsbm_lab.truncexp import exp_truncated, exp_truncated_envelope, factorial_floor_gap


class TestTruncatedExponential:
    def test_small_cases(self):
        assert exp_truncated(5.0, 0) == 1.0
        assert exp_truncated(2.0, 2) == 5.0
        assert exp_truncated(1.0, 25) == pytest.approx(math.e, abs=1e-14)
        assert exp_truncated(-1.0, 3) == pytest.approx(1 - 1 + 0.5 - 1 / 6)

    def test_array_matches_scalar(self):
        ts = np.array([-3.0, 0.0, 0.7, 12.0])
        values = exp_truncated(ts, 6)
        assert values.shape == ts.shape
        assert np.allclose(values, [exp_truncated(float(t), 6) for t in ts], rtol=1e-14, atol=0)

    def test_overflow(self):
        assert exp_truncated(1e300, 3) == math.inf
        assert exp_truncated(-1e300, 3) == -math.inf
        assert exp_truncated(np.array([1e300, 1.0]), 3)[0] == math.inf

    def test_degree_checks(self):
        with pytest.raises(ConfigError):
            exp_truncated(1.0, -1)
        with pytest.raises(ConfigError):
            exp_truncated(1.0, 2.5)

    @pytest.mark.parametrize('D', range(1, 11))
    def test_envelope_dominates(self, D):
        ts = np.linspace(0, 60, 121)
        assert (exp_truncated_envelope(ts, D) >= exp_truncated(ts, D)).all()

    def test_factorial_floor_gap(self):
        assert all(factorial_floor_gap(d) >= 0 for d in range(1, 171))
        with pytest.raises(ConfigError):
            factorial_floor_gap(0)


def test_trivial_model_gives_one():
    report = bound_exact(trivial_family(2, 2, 3), 6, 4)
    assert report.value == pytest.approx(1.0, abs=1e-12)
    assert report.method == EXACT_ENUM
    assert report.bound_on == 'CAdv^2'


def test_sync_matches_multifrequency_series():
    n, D, gamma = 6, 4, 0.8
    exact = bound_exact(build_truth_or_haar('Z3', gamma / math.sqrt(n)), n, D).value
    series = multifreq_advantage(3, gamma, n, D, method='exact').value
    assert exact == pytest.approx(series, rel=1e-10)


def test_overlap_expansion(make_hsbm):
    fam = make_hsbm(3, 2, 5, 1, 12)
    T = characteristic_tensor(fam)
    profile = marginal_profile(fam)
    rng = np.random.default_rng(5)
    for z in rng.multinomial(12, np.full(4, 0.25), size=5):
        assert overlap_value(T, z) == pytest.approx(marginal_expansion(profile, z), rel=1e-9, abs=1e-12)
    with pytest.raises(ConfigError):
        overlap_value(T, np.array([1.5, 0, 0, 0]))
    with pytest.raises(ConfigError):
        overlap_value(T, np.ones(3))


def test_monte_carlo_agrees_with_enumeration(make_sbm):
    fam = make_sbm(3, 1, 20)
    exact = bound_exact(fam, 20, 4).value
    mc = bound_mc(fam, 20, 4, samples=20000, seed=11)
    assert mc.method == MONTE_CARLO
    assert mc.samples == 20000 and mc.seed == 11
    assert abs(mc.raw_value - exact) <= 5 * mc.mc_stderr


def test_monte_carlo_is_reproducible():
    fam = build_truth_or_haar('Z3', 0.1)
    first = bound_mc(fam, 30, 5, samples=5000, seed=3)
    with conf.override(threads=3, chunk_size=700):
        again = bound_mc(fam, 30, 5, samples=5000, seed=3)
    with conf.override(threads=3):
        pooled = bound_mc(fam, 30, 5, samples=5000, seed=3)
    assert first == pooled
    assert again.value == pytest.approx(first.value, rel=0.2)


def test_mc_value_is_clamped_to_one():
    report = bound_mc(trivial_family(2, 2, 2), 5, 3, samples=100)
    assert report.value == 1.0


def test_exact_budget():
    with conf.override(enum_budget=100):
        with pytest.raises(BudgetExceeded):
            bound_exact(build_truth_or_haar('Z3', 0.1), 20, 3)


def test_corollary_dominates_exact(make_sbm):
    fam = make_sbm(3, 1, 10)
    profile = marginal_profile(fam)
    exact = bound_exact(fam, 10, 3).value
    for form in ('zbar', 'chi2'):
        relaxed = bound_corollary(profile, 10, 3, form=form, method='exact')
        assert relaxed.method == COROLLARY
        assert not relaxed.tainted
        assert relaxed.value >= exact - 1e-12


def test_corollary_forms_agree_for_pairs(make_sbm):
    profile = marginal_profile(make_sbm(3, 1, 50))
    z = np.array([[20, 10, 15, 5]])
    assert corollary_overlap(profile, 50, z, 'zbar') == pytest.approx(corollary_overlap(profile, 50, z, 'chi2'))
    assert corollary_overlap_sup(profile, 50) == pytest.approx(profile.norm(2).value * 50 ** 2)
    with pytest.raises(ConfigError):
        corollary_overlap(profile, 50, z, 'radius')


def test_corollary_of_trivial_profile():
    report = bound_corollary(marginal_profile(trivial_family(2, 2, 2)), 10, 3)
    assert report.value == 1.0


def test_multifrequency_edges():
    assert multifreq_advantage(3, 0.0, 10, 5).value == 1.0
    assert multifreq_advantage(3, 0.7, 10, 0).value == 1.0
    with pytest.raises(ConfigError):
        multifreq_advantage(1, 0.5, 10, 3)
    with pytest.raises(ConfigError):
        multifreq_advantage(3, -0.5, 10, 3)


@pytest.mark.parametrize('k, n, D, lam', [(2, 20, 5, 0.5), (3, 15, 4, 0.7)])
def test_multifrequency_exact_vs_sampled(k, n, D, lam):
    exact = multifreq_advantage(k, lam, n, D, method='exact')
    sampled = multifreq_advantage(k, lam, n, D, method='mc', samples=100000, seed=2)
    assert exact.method == EXACT_ENUM and sampled.method == MONTE_CARLO
    assert abs(sampled.raw_value - exact.value) <= 4 * sampled.mc_stderr


@pytest.mark.slow
def test_sync_threshold_phenomenology():
    n, D = 400, 10
    below = multifreq_advantage(3, 0.8, n, D, method='exact').value
    above = multifreq_advantage(3, 1.3, n, D, method='exact').value
    far_above = multifreq_advantage(3, 1.6, n, D, method='exact').value
    assert below < 10
    assert above > 1e2
    assert far_above > 1e3

    fam = build_truth_or_haar('Z3', 0.8 / math.sqrt(n))
    assert bound_mc(fam, n, D, samples=100000, seed=0).value < 10

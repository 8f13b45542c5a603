import math

import numpy as np
import pytest

from gsbm_lab.bounds import corollary_overlap_sampler, corollary_overlap_sup
from gsbm_lab.builders import trivial_family
from gsbm_lab.concentration import (
    PearsonSpec, bernstein_table, check_overlap_lemma, log_pearson_moment_bound, moment_table, pearson_moment_bound,
    pearson_moment_exact, pearson_moments_exact, pearson_sup, pearson_tail_bound, sample_pearson,
    simple_moment_bound_fit, tail_table, vector_bernstein_bound,
)
from gsbm_lab.exceptions import ConfigError
from gsbm_lab.tensor import marginal_profile


@pytest.mark.parametrize('n', [20, 50])
@pytest.mark.parametrize('d', [2, 4])
def test_pearson_mean(n, d):
    assert pearson_moment_exact(PearsonSpec(n, d), 1) == pytest.approx(d - 1, abs=1e-10)


@pytest.mark.parametrize('n, d', [(10, 3), (25, 4)])
def test_pearson_second_moment(n, d):
    variance = 2 * (d - 1) * (n - 1) / n
    zeroth, first, second = pearson_moments_exact(PearsonSpec(n, d), [0, 1, 2])
    assert zeroth == pytest.approx(1.0, abs=1e-12)
    assert second - first ** 2 == pytest.approx(variance, rel=1e-10)


def test_spec_validation():
    with pytest.raises(ConfigError):
        PearsonSpec(0, 3)
    with pytest.raises(ConfigError):
        PearsonSpec(5, 2.5)


@pytest.mark.parametrize('delta', [0.1, 0.5, 0.9])
@pytest.mark.parametrize('epsilon', [0.1, 0.5, 0.9])
def test_moment_bound_dominates_exact(delta, epsilon):
    spec = PearsonSpec(20, 4)
    for row in moment_table(spec, 5, delta, epsilon):
        assert row['empirical'] <= row['bound']


def test_log_forms_agree():
    spec = PearsonSpec(30, 3)
    assert np.log(pearson_moment_bound(spec, 3, 0.5, 0.5)) == pytest.approx(log_pearson_moment_bound(spec, 3, 0.5, 0.5))
    with pytest.raises(ConfigError):
        pearson_moment_bound(spec, 3, 1.5, 0.5)
    with pytest.raises(ConfigError):
        pearson_tail_bound(spec, -1.0, 0.5)
    with pytest.raises(ConfigError):
        vector_bernstein_bound(10, 3, 0.3, 1.0, 2.0, 1.0)


@pytest.mark.parametrize('n, d, t, epsilon', [(50, 4, 9, 0.3), (20, 2, 0.5, 0.1), (200, 7, 40, 0.6)])
def test_pearson_tail_is_bernstein_on_indicator_vectors(n, d, t, epsilon):
    bernstein = vector_bernstein_bound(n, d, 1 / d, math.sqrt((d - 1) / d), math.sqrt(n * t / d), epsilon)
    assert bernstein == pytest.approx(pearson_tail_bound(PearsonSpec(n, d), t, epsilon), rel=1e-10)


def test_pearson_tail_value():
    assert pearson_tail_bound(PearsonSpec(50, 4), 9, 0.3) == pytest.approx(525.9825387338519, rel=1e-9)


def test_support_bound():
    spec = PearsonSpec(12, 3)
    values = sample_pearson(spec, 20000, seed=4)
    assert values.max() <= pearson_sup(spec)
    # all throws in one cell attains d n - n
    assert pearson_sup(spec) >= (spec.d - 1) * spec.n


@pytest.mark.slow
@pytest.mark.parametrize('n, d', [(20, 2), (50, 4)])
@pytest.mark.parametrize('epsilon', [0.25, 0.5])
def test_tail_bound_dominates_samples(n, d, epsilon):
    spec = PearsonSpec(n, d)
    for row in tail_table(spec, np.linspace(0, 60, 31), epsilon, samples=10 ** 6, seed=9):
        assert row['empirical'] <= row['bound']


def test_bernstein_bound_dominates_samples():
    for row in bernstein_table(30, 4, np.linspace(0, 30, 16), 0.5, samples=20000, seed=1):
        assert row['empirical'] <= row['bound']


def test_simple_moment_fit():
    fit = simple_moment_bound_fit([PearsonSpec(n, 3) for n in (20, 40, 60)], 0.5, 5)
    assert fit.ok
    assert fit.C >= fit.required > 0


def test_overlap_lemma_holds_for_subcritical_sbm(make_sbm):
    n, D = 500, 20
    profile = marginal_profile(make_sbm(3, 1, n))
    sup = corollary_overlap_sup(profile, n)
    assert sup == pytest.approx(502, rel=0.01)
    report = check_overlap_lemma(corollary_overlap_sampler(profile, n), D, 70, (2.0, 0.5),
                                 sup_bound=sup, samples=100000, seed=0)
    assert report.condition1 is True
    assert report.condition2
    assert report.worst_t is None
    assert report.expectation > 1


def test_overlap_lemma_fails_above_threshold(make_sbm):
    n = 500
    profile = marginal_profile(make_sbm(5, 0, n))
    report = check_overlap_lemma(corollary_overlap_sampler(profile, n), 20, 70, (2.0, 0.0), samples=100000)
    assert report.condition1 is None
    assert not report.condition2
    assert report.worst_t is not None


@pytest.mark.parametrize('C, holds', [(1.0, True), (0.5, False)])
def test_overlap_lemma_for_zero_overlap(C, holds):
    sampler = corollary_overlap_sampler(marginal_profile(trivial_family(2, 2, 2)), 50)
    report = check_overlap_lemma(sampler, 5, 10, (C, 0.0), sup_bound=0.0, samples=1000)
    assert report.condition2 is holds
    assert report.expectation == 1.0


def test_overlap_lemma_rejects_negative_samples():
    with pytest.raises(ConfigError):
        check_overlap_lemma(lambda rng, size: -np.ones(size), 3, 10, (1.0, 0.0), samples=10)

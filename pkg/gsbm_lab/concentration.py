"""
Vector Bernstein and Pearson chi-squared concentration, with the exact and
sampled quantities they are checked against.
"""
import dataclasses
import logging
import math
import typing

import numpy as np
from scipy.special import gammaln

from gsbm_lab import conf
from gsbm_lab.exceptions import ConfigError
from gsbm_lab.iterables import Compositions, MultinomialDraws, pearson_values
from gsbm_lab.truncexp import exp_truncated

logger = logging.getLogger(__name__)


@dataclasses.dataclass(frozen=True)
class PearsonSpec:
    """Pearson statistic of n throws into d equally likely bins."""
    n: int
    d: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ConfigError('Pearson spec needs n >= 1, got %r' % self.n)
        if int(self.d) != self.d or self.d < 1:
            raise ConfigError('Pearson spec needs d >= 1, got %r' % self.d)


def _check_epsilon(epsilon):
    if not 0 < epsilon < 1:
        raise ConfigError('epsilon must lie in (0, 1), got %r' % epsilon)


def log_vector_bernstein_bound(n, d, sigma2, M, t, epsilon):
    _check_epsilon(epsilon)
    if sigma2 < 0 or M <= 0 or t < 0:
        raise ConfigError('need sigma2 >= 0, M > 0, t >= 0')
    net = d * math.log1p(2 / epsilon)
    if t == 0:
        return net
    return net - t * t / (2 * sigma2 * n / (1 - epsilon) ** 2 + (2 / 3) * M * t / (1 - epsilon))


def vector_bernstein_bound(n, d, sigma2, M, t, epsilon):
    """P[|sum of n centered vectors| >= t] for ||v|| <= M, ||Cov v|| <= sigma2."""
    return math.exp(log_vector_bernstein_bound(n, d, sigma2, M, t, epsilon))


def log_pearson_tail_bound(spec, t, epsilon):
    _check_epsilon(epsilon)
    if t < 0:
        raise ConfigError('tail threshold t must be nonnegative, got %r' % t)
    n, d = spec.n, spec.d
    net = d * math.log1p(2 / epsilon)
    return net - 0.5 * (1 - epsilon) ** 2 * t / (1 + (1 - epsilon) / 3 * math.sqrt((d - 1) / n) * math.sqrt(t))


def pearson_tail_bound(spec, t, epsilon):
    return math.exp(log_pearson_tail_bound(spec, t, epsilon))


def log_pearson_moment_bound(spec, r, delta, epsilon):
    _check_epsilon(epsilon)
    if not 0 < delta < 1:
        raise ConfigError('delta must lie in (0, 1), got %r' % delta)
    if r < 1:
        raise ConfigError('moment order r must be >= 1, got %r' % r)
    n, d = spec.n, spec.d
    shrink = 2 * math.log(1 - epsilon)
    bulk = r * (math.log1p(math.sqrt(delta * d)) - shrink) + r * math.log(2) + gammaln(r)
    tail = r * (math.log(4 / delta + 4 * d) - shrink) + gammaln(2 * r) - r * math.log(n)
    return math.log(2 * r) + d * math.log1p(2 / epsilon) + float(np.logaddexp(bulk, tail))


def pearson_moment_bound(spec, r, delta, epsilon):
    return math.exp(log_pearson_moment_bound(spec, r, delta, epsilon))


def pearson_sup(spec):
    """Every Pearson value is at most d n."""
    return spec.d * spec.n


def pearson_moments_exact(spec, rs):
    """Exact E X^r for each r in ``rs``, from a single enumeration of the support."""
    rs = [int(r) for r in rs]
    if any(r < 0 for r in rs):
        raise ConfigError('moment orders must be nonnegative, got %s' % rs)
    support = Compositions(spec.n, spec.d).check_budget()
    powers = np.array(rs, dtype=float)
    estimate = support.expectation(lambda z: pearson_values(z, spec.n)[:, None] ** powers[None, :])
    return [float(m) for m in np.atleast_1d(estimate.value)]


def pearson_moment_exact(spec, r):
    return pearson_moments_exact(spec, [r])[0]


def sample_pearson(spec, samples, seed=0):
    draws = MultinomialDraws(spec.n, spec.d, samples, seed)
    return np.concatenate([pearson_values(z, spec.n) for _, z in draws])


def sample_vector_sum_norms(n, d, samples, seed=0):
    """|sum of n i.i.d. vectors uniform on {+e_i, -e_i}|: sigma2 = 1/d, M = 1."""
    rng = np.random.Generator(np.random.Philox(seed))
    counts = rng.multinomial(n, np.full(d, 1.0 / d), size=samples)
    plus = rng.binomial(counts, 0.5)
    return np.sqrt(((2 * plus - counts) ** 2).sum(axis=1))


def empirical_tail(values, ts):
    values = np.sort(np.asarray(values))
    ts = np.asarray(ts, dtype=float)
    return 1.0 - np.searchsorted(values, ts, side='left') / len(values)


def tail_table(spec, ts, epsilon, samples=None, seed=0):
    """Rows (t, empirical P[X >= t], bound) for the Pearson tail."""
    values = sample_pearson(spec, samples or conf.setting('mc_samples') * 10, seed)
    if values.max() > pearson_sup(spec):
        logger.error('sampled Pearson value %g exceeds d n = %d', values.max(), pearson_sup(spec))
    return [
        {'t': float(t), 'empirical': float(emp), 'bound': pearson_tail_bound(spec, t, epsilon)}
        for t, emp in zip(ts, empirical_tail(values, ts))
    ]


def bernstein_table(n, d, ts, epsilon, samples=None, seed=0):
    norms = sample_vector_sum_norms(n, d, samples or conf.setting('mc_samples'), seed)
    return [
        {'t': float(t), 'empirical': float(emp), 'bound': vector_bernstein_bound(n, d, 1.0 / d, 1.0, t, epsilon)}
        for t, emp in zip(ts, empirical_tail(norms, ts))
    ]


def moment_table(spec, r_max, delta, epsilon):
    """Rows (r, exact E X^r, moment bound)."""
    rs = list(range(1, r_max + 1))
    exact = pearson_moments_exact(spec, rs)
    return [{'r': r, 'empirical': m, 'bound': pearson_moment_bound(spec, r, delta, epsilon)}
            for r, m in zip(rs, exact)]


class MomentFit(typing.NamedTuple):
    C: float
    gamma: float
    ok: bool
    required: float


C_GRID = np.geomspace(1e-3, 1e6, 1801)


def simple_moment_bound_fit(spec_family, epsilon, r_max, gamma=0.1):
    """
    Smallest C on a log grid with E X^r <= r^{3/2} C^d ((2+eps) r / e)^r for
    every spec and every r <= min(r_max, gamma n).
    """
    if epsilon <= 0:
        raise ConfigError('epsilon must be positive, got %r' % epsilon)
    required = 0.0
    for spec in spec_family:
        rs = list(range(1, min(r_max, math.floor(gamma * spec.n)) + 1))
        if not rs:
            continue
        for r, moment in zip(rs, pearson_moments_exact(spec, rs)):
            if moment <= 0:
                continue
            log_target = 1.5 * math.log(r) + r * math.log((2 + epsilon) * r / math.e)
            required = max(required, math.exp((math.log(moment) - log_target) / spec.d))
    fits = C_GRID[C_GRID >= required]
    if not len(fits):
        return MomentFit(C=math.inf, gamma=gamma, ok=False, required=required)
    return MomentFit(C=float(fits[0]), gamma=gamma, ok=True, required=required)


class OverlapLemmaReport(typing.NamedTuple):
    # None when no analytic sup bound was supplied
    condition1: typing.Optional[bool]
    condition2: bool
    # first grid point where the tail exceeds f(t) e^{-t}
    worst_t: typing.Optional[float]
    worst_excess: float
    expectation: float
    stderr: float
    samples: int
    D: int
    A: float


def check_overlap_lemma(sampler, D, A, f_params, sup_bound=None, samples=None, seed=0, t_grid=None):
    """
    Check the two hypotheses of the truncated-exponential overlap lemma on a
    sample of R >= 0: A >= D max(2, log(sup R / D)), and P[R >= t] <= f(t) e^{-t}
    on [0, A] with f(t) = C exp(-decay t).
    """
    C, decay = f_params
    samples = samples or conf.setting('mc_samples')
    values = np.asarray(sampler(np.random.Generator(np.random.Philox(seed)), samples), dtype=float)
    if (values < 0).any():
        raise ConfigError('overlap lemma needs R >= 0, sampled %g' % values.min())

    condition1 = None
    if sup_bound is not None:
        ratio = math.log(sup_bound / D) if sup_bound > 0 and D > 0 else -math.inf
        condition1 = A >= D * max(2.0, ratio)

    ts = np.linspace(0.0, A, 101) if t_grid is None else np.asarray(t_grid, dtype=float)
    envelope = C * np.exp(-(decay + 1) * ts)
    excess = empirical_tail(values, ts) - envelope
    failing = np.flatnonzero(excess > 0)

    series = exp_truncated(values, D)
    return OverlapLemmaReport(
        condition1=condition1,
        condition2=not len(failing),
        worst_t=float(ts[failing[0]]) if len(failing) else None,
        worst_excess=float(excess.max()),
        expectation=float(series.mean()),
        stderr=float(series.std(ddof=1) / math.sqrt(len(series))) if len(series) > 1 else 0.0,
        samples=len(values),
        D=D,
        A=A,
    )

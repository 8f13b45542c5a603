"""
Upper bounds on the squared coordinate advantage CAdv^2.

Every bound is an expectation of exp^{<=D} of an overlap over
z ~ Mult(n, k^2), evaluated by exact enumeration or Monte Carlo.
"""
import logging
import math
import typing

import numpy as np

from gsbm_lab import conf
from gsbm_lab.concentration import PearsonSpec, pearson_moments_exact
from gsbm_lab.exceptions import ConfigError
from gsbm_lab.iterables import Compositions, MultinomialDraws, pearson_values
from gsbm_lab.tensor import characteristic_tensor
from gsbm_lab.truncexp import exp_truncated

logger = logging.getLogger(__name__)

EXACT_ENUM = 'exact-enum'
MONTE_CARLO = 'monte-carlo'
COROLLARY = 'corollary-relaxation'

# cap on rows * dim^(order-1) held at once while contracting a batch
CONTRACTION_CELLS = 1 << 22


class BoundReport(typing.NamedTuple):
    n: int
    D: int
    value: float
    method: str
    mc_stderr: typing.Optional[float] = None
    samples: typing.Optional[int] = None
    seed: typing.Optional[int] = None
    # sample mean before clamping to the feasible floor 1
    raw_value: typing.Optional[float] = None
    # the relaxation used lower-bound-only injective norms
    tainted: bool = False
    form: typing.Optional[str] = None
    bound_on: str = 'CAdv^2'

    def as_dict(self):
        return self._asdict()


def _check_nd(n, D):
    if int(n) != n or n < 1:
        raise ConfigError('population size n must be a positive integer, got %r' % n)
    if int(D) != D or D < 0:
        raise ConfigError('degree D must be a nonnegative integer, got %r' % D)
    return int(n), int(D)


def overlap_values(T, z):
    """<T, z^p> for every row of z."""
    z = np.atleast_2d(np.asarray(z, dtype=float))
    if z.shape[1] != T.dim:
        raise ConfigError('overlap vector has length %d, expected %d' % (z.shape[1], T.dim))
    if T.order == 0:
        return np.full(len(z), float(T.entries))
    step = max(1, CONTRACTION_CELLS // T.dim ** (T.order - 1))
    out = np.empty(len(z))
    for start in range(0, len(z), step):
        rows = z[start:start + step]
        values = np.tensordot(rows, T.entries, axes=([1], [0]))
        for _ in range(T.order - 1):
            values = np.einsum('mi...,mi->m...', values, rows)
        out[start:start + step] = values
    return out


def overlap_value(T, z):
    z = np.asarray(z)
    if z.ndim != 1:
        raise ConfigError('overlap vector must be one-dimensional')
    if (z < 0).any() or not np.all(np.equal(np.mod(z, 1), 0)):
        raise ConfigError('overlap vector must hold nonnegative integers')
    return float(overlap_values(T, z)[0])


def marginal_expansion(profile, z):
    """sum_j C(p,j) n^{p-j} <T^(j), zbar^j> with zbar = z - (n/k^2) 1."""
    z = np.asarray(z, dtype=float)
    n, p = z.sum(), profile.p
    zbar = z - n / z.size
    return math.fsum(math.comb(p, j) * n ** (p - j) * float(profile.tensor(j).contract(zbar))
                     for j in range(1, p + 1))


def _draws(n, d, method, samples, seed):
    if method == 'exact':
        return Compositions(n, d).check_budget()
    if method == 'mc':
        return MultinomialDraws(n, d, samples or conf.setting('mc_samples'), seed)
    if method != 'auto':
        raise ConfigError('evaluation method must be exact, mc or auto, got %r' % method)
    support = Compositions(n, d)
    if support.size <= conf.setting('enum_budget'):
        return support
    logger.warning('%d compositions exceed the enumeration budget; falling back to Monte Carlo', support.size)
    return MultinomialDraws(n, d, samples or conf.setting('mc_samples'), seed)


def _report(n, D, estimate, draws, method=None, **extra):
    if draws.exact:
        return BoundReport(n=n, D=D, value=estimate.value, method=method or EXACT_ENUM, **extra)
    return BoundReport(
        n=n, D=D,
        value=max(1.0, estimate.value),
        method=method or MONTE_CARLO,
        mc_stderr=estimate.stderr,
        samples=draws.samples,
        seed=draws.seed,
        raw_value=estimate.value,
        **extra,
    )


def bound_exact(fam, n, D, tensor=None):
    """E_{z ~ Mult(n, k^2)} exp^{<=D}(<T, z^p>) by enumerating all compositions."""
    n, D = _check_nd(n, D)
    T = characteristic_tensor(fam) if tensor is None else tensor
    draws = Compositions(n, T.dim).check_budget()
    logger.debug('bound_exact: %d compositions, D=%d', draws.size, D)
    estimate = draws.expectation(lambda z: exp_truncated(overlap_values(T, z), D))
    return _report(n, D, estimate, draws)


def bound_mc(fam, n, D, samples=None, seed=0, tensor=None):
    n, D = _check_nd(n, D)
    T = characteristic_tensor(fam) if tensor is None else tensor
    draws = MultinomialDraws(n, T.dim, samples or conf.setting('mc_samples'), seed)
    estimate = draws.expectation(lambda z: exp_truncated(overlap_values(T, z), D))
    return _report(n, D, estimate, draws)


def _corollary_terms(profile, n):
    """(j, C(p,j) |T^(j)| n^{p-j}) for j from p* to p."""
    p = profile.p
    return [(j, math.comb(p, j) * profile.norm(j).value * n ** (p - j))
            for j in range(profile.marginal_order, p + 1)]


def corollary_overlap(profile, n, z, form='zbar'):
    z = np.atleast_2d(np.asarray(z, dtype=float))
    k, p = profile.k, profile.p
    if form == 'zbar':
        radius = np.sqrt(((z - n / z.shape[1]) ** 2).sum(axis=1))
        return sum(coef * radius ** j for j, coef in _corollary_terms(profile, n))
    if form == 'chi2':
        X = pearson_values(z, n)
        return sum(math.comb(p, j) * k ** (-j) * profile.norm(j).value * n ** (p - j / 2) * X ** (j / 2)
                   for j in range(profile.marginal_order, p + 1))
    raise ConfigError('corollary form must be zbar or chi2, got %r' % form)


def corollary_overlap_sup(profile, n):
    """Largest value of the relaxed overlap; |zbar| <= n because X <= k^2 n."""
    if profile.trivial:
        return 0.0
    return math.fsum(coef * n ** j for j, coef in _corollary_terms(profile, n))


def corollary_overlap_sampler(profile, n, form='zbar'):
    d = profile.k ** 2

    def sampler(rng, size):
        z = rng.multinomial(n, np.full(d, 1.0 / d), size=size)
        if profile.trivial:
            return np.zeros(size)
        return corollary_overlap(profile, n, z, form)

    return sampler


def bound_corollary(profile, n, D, form='zbar', method='auto', samples=None, seed=0):
    """Relaxation of bound_exact through the injective norms of the marginal tensors."""
    n, D = _check_nd(n, D)
    if form not in ('zbar', 'chi2'):
        raise ConfigError('corollary form must be zbar or chi2, got %r' % form)
    tainted = not profile.exact
    if tainted:
        logger.warning('corollary bound uses lower-bound-only injective norms; the relaxation is not certified')
    if profile.trivial:
        return BoundReport(n=n, D=D, value=1.0, method=COROLLARY, tainted=tainted, form=form)
    draws = _draws(n, profile.k ** 2, method, samples, seed)
    estimate = draws.expectation(lambda z: exp_truncated(corollary_overlap(profile, n, z, form), D))
    return _report(n, D, estimate, draws, method=COROLLARY, tainted=tainted, form=form)


def multifreq_advantage(k, lam, n, D, method='auto', samples=None, seed=0):
    """
    sum_{d<=D} (lam^2/2)^d E X^d / d! with X ~ chi2_Pear(n, k): the squared
    degree-D advantage of multi-frequency synchronization.
    """
    n, D = _check_nd(n, D)
    if int(k) != k or k < 2:
        raise ConfigError('multi-frequency model needs k >= 2, got %r' % k)
    if lam < 0:
        raise ConfigError('lambda must be nonnegative, got %r' % lam)
    spec = PearsonSpec(n, int(k))
    if lam == 0 or D == 0:
        return BoundReport(n=n, D=D, value=1.0, method=EXACT_ENUM)
    scale = lam ** 2 / 2
    draws = _draws(n, spec.d, method, samples, seed)
    if draws.exact:
        moments = pearson_moments_exact(spec, range(D + 1))
        value = math.fsum(scale ** d * moments[d] / math.factorial(d) for d in range(D + 1))
        return BoundReport(n=n, D=D, value=value, method=EXACT_ENUM)
    estimate = draws.expectation(lambda z: exp_truncated(scale * pearson_values(z, n), D))
    return _report(n, D, estimate, draws)


import itertools
import logging
import math
import typing
from functools import cached_property

import numpy as np

from gsbm_lab import conf
from gsbm_lab.exceptions import ConfigError

logger = logging.getLogger(__name__)


class ChannelFamily:
    """
    A discrete GSBM: one probability vector over the alphabet [ell] for every
    label tuple a in [k]^p.

    ``mu`` is stored as a read-only array of shape (k,)*p + (ell,); label
    tuples index it in row-major order and are never canonically sorted.
    """

    def __init__(self, mu, name=None):
        mu = np.array(mu, dtype=float)
        if mu.ndim < 3:
            raise ConfigError('channel table needs p >= 2 label axes plus the alphabet axis, got shape %s' % (mu.shape,))
        k = mu.shape[0]
        if any(size != k for size in mu.shape[:-1]):
            raise ConfigError('all label axes must have the same size, got shape %s' % (mu.shape,))
        if mu.shape[-1] < 1 or k < 1:
            raise ConfigError('empty channel table, shape %s' % (mu.shape,))
        if not np.isfinite(mu).all():
            raise ConfigError('channel table contains non-finite entries')

        if (mu < -conf.setting('neg_tol')).any():
            a = np.unravel_index(np.argmin(mu), mu.shape)
            raise ConfigError('negative probability %r at label %s' % (float(mu[a]), a[:-1]))
        mu[mu < 0] = 0.0

        sums = mu.sum(axis=-1)
        if (worst := float(np.abs(sums - 1).max())) > conf.setting('prob_tol'):
            a = np.unravel_index(np.argmax(np.abs(sums - 1)), sums.shape)
            raise ConfigError('channel %s sums to %r (off by %.3g)' % (a, float(sums[a]), worst))

        avg = mu.reshape(-1, mu.shape[-1]).mean(axis=0)
        if (avg <= 0).any():
            raise ConfigError('degenerate family: average channel puts no mass on symbol(s) %s'
                              % np.flatnonzero(avg <= 0).tolist())

        mu.flags.writeable = False
        self.mu = mu
        self.name = name

    @classmethod
    def from_table(cls, p, k, ell, table, name=None):
        """Build from a mapping label tuple -> probability vector covering all of [k]^p."""
        mu = np.full((k,) * p + (ell,), np.nan)
        for a, vector in table.items():
            a = tuple(a)
            if len(a) != p or not all(0 <= x < k for x in a):
                raise ConfigError('label tuple %s outside [%d]^%d' % (a, k, p))
            if len(vector) != ell:
                raise ConfigError('channel %s has %d entries, expected ell=%d' % (a, len(vector), ell))
            mu[a] = vector
        if np.isnan(mu).any():
            missing = np.argwhere(np.isnan(mu[..., 0]))[0]
            raise ConfigError('channel table misses label tuple %s' % (tuple(missing.tolist()),))
        return cls(mu, name=name)

    def clone(self, mu, name=None):
        return type(self)(mu, name=name)

    @property
    def p(self):
        return self.mu.ndim - 1

    @property
    def k(self):
        return self.mu.shape[0]

    @property
    def ell(self):
        return self.mu.shape[-1]

    def labels(self):
        return itertools.product(range(self.k), repeat=self.p)

    def channel(self, a):
        a = tuple(a)
        if len(a) != self.p or not all(0 <= x < self.k for x in a):
            raise IndexError('label tuple %s outside [%d]^%d' % (a, self.k, self.p))
        return self.mu[a]

    @cached_property
    def mu_avg(self):
        avg = self.mu.reshape(-1, self.ell).mean(axis=0)
        avg.flags.writeable = False
        return avg

    @cached_property
    def centered(self):
        centered = self.mu - self.mu_avg
        centered.flags.writeable = False
        return centered

    @cached_property
    def gram(self):
        """k^p x k^p matrix of sum_y mu_bar_a(y) mu_bar_b(y) / mu_avg(y)."""
        flat = self.centered.reshape(-1, self.ell) / np.sqrt(self.mu_avg)
        gram = flat @ flat.T
        gram.flags.writeable = False
        return gram

    def to_spec(self):
        return {
            'p': self.p,
            'k': self.k,
            'ell': self.ell,
            'mu': {','.join(map(str, a)): self.mu[a].tolist() for a in self.labels()},
        }

    def allclose(self, other, atol=1e-12):
        return self.mu.shape == other.mu.shape and np.allclose(self.mu, other.mu, rtol=0, atol=atol)

    def __repr__(self):
        return '<ChannelFamily %s p=%d k=%d ell=%d>' % (self.name or '', self.p, self.k, self.ell)


class ModelAudit(typing.NamedTuple):
    nontrivial: bool
    weakly_symmetric: bool
    strongly_symmetric: bool
    max_symmetry_defect: float
    strong_symmetry_defect: float
    # regularity is automatic for non-degenerate discrete families
    regular: bool = True


def average_channel(fam):
    return fam.mu_avg


def centered_channel(fam, a):
    fam.channel(a)
    return fam.centered[tuple(a)]


def audit(fam, tol=None):
    if tol is None:
        tol = conf.setting('sym_tol')
    if tol <= 0:
        raise ConfigError('audit tolerance must be positive, got %r' % tol)
    p, k = fam.p, fam.k

    cost = k ** (2 * p) * math.factorial(p)
    if cost > conf.setting('audit_budget'):
        logger.warning('symmetry audit of %r costs %d entry comparisons (budget %d)',
                       fam, cost, conf.setting('audit_budget'))

    nontrivial = bool(np.abs(fam.centered).max() > tol)
    gram = fam.gram.reshape((k,) * (2 * p))
    weak_defect = strong_defect = 0.0
    for sigma in itertools.permutations(range(p)):
        axes = list(sigma) + [p + s for s in sigma]
        weak_defect = max(weak_defect, float(np.abs(gram - gram.transpose(axes)).max()))
        strong_defect = max(strong_defect, float(np.abs(fam.mu - fam.mu.transpose(list(sigma) + [p])).max()))

    strongly = strong_defect <= tol
    return ModelAudit(
        nontrivial=nontrivial,
        weakly_symmetric=strongly or weak_defect <= tol,
        strongly_symmetric=strongly,
        max_symmetry_defect=weak_defect,
        strong_symmetry_defect=strong_defect,
    )


def _check_eta(eta):
    if not 0 <= eta <= 1:
        raise ConfigError('eta must lie in [0, 1], got %r' % eta)
    return float(eta)


def resample(fam, eta):
    eta = _check_eta(eta)
    mu = (1 - eta) * fam.mu + eta * fam.mu_avg
    return fam.clone(mu, name='resample(%s, %g)' % (fam.name, eta))


def censor(fam, eta):
    eta = _check_eta(eta)
    if eta == 0:
        return fam
    name = 'censor(%s, %g)' % (fam.name, eta)
    if eta == 1:
        return fam.clone(np.ones(fam.mu.shape[:-1] + (1,)), name=name)
    erased = np.full(fam.mu.shape[:-1] + (1,), eta)
    return fam.clone(np.concatenate([(1 - eta) * fam.mu, erased], axis=-1), name=name)


def marginal_family(fam, j):
    """Order-j marginal model: average the channels over the last p - j labels."""
    if not 2 <= j <= fam.p:
        raise ConfigError('marginal order j must satisfy 2 <= j <= p=%d, got %r' % (fam.p, j))
    if j == fam.p:
        return fam
    mu = fam.mu.mean(axis=tuple(range(j, fam.p)))
    return fam.clone(mu, name='marginal(%s, %d)' % (fam.name, j))

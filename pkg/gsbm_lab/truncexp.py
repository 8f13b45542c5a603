"""Truncated exponential exp^{<=D}(t) = sum_{d<=D} t^d / d! and related bounds."""
import logging
import math

import numpy as np
from scipy.special import gammaln

from gsbm_lab.exceptions import ConfigError

logger = logging.getLogger(__name__)


def _check_degree(D):
    if int(D) != D or D < 0:
        raise ConfigError('degree D must be a nonnegative integer, got %r' % D)
    return int(D)


def exp_truncated(t, D):
    """
    Partial sum of the exponential series, by term recurrence.

    Scalars are summed with math.fsum; arrays elementwise with pairwise
    summation. Overflow gives an infinity carrying the sign of the top term.
    """
    D = _check_degree(D)
    if np.ndim(t) == 0:
        t = float(t)
        terms, term = [1.0], 1.0
        for d in range(1, D + 1):
            term *= t / d
            terms.append(term)
        if all(map(math.isfinite, terms)):
            return math.fsum(terms)
        logger.warning('exp_truncated(%g, %d) overflows', t, D)
        return math.inf if t >= 0 else (-1.0) ** D * math.inf

    t = np.asarray(t, dtype=float)
    with np.errstate(over='ignore', invalid='ignore'):
        terms = np.empty((D + 1,) + t.shape)
        terms[0] = 1.0
        for d in range(1, D + 1):
            terms[d] = terms[d - 1] * t / d
        total = terms.sum(axis=0)
    if not (bad := ~np.isfinite(total)).any():
        return total
    logger.warning('exp_truncated overflows at %d of %d points (D=%d)', int(bad.sum()), bad.size, D)
    top_sign = np.where(t >= 0, 1.0, (-1.0) ** D)
    return np.where(bad, top_sign * np.inf, total)


def exp_truncated_envelope(t, D):
    """2 * max(2D, |t|)^D / D!, which dominates exp^{<=D}(|t|) for D >= 1."""
    D = _check_degree(D)
    base = np.maximum(2 * D, np.abs(t))
    if D == 0:
        return 2.0 * np.ones_like(base) if np.ndim(base) else 2.0
    with np.errstate(divide='ignore'):
        out = np.exp(math.log(2) + D * np.log(base) - gammaln(D + 1))
    return float(out) if np.ndim(out) == 0 else out


def factorial_floor_gap(d):
    """log d! - d log(d/e); nonnegative for every d >= 1."""
    if int(d) != d or d < 1:
        raise ConfigError('d must be a positive integer, got %r' % d)
    return float(gammaln(d + 1) - d * (math.log(d) - 1))

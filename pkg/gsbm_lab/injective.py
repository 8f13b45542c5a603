"""
Injective norm max_{|v|=1} |<T, v^m>| of a symmetric tensor.

Order <= 2 and rank-one tensors are solved exactly; anything else goes to a
shifted symmetric higher-order power method with random restarts on +T and
-T, which only ever certifies a lower bound.
"""
import logging
import typing

import numpy as np

from gsbm_lab import conf
from gsbm_lab.futures import pmap

logger = logging.getLogger(__name__)

EXACT_SPECTRAL = 'exact-spectral'
POWER_MULTISTART = 'power-multistart'
RANK_ONE_EXACT = 'rank-one-exact'

RANK_ONE_TOL = 1e-10


class InjectiveNorm(typing.NamedTuple):
    value: float
    witness: np.ndarray
    method: str
    converged: bool = True
    lower_bound_only: bool = False
    # <T, witness^m>, whose absolute value is ``value``
    signed_value: float = 0.0

    @property
    def exact(self):
        return not self.lower_bound_only


def _unit(dim):
    e = np.zeros(dim)
    e[0] = 1.0
    return e


def _rank_one(T):
    """(c, u) with T = c u^m and |u| = 1, or None."""
    m, d = T.order, T.dim
    unfolding = T.entries.reshape(d, -1)
    u, s, _ = np.linalg.svd(unfolding, full_matrices=False)
    if len(s) > 1 and s[1] > RANK_ONE_TOL * s[0]:
        return None
    w = u[:, 0]
    c = float(T.contract(w))
    if c < 0 and m % 2:
        w, c = -w, -c
    residual = np.linalg.norm(T.entries - c * _outer_power(w, m))
    if residual > RANK_ONE_TOL * max(np.linalg.norm(T.entries), 1e-300):
        return None
    return c, w


def _outer_power(w, m):
    entries = np.array(1.0)
    for _ in range(m):
        entries = np.multiply.outer(entries, w)
    return entries


def _power_method(entries, x, shift, iters, tol):
    """Maximize <S, x^m> over the sphere; monotone because of the convex shift."""
    m = entries.ndim

    def value(x):
        out = entries
        for _ in range(m):
            out = out @ x
        return float(out)

    lam = value(x)
    for _ in range(iters):
        g = entries
        for _ in range(m - 1):
            g = g @ x
        g = g + shift * x
        x = g / np.linalg.norm(g)
        new = value(x)
        if abs(new - lam) < tol:
            return new, x, True
        lam = new
    return lam, x, False


def injective_norm(T, restarts=None, iters=None, seed=0, tol=None):
    m, d = T.order, T.dim
    if m == 0:
        c = float(T.entries)
        return InjectiveNorm(abs(c), np.zeros(0), RANK_ONE_EXACT, signed_value=c)
    if T.max_abs() == 0:
        return InjectiveNorm(0.0, _unit(d), RANK_ONE_EXACT)
    if m == 1:
        norm = float(np.linalg.norm(T.entries))
        return InjectiveNorm(norm, T.entries / norm, RANK_ONE_EXACT, signed_value=norm)
    if m == 2:
        eigvals, eigvecs = np.linalg.eigh(T.entries)
        i = int(np.argmax(np.abs(eigvals)))
        return InjectiveNorm(float(abs(eigvals[i])), eigvecs[:, i], EXACT_SPECTRAL, signed_value=float(eigvals[i]))
    if (found := _rank_one(T)) is not None:
        c, w = found
        return InjectiveNorm(abs(c), w, RANK_ONE_EXACT, signed_value=c)

    restarts = conf.setting('restarts') if restarts is None else restarts
    iters = conf.setting('iters') if iters is None else iters
    tol = conf.setting('power_tol') if tol is None else tol

    rng = np.random.Generator(np.random.Philox(seed))
    starts = rng.standard_normal((restarts, d))
    starts /= np.linalg.norm(starts, axis=1, keepdims=True)
    # iterate on T / |T|_F so the stopping tolerance is relative to the tensor scale
    scale = float(np.linalg.norm(T.entries))
    unit = T.entries / scale
    # the leading left singular vector of the unfolding is a good deterministic start
    starts = np.vstack([np.linalg.svd(unit.reshape(d, -1), full_matrices=False)[0][:, 0], starts])
    shift = float(m - 1)

    def run(job):
        sign, x0 = job
        lam, x, converged = _power_method(sign * unit, x0, shift, iters, tol)
        return lam, sign, x, converged

    results = pmap(run, [(sign, x0) for sign in (1.0, -1.0) for x0 in starts])
    lam, sign, x, converged = max(results, key=lambda r: r[0])
    lam *= scale
    if not converged:
        logger.warning('power method did not converge in %d iterations (best %.6g)', iters, lam)
    logger.debug('power method: %d runs, best %.12g (sign %+d)', len(results), lam, sign)
    return InjectiveNorm(
        value=lam,
        witness=x,
        method=POWER_MULTISTART,
        converged=converged,
        lower_bound_only=True,
        signed_value=sign * lam,
    )

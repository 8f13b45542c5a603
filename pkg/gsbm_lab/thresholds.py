"""Hardness conditions on marginal tensors and the Kesten-Stigum eigenvalue tests."""
import logging
import typing

import numpy as np

from gsbm_lab.builders import check_interaction, row_constant
from gsbm_lab.exceptions import ConfigError, UnsupportedRegime

logger = logging.getLogger(__name__)


class ThresholdVerdict(typing.NamedTuple):
    condition_name: str
    lhs: float
    rhs: float
    satisfied: bool
    margin: float
    note: str = ''
    parts: tuple = ()

    @property
    def all_satisfied(self):
        return self.satisfied and all(part.all_satisfied for part in self.parts)

    def as_dict(self):
        data = self._asdict()
        data['parts'] = [part.as_dict() for part in self.parts]
        data['all_satisfied'] = self.all_satisfied
        return data


def verdict(name, lhs, rhs, note='', parts=()):
    lhs, rhs = float(lhs), float(rhs)
    return ThresholdVerdict(name, lhs, rhs, lhs < rhs, rhs - lhs, note, tuple(parts))


def _norm_note(profile, js):
    if any(profile.norm(j).lower_bound_only for j in js):
        return 'order >= 3 injective norms are power-method lower bounds'
    return ''


def check_theorem_p3(profile, n, D, c=1.0):
    """max_{p* <= j <= p} |T^(j)|_inj < c n^{-(2p - p*)/2} D^{-(p* - 2)/2}."""
    p_star, p = profile.marginal_order, profile.p
    if p_star is None or p_star < 2:
        raise UnsupportedRegime('the marginal-order condition needs p* >= 2, got %s'
                                % ('trivial' if p_star is None else p_star))
    if D < 1 or D > c * n:
        raise ConfigError('the marginal-order condition needs 1 <= D <= c n, got D=%r, c n=%g' % (D, c * n))
    js = range(p_star, p + 1)
    lhs = max(profile.norm(j).value for j in js)
    rhs = c * n ** (-(2 * p - p_star) / 2) * D ** (-(p_star - 2) / 2)
    note = '; '.join(filter(None, ['relative to the supplied constant c=%g' % c, _norm_note(profile, js)]))
    return verdict('marginal-order-p*', lhs, rhs, note=note)


def check_theorem_p2(profile, n, epsilon=0.01, C=1.0):
    """
    Sharp condition |T^(2)| < (1 - eps) k^2 / (p(p-1)) n^{-(p-1)}, plus the
    crude condition |T^(j)|_inj < C n^{-(p-1)} for 3 <= j <= p in ``parts``.
    """
    if profile.marginal_order != 2:
        raise UnsupportedRegime('the marginal-order-2 condition needs p* = 2, got %s'
                                % ('trivial' if profile.trivial else profile.marginal_order))
    if not 0 <= epsilon < 1:
        raise ConfigError('epsilon must lie in [0, 1), got %r' % epsilon)
    p, k = profile.p, profile.k
    norm2 = profile.norm(2).value
    scale = p * (p - 1) / k ** 2 * n ** (p - 1)
    parts = [verdict('leading-order', norm2 * scale, 1 - epsilon)]
    parts += [verdict('crude-order-%d' % j, profile.norm(j).value, C / n ** (p - 1), note=_norm_note(profile, [j]))
              for j in range(3, p + 1)]
    return verdict('marginal-order-2', norm2, (1 - epsilon) / scale, parts=parts,
                   note='finite-n verdict; the condition is asymptotic in n')


def _spectral_verdict(name, M, lam1, factor):
    eigvals = np.linalg.eigvalsh(M)
    others = np.delete(eigvals, int(np.argmin(np.abs(eigvals - lam1))))
    lhs = float(np.max(others ** 2)) if len(others) else 0.0
    return verdict(name, lhs, factor * lam1)


def ks_threshold_sbm(Q):
    """max_{j >= 2} |lambda_j(Q)|^2 < k lambda_1(Q)."""
    Q = check_interaction(Q, p=2)
    return _spectral_verdict('kesten-stigum', Q, row_constant(Q), Q.shape[0])


def ks_threshold_hsbm(Q):
    """The Kesten-Stigum test on Q[1,...,1,.,.] with factor k^{p-1}/(p-1)."""
    Q = check_interaction(Q)
    p, k = Q.ndim, Q.shape[0]
    M = Q.reshape(-1, k, k).sum(axis=0)
    return _spectral_verdict('hypergraph-kesten-stigum', M, row_constant(Q), k ** (p - 1) / (p - 1))

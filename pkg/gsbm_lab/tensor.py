import itertools
import logging
import math
import typing

import numpy as np

from gsbm_lab import conf
from gsbm_lab.exceptions import ConfigError, GSBMError

logger = logging.getLogger(__name__)


class SymTensor:
    """Dense order-m tensor over R^dim. Order 0 holds a scalar."""

    def __init__(self, entries, dim=None, asymmetry=0.0):
        entries = np.array(entries, dtype=float)
        if entries.ndim:
            dim = entries.shape[0]
            if any(size != dim for size in entries.shape):
                raise ConfigError('tensor must be cubical, got shape %s' % (entries.shape,))
        elif dim is None:
            dim = 1
        entries.flags.writeable = False
        self.entries = entries
        self.dim = int(dim)
        self.asymmetry = float(asymmetry)

    @property
    def order(self):
        return self.entries.ndim

    @classmethod
    def rank_one(cls, w, m, c=1.0):
        w = np.asarray(w, dtype=float)
        entries = np.array(c)
        for _ in range(m):
            entries = np.multiply.outer(entries, w)
        return cls(entries, dim=len(w))

    def max_abs(self):
        return float(np.abs(self.entries).max()) if self.entries.size else 0.0

    def symmetry_defect(self):
        return max((float(np.abs(self.entries - self.entries.transpose(sigma)).max())
                    for sigma in itertools.permutations(range(self.order))), default=0.0)

    def symmetrized(self):
        if self.order < 2:
            return self
        perms = list(itertools.permutations(range(self.order)))
        entries = sum(self.entries.transpose(sigma) for sigma in perms) / len(perms)
        return SymTensor(entries, dim=self.dim, asymmetry=self.symmetry_defect())

    def contract(self, x, times=None):
        """Contract the trailing ``times`` axes with the same vector x (all by default)."""
        entries = self.entries
        for _ in range(self.order if times is None else times):
            entries = entries @ x
        return entries

    def to_json(self):
        return {'order': self.order, 'dim': self.dim, 'entries': self.entries.ravel().tolist()}

    @classmethod
    def from_json(cls, data):
        order, dim = int(data['order']), int(data['dim'])
        entries = np.asarray(data['entries'], dtype=float)
        if entries.size != dim ** order:
            raise ConfigError('tensor dump has %d entries, expected %d^%d' % (entries.size, dim, order))
        return cls(entries.reshape((dim,) * order), dim=dim)

    def __repr__(self):
        return '<SymTensor order=%d dim=%d>' % (self.order, self.dim)


def characteristic_tensor(fam):
    """
    T[(a1,b1),...,(ap,bp)] = (1/p!) sum_y mu_bar_a(y) mu_bar_b(y) / mu_avg(y),
    with the pair (a_i, b_i) flattened to a_i * k + b_i.
    """
    p, k = fam.p, fam.k
    W = (fam.gram / math.factorial(p)).reshape((k,) * (2 * p))
    interleaved = [axis for i in range(p) for axis in (i, p + i)]
    tensor = SymTensor(W.transpose(interleaved).reshape((k * k,) * p))
    defect = tensor.symmetry_defect()
    if defect > conf.setting('sym_tol'):
        logger.warning('%r is not weakly symmetric: characteristic tensor asymmetry %.3g, symmetrizing', fam, defect)
    return tensor.symmetrized()


def flattening_gram(T, k):
    """Inverse of the pair flattening, scaled by p!: the k^p x k^p Gram matrix."""
    p = T.order
    entries = T.entries.reshape((k,) * (2 * p))
    grouped = list(range(0, 2 * p, 2)) + list(range(1, 2 * p, 2))
    return math.factorial(p) * entries.transpose(grouped).reshape(k ** p, k ** p)


def is_psd_flattening(T, k, tol=None):
    if tol is None:
        tol = conf.setting('psd_tol')
    return bool(np.linalg.eigvalsh(flattening_gram(T, k)).min() >= -tol)


def partial_contract(T, vs):
    vs = [np.asarray(v, dtype=float) for v in vs]
    if not 1 <= len(vs) <= T.order:
        raise ConfigError('can contract 1..%d vectors into an order-%d tensor, got %d' % (T.order, T.order, len(vs)))
    for v in vs:
        if v.shape != (T.dim,):
            raise ConfigError('contraction vector has shape %s, expected (%d,)' % (v.shape, T.dim))
    entries = T.entries
    for v in vs:
        entries = np.tensordot(v, entries, axes=(0, 0))
    return SymTensor(entries, dim=T.dim)


class MarginalProfile(typing.NamedTuple):
    """T^(p), ..., T^(1) with their injective norms; marginal_order None means trivial."""
    tensors: list
    inj_norms: list
    marginal_order: typing.Optional[int]
    zero_tol: float
    k: int

    @property
    def p(self):
        return len(self.tensors)

    @property
    def trivial(self):
        return self.marginal_order is None

    def tensor(self, j):
        return self.tensors[self.p - j]

    def norm(self, j):
        return self.inj_norms[self.p - j]

    @property
    def exact(self):
        return all(norm.exact for norm in self.inj_norms)

    def as_dict(self):
        return {
            'p': self.p,
            'k': self.k,
            'marginal_order': 'trivial' if self.trivial else self.marginal_order,
            'zero_tol': self.zero_tol,
            'orders': [
                {
                    'j': self.p - i,
                    'max_abs': tensor.max_abs(),
                    'inj_norm': norm.value,
                    'method': norm.method,
                    'converged': norm.converged,
                    'lower_bound_only': norm.lower_bound_only,
                }
                for i, (tensor, norm) in enumerate(zip(self.tensors, self.inj_norms))
            ],
        }


def profile_from_tensor(T, k, zero_tol=None, norm_opts=None):
    from gsbm_lab.injective import injective_norm
    from gsbm_lab.futures import pmap

    if zero_tol is None:
        zero_tol = conf.setting('zero_tol')
    if zero_tol <= 0:
        raise ConfigError('zero_tol must be positive, got %r' % zero_tol)
    ones = np.full(T.dim, 1.0 / (k * k))
    tensors = [T]
    while tensors[-1].order > 1:
        tensors.append(partial_contract(tensors[-1], [ones]))

    scale = max(1.0, T.max_abs())
    if abs(total := float(partial_contract(tensors[-1], [ones]).entries)) > zero_tol * scale:
        raise GSBMError('full contraction of the characteristic tensor is %.3g, expected 0' % total)

    marginal_order = next((t.order for t in reversed(tensors) if t.max_abs() > zero_tol), None)
    norms = pmap(lambda t: injective_norm(t, **(norm_opts or {})), tensors)
    logger.debug('marginal profile: orders %s, p* = %s', [t.max_abs() for t in tensors], marginal_order)
    return MarginalProfile(tensors=tensors, inj_norms=norms, marginal_order=marginal_order, zero_tol=zero_tol, k=k)


def marginal_profile(fam, zero_tol=None, norm_opts=None):
    return profile_from_tensor(characteristic_tensor(fam), fam.k, zero_tol=zero_tol, norm_opts=norm_opts)

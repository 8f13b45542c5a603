"""Named models and the JSON model-spec format."""
import itertools
import json
import logging
import math
import os

import numpy as np

from gsbm_lab.exceptions import ConfigError
from gsbm_lab.groups import groups
from gsbm_lab.model import ChannelFamily, censor, resample

logger = logging.getLogger(__name__)

EIGEN_TOL = 1e-10

XOR_PLUS, XOR_MINUS, XOR_ERASED = 0, 1, 2


def symmetric_interaction(p, k, alpha, beta):
    """alpha on the full diagonal a1 = ... = ap, beta elsewhere."""
    Q = np.full((k,) * p, float(beta))
    for a in range(k):
        Q[(a,) * p] = alpha
    return Q


def _check_symmetric_tensor(Q, what):
    for sigma in itertools.permutations(range(Q.ndim)):
        if not np.allclose(Q, Q.transpose(sigma), rtol=0, atol=EIGEN_TOL):
            raise ConfigError('%s is not symmetric under axis permutation %s' % (what, sigma))


def row_constant(Q):
    """lambda with Q[1,...,1,.] = lambda * 1, or None."""
    rows = Q.reshape(-1, Q.shape[-1]).sum(axis=0)
    if np.abs(rows - rows[0]).max() > EIGEN_TOL:
        return None
    return float(rows[0])


def check_interaction(Q, p=None):
    Q = np.array(Q, dtype=float)
    what = 'interaction matrix' if Q.ndim == 2 else 'interaction tensor'
    if Q.ndim < 2 or any(size != Q.shape[0] for size in Q.shape):
        raise ConfigError('%s must be a k x ... x k array, got shape %s' % (what, Q.shape))
    if p is not None and Q.ndim != p:
        raise ConfigError('%s has order %d, expected %d' % (what, Q.ndim, p))
    if (Q < 0).any() or not np.isfinite(Q).all():
        raise ConfigError('%s must have finite nonnegative entries' % what)
    _check_symmetric_tensor(Q, what)
    if row_constant(Q) is None:
        raise ConfigError('the all-ones vector is not an eigenvector of the %s; '
                          'such models have marginal order 1, build them as a raw channel table' % what)
    return Q


def build_sbm(Q, n):
    Q = check_interaction(Q, p=2)
    return build_hsbm(Q, n, name='sbm(k=%d, n=%d)' % (Q.shape[0], n))


def build_hsbm(Q, n, name=None):
    Q = check_interaction(Q)
    p = Q.ndim
    if int(n) != n or n < p:
        raise ConfigError('population size n must be an integer >= p=%d, got %r' % (p, n))
    scale = math.comb(int(n), p - 1)
    edge = Q / scale
    if edge.max() > 1:
        raise ConfigError('interaction entry %g exceeds C(n, p-1) = %d' % (Q.max(), scale))
    mu = np.stack([edge, 1 - edge], axis=-1)
    return ChannelFamily(mu, name=name or 'hsbm(p=%d, k=%d, n=%d)' % (p, Q.shape[0], n))


def build_truth_or_haar(G, eta, mode='sync'):
    G = groups[G]
    if not 0 <= eta <= 1:
        raise ConfigError('eta must lie in [0, 1], got %r' % eta)
    if mode == 'sync':
        truth = G.cayley[:, G.inverse]        # g h^-1
    elif mode == 'sumset':
        truth = G.cayley                      # g h
    else:
        raise ConfigError('truth-or-Haar mode must be sync or sumset, got %r' % mode)
    k = G.order
    mu = np.full((k, k, k), (1 - eta) / k)
    mu += eta * (truth[..., None] == np.arange(k))
    return ChannelFamily(mu, name='toh_%s(%s, eta=%g)' % (mode, G.name, eta))


def build_xor_sat(p, eta):
    """
    Labels 0/1 stand for +1/-1; symbols are (+1, -1, erased). With
    probability eta the product of the labels is revealed, else erased.
    """
    if int(p) != p or p < 2:
        raise ConfigError('XOR-SAT arity p must be an integer >= 2, got %r' % p)
    if not 0 <= eta <= 1:
        raise ConfigError('eta must lie in [0, 1], got %r' % eta)
    p = int(p)
    parity = np.indices((2,) * p).sum(axis=0) % 2
    mu = np.zeros((2,) * p + (3,))
    mu[..., XOR_PLUS] = eta * (parity == 0)
    mu[..., XOR_MINUS] = eta * (parity == 1)
    mu[..., XOR_ERASED] = 1 - eta
    return ChannelFamily(mu, name='xor(p=%d, eta=%g)' % (p, eta))


def trivial_family(p, k, ell):
    return ChannelFamily(np.full((k,) * p + (ell,), 1 / ell), name='trivial(p=%d, k=%d, ell=%d)' % (p, k, ell))


def _require(spec, *keys):
    missing = [key for key in keys if key not in spec]
    if missing:
        raise ConfigError('model spec %r misses %s' % (spec.get('model', 'table'), ', '.join(missing)))
    return [spec[key] for key in keys]


def _eta(spec, n):
    if 'eta' in spec:
        return float(spec['eta'])
    if 'gamma' in spec:
        if not n:
            raise ConfigError('gamma given without a population size n')
        return float(spec['gamma']) / math.sqrt(n)
    raise ConfigError('model spec %r needs eta or gamma' % spec.get('model'))


def _base_family(spec, n):
    model = spec.get('model')
    if model is None:
        p, k, ell, table = _require(spec, 'p', 'k', 'ell', 'mu')
        try:
            table = {tuple(int(x) for x in key.split(',')): value for key, value in table.items()}
        except (AttributeError, ValueError):
            raise ConfigError('channel keys must look like "a1,a2,...,ap"')
        return ChannelFamily.from_table(int(p), int(k), int(ell), table)
    if model == 'sbm':
        if 'Q' in spec:
            Q = spec['Q']
        else:
            k, alpha, beta = _require(spec, 'k', 'alpha', 'beta')
            Q = symmetric_interaction(2, int(k), alpha, beta)
        return build_sbm(Q, _population(spec, n))
    if model == 'hsbm':
        if 'Q' in spec:
            Q = spec['Q']
        else:
            p, k, alpha, beta = _require(spec, 'p', 'k', 'alpha', 'beta')
            Q = symmetric_interaction(int(p), int(k), alpha, beta)
        return build_hsbm(Q, _population(spec, n))
    if model in ('toh_sync', 'toh_sumset'):
        group, = _require(spec, 'group')
        return build_truth_or_haar(group, _eta(spec, _population(spec, n, required=False)), mode=model[4:])
    if model == 'xor':
        p, = _require(spec, 'p')
        return build_xor_sat(int(p), _eta(spec, _population(spec, n, required=False)))
    if model == 'trivial':
        p, k, ell = _require(spec, 'p', 'k', 'ell')
        return trivial_family(int(p), int(k), int(ell))
    raise ConfigError('unknown model %r' % model)


def _population(spec, n, required=True):
    if n is not None and 'n' in spec and int(spec['n']) != int(n):
        raise ConfigError('model spec fixes n=%d but n=%d was requested' % (int(spec['n']), int(n)))
    value = spec.get('n') if n is None else n
    if value is None and required:
        raise ConfigError('model %r needs a population size n' % spec.get('model'))
    return None if value is None else int(value)


def family_from_spec(spec, n=None):
    """
    Build a family from a decoded model spec. ``resample`` and ``censor`` keys
    are applied after the base model, in the order they appear.
    """
    if not isinstance(spec, dict):
        raise ConfigError('model spec must be a JSON object, got %s' % type(spec).__name__)
    fam = _base_family(spec, n)
    for key, value in spec.items():
        if key == 'resample':
            fam = resample(fam, float(value))
        elif key == 'censor':
            fam = censor(fam, float(value))
    return fam


SHORTHAND_INTS = {'k', 'p', 'n', 'ell'}


def parse_shorthand(text):
    """``name:key=value,...`` -> model spec dict, e.g. ``sbm:k=2,alpha=3,beta=1``."""
    name, _, rest = text.partition(':')
    spec = {'model': name.strip()}
    for item in filter(None, (part.strip() for part in rest.split(','))):
        key, sep, value = item.partition('=')
        if not sep:
            raise ConfigError('shorthand item %r is not key=value' % item)
        key = key.strip()
        if key == 'group':
            spec[key] = value.strip()
        else:
            try:
                spec[key] = int(value) if key in SHORTHAND_INTS else float(value)
            except ValueError:
                raise ConfigError('shorthand value %s=%r is not a number' % (key, value))
    return spec


def load_spec(source):
    """A path to a JSON file, an inline JSON object, or a shorthand."""
    if isinstance(source, dict):
        return dict(source)
    source = source.strip()
    if source.startswith('{'):
        try:
            return json.loads(source)
        except json.JSONDecodeError as ex:
            raise ConfigError('invalid inline model JSON: %s' % ex)
    if os.path.exists(source):
        try:
            with open(source) as fp:
                return json.load(fp)
        except json.JSONDecodeError as ex:
            raise ConfigError('invalid model file %s: %s' % (source, ex))
    if source.endswith('.json'):
        raise ConfigError('model file %s does not exist' % source)
    return parse_shorthand(source)

import itertools
import logging
import re
from functools import cached_property

import numpy as np

from gsbm_lab.exceptions import ConfigError

logger = logging.getLogger(__name__)

ASSOCIATIVITY_CHECK_MAX = 64


class FiniteGroup:
    """Group given by its Cayley table over element indices 0..k-1."""

    def __init__(self, cayley, name=None, elements=None):
        cayley = np.array(cayley, dtype=np.intp)
        if cayley.ndim != 2 or cayley.shape[0] != cayley.shape[1]:
            raise ConfigError('Cayley table must be square, got shape %s' % (cayley.shape,))
        k = cayley.shape[0]
        if k < 2:
            raise ConfigError('group order must be >= 2, got %d' % k)
        span = np.arange(k)
        if not (np.sort(cayley, axis=0) == span[:, None]).all() or not (np.sort(cayley, axis=1) == span).all():
            raise ConfigError('Cayley table of %s is not a Latin square' % (name or 'group'))

        identities = [e for e in range(k) if (cayley[e] == span).all() and (cayley[:, e] == span).all()]
        if not identities:
            raise ConfigError('Cayley table of %s has no identity element' % (name or 'group'))

        if k <= ASSOCIATIVITY_CHECK_MAX:
            left = cayley[cayley, :]                       # (ab)c
            right = cayley[span[:, None, None], cayley[None, :, :]]  # a(bc)
            if (left != right).any():
                a, b, c = np.argwhere(left != right)[0]
                raise ConfigError('Cayley table of %s is not associative at (%d, %d, %d)' % (name or 'group', a, b, c))
        else:
            logger.info('skipping associativity check for group of order %d', k)

        self.cayley = cayley
        self.cayley.flags.writeable = False
        self.order = k
        self.identity = identities[0]
        self.inverse = np.argmax(cayley == self.identity, axis=1)
        self.inverse.flags.writeable = False
        self.name = name or 'G%d' % k
        self.elements = list(elements) if elements is not None else [str(g) for g in range(k)]

    @classmethod
    def from_cayley(cls, cayley, name=None):
        return cls(cayley, name=name)

    def mul(self, g, h):
        return int(self.cayley[g, h])

    def inv(self, g):
        return int(self.inverse[g])

    @cached_property
    def element_orders(self):
        orders = []
        for g in range(self.order):
            x, m = g, 1
            while x != self.identity:
                x, m = self.cayley[x, g], m + 1
            orders.append(m)
        return orders

    @cached_property
    def is_abelian(self):
        return bool((self.cayley == self.cayley.T).all())

    def __repr__(self):
        return '<FiniteGroup %s of order %d>' % (self.name, self.order)


def cyclic(k):
    span = np.arange(k)
    return FiniteGroup((span[:, None] + span[None, :]) % k, name='Z%d' % k)


def symmetric3():
    perms = list(itertools.permutations(range(3)))
    index = {perm: i for i, perm in enumerate(perms)}
    # (g h)(i) = g(h(i))
    cayley = [[index[tuple(g[h[i]] for i in range(3))] for h in perms] for g in perms]
    return FiniteGroup(cayley, name='S3', elements=[''.join(map(str, perm)) for perm in perms])


def klein():
    span = np.arange(4)
    return FiniteGroup(span[:, None] ^ span[None, :], name='Z2xZ2')


class Groups:
    """Registry resolving group names ("Z4", "S3", "Z2xZ2") or {"cayley": ...} specs."""

    builtins = {
        'S3': symmetric3,
        'Z2xZ2': klein,
    }

    def __getitem__(self, item):
        if isinstance(item, FiniteGroup):
            return item
        if isinstance(item, dict):
            if 'cayley' not in item:
                raise ConfigError('group spec needs a "cayley" table, got keys %s' % sorted(item))
            return FiniteGroup.from_cayley(item['cayley'], name=item.get('name'))
        if not isinstance(item, str):
            raise ConfigError('cannot resolve group from %r' % (item,))
        if factory := self.builtins.get(item):
            return factory()
        if m := re.fullmatch(r'Z(\d+)', item):
            return cyclic(int(m.group(1)))
        raise ConfigError('unknown group %r (use Z<k>, S3, Z2xZ2 or a Cayley table)' % item)


groups = Groups()

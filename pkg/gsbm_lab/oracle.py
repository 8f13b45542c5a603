"""
Brute-force coordinate advantage on tiny instances.

Everything here works from the channel table alone: the likelihood ratio is
summed over every labelling, the low-degree projection comes from the
Efron-Stein decomposition, and the overlaps are summed over index tuples.
"""
import functools
import itertools
import logging
import math
import typing
from functools import cached_property

import numpy as np

from gsbm_lab import conf
from gsbm_lab.bounds import bound_corollary, bound_exact
from gsbm_lab.exceptions import BudgetExceeded, ConfigError, UnsupportedRegime, VerificationFailure
from gsbm_lab.model import audit
from gsbm_lab.tensor import characteristic_tensor, profile_from_tensor
from gsbm_lab.truncexp import exp_truncated

logger = logging.getLogger(__name__)


class TinyInstance:
    """A family at population size n small enough to enumerate every observation."""

    def __init__(self, fam, n, state_budget=None):
        if int(n) != n or n < fam.p:
            raise ConfigError('population size must be an integer >= p=%d, got %r' % (fam.p, n))
        self.fam = fam
        self.n = int(n)
        self.N = math.comb(self.n, fam.p)
        self.state_budget = conf.setting('state_budget') if state_budget is None else state_budget
        if fam.ell ** self.N > self.state_budget:
            raise BudgetExceeded('%d^%d observation states exceed the budget %d' % (fam.ell, self.N, self.state_budget))
        if fam.k ** (2 * self.n) > self.state_budget:
            raise BudgetExceeded('%d^%d label pairs exceed the budget %d' % (fam.k, 2 * self.n, self.state_budget))

    @cached_property
    def subsets(self):
        """p-subsets of [n] in lexicographic order."""
        return list(itertools.combinations(range(self.n), self.fam.p))

    @cached_property
    def labellings(self):
        return np.array(list(itertools.product(range(self.fam.k), repeat=self.n)), dtype=np.intp).reshape(-1, self.n)

    @cached_property
    def ratios(self):
        """mu_a(y) / mu_avg(y), shape (k,)*p + (ell,)."""
        return self.fam.mu / self.fam.mu_avg

    @cached_property
    def null_weights(self):
        """Q-probability of every observation state, shape (ell,)*N."""
        return functools.reduce(np.multiply.outer, [self.fam.mu_avg] * self.N, np.array(1.0))

    @cached_property
    def likelihood_table(self):
        """dP/dQ on every state, labellings enumerated outermost."""
        total = np.zeros((self.fam.ell,) * self.N)
        for x in self.labellings:
            factors = [self.ratios[tuple(x[list(S)])] for S in self.subsets]
            total += functools.reduce(np.multiply.outer, factors, np.array(1.0))
        return total / len(self.labellings)

    @cached_property
    def conditionals(self):
        """E_Q[L | y_S] for every subset S of coordinates, as arrays over the axes of S."""
        N, avg = self.N, self.fam.mu_avg
        full = tuple(range(N))
        tables = {full: self.likelihood_table}
        for size in range(N - 1, -1, -1):
            for S in itertools.combinations(range(N), size):
                parent = next(i for i in range(N) if i not in S)
                bigger = tuple(sorted(S + (parent,)))
                tables[S] = np.tensordot(tables[bigger], avg, axes=([bigger.index(parent)], [0]))
        return tables

    @cached_property
    def components(self):
        """Efron-Stein component f_U for every coordinate subset U, over the axes of U."""
        out = {}
        for size in range(self.N + 1):
            for U in itertools.combinations(range(self.N), size):
                f = np.zeros((self.fam.ell,) * size)
                for s in range(size + 1):
                    for S in itertools.combinations(U, s):
                        missing = tuple(i for i, u in enumerate(U) if u not in S)
                        f = f + (-1) ** (size - s) * np.expand_dims(self.conditionals[S], missing)
                out[U] = f
        return out

    def _weights(self, U):
        return functools.reduce(np.multiply.outer, [self.fam.mu_avg] * len(U), np.array(1.0))

    @cached_property
    def energies(self):
        """E_Q f_U^2 for every U."""
        return {U: float((f ** 2 * self._weights(U)).sum()) for U, f in self.components.items()}

    @cached_property
    def overlap_gram(self):
        return self.fam.gram

    def label_index(self, x):
        return int(np.ravel_multi_index(tuple(x), (self.fam.k,) * self.fam.p))


def likelihood_ratio(inst, y):
    """dP/dQ at one observation tuple y, with the observation fixed and labellings summed."""
    y = tuple(int(v) for v in y)
    if len(y) != inst.N or not all(0 <= v < inst.fam.ell for v in y):
        raise ConfigError('observation must be a tuple of %d symbols in [%d]' % (inst.N, inst.fam.ell))
    X = inst.labellings
    product = np.ones(len(X))
    for S, symbol in zip(inst.subsets, y):
        product *= inst.ratios[tuple(X[:, list(S)].T) + (symbol,)]
    return math.fsum(product) / len(X)


def efron_stein_components(inst):
    return inst.components


def component_inner(inst, U, V):
    """E_Q[f_U f_V]."""
    W = tuple(sorted(set(U) | set(V)))

    def embed(A):
        return np.expand_dims(inst.components[A], tuple(i for i, w in enumerate(W) if w not in A))

    return float((embed(tuple(U)) * embed(tuple(V)) * inst._weights(W)).sum())


def cadv_exact(inst, D):
    if int(D) != D or D < 0:
        raise ConfigError('degree D must be a nonnegative integer, got %r' % D)
    return math.sqrt(math.fsum(energy for U, energy in inst.energies.items() if len(U) <= D))


def overlap_R(inst, x1, x2, distinct_only=True):
    """
    Sum of channel overlaps R(x1_S, x2_S): over increasing index tuples, or
    over all tuples (repeats included) divided by p!.
    """
    fam = inst.fam
    x1, x2 = np.asarray(x1), np.asarray(x2)
    if x1.shape != (inst.n,) or x2.shape != (inst.n,) or ((x1 < 0) | (x1 >= fam.k) | (x2 < 0) | (x2 >= fam.k)).any():
        raise ConfigError('labellings must be length-%d vectors over [%d]' % (inst.n, fam.k))
    if distinct_only:
        tuples = itertools.combinations(range(inst.n), fam.p)
        scale = 1.0
    else:
        tuples = itertools.product(range(inst.n), repeat=fam.p)
        scale = 1.0 / math.factorial(fam.p)
    gram = inst.overlap_gram
    return scale * math.fsum(gram[inst.label_index(x1[list(S)]), inst.label_index(x2[list(S)])] for S in tuples)


def overlap_matrices(inst):
    """(R, R') over all pairs of labellings, as k^n x k^n matrices."""
    fam, X = inst.fam, inst.labellings
    gram = inst.overlap_gram

    def accumulate(tuples):
        total = np.zeros((len(X), len(X)))
        for S in tuples:
            ids = np.ravel_multi_index(tuple(X[:, list(S)].T), (fam.k,) * fam.p)
            total += gram[np.ix_(ids, ids)]
        return total

    R = accumulate(itertools.combinations(range(inst.n), fam.p))
    R_all = accumulate(itertools.product(range(inst.n), repeat=fam.p)) / math.factorial(fam.p)
    return R, R_all


class ChainLink(typing.NamedTuple):
    name: str
    lhs: float
    rhs: float
    slack: float
    ok: bool
    checked: bool = True


class ChainReport(typing.NamedTuple):
    n: int
    D: int
    values: dict
    links: list

    @property
    def passed(self):
        return all(link.ok for link in self.links if link.checked)

    @property
    def violated(self):
        return [link for link in self.links if link.checked and not link.ok]

    def as_dict(self):
        return {
            'n': self.n,
            'D': self.D,
            'values': self.values,
            'links': [link._asdict() for link in self.links],
            'passed': self.passed,
        }


EQUALITY_TOL = 1e-10


def _link(name, lhs, rhs, slack_tol, equality=False, checked=True):
    slack = rhs - lhs
    scale = max(1.0, abs(rhs))
    ok = abs(slack) <= EQUALITY_TOL * scale if equality else slack >= -slack_tol * scale
    return ChainLink(name, lhs, rhs, slack, bool(ok), checked)


def verify_chain(inst, D, mutate=None, strict=True):
    """
    cadv^2 <= E exp(R) <= E exp(R') = bound_exact <= bound_corollary on one
    instance. ``mutate`` rewrites the characteristic tensor fed to bound_exact.
    """
    fam = inst.fam
    if not audit(fam).weakly_symmetric:
        raise UnsupportedRegime('the overlap bound needs a weakly symmetric family; %r is not' % fam)

    T = characteristic_tensor(fam)
    profile = profile_from_tensor(T, fam.k)
    if mutate is not None:
        T = mutate(T)

    R, R_all = overlap_matrices(inst)
    values = {
        'cadv_squared': cadv_exact(inst, D) ** 2,
        'overlap_distinct': math.fsum(exp_truncated(R, D).ravel()) / R.size,
        'overlap_all': math.fsum(exp_truncated(R_all, D).ravel()) / R_all.size,
        'bound_exact': bound_exact(fam, inst.n, D, tensor=T).value,
        'bound_corollary': bound_corollary(profile, inst.n, D, method='exact').value,
    }
    slack = conf.setting('chain_slack')
    links = [
        _link('cadv_squared <= overlap_distinct', values['cadv_squared'], values['overlap_distinct'], slack),
        _link('overlap_distinct <= overlap_all', values['overlap_distinct'], values['overlap_all'], slack),
        _link('overlap_all == bound_exact', values['overlap_all'], values['bound_exact'], slack, equality=True),
        _link('bound_exact <= bound_corollary', values['bound_exact'], values['bound_corollary'], slack,
              checked=profile.exact),
    ]
    report = ChainReport(n=inst.n, D=int(D), values=values, links=links)
    logger.info('chain %r n=%d D=%d: %s', fam, inst.n, D, 'pass' if report.passed else 'FAIL')
    if strict and (violated := report.violated):
        raise VerificationFailure('inequality chain violated at %s (slack %.3g) for %r, n=%d, D=%d'
                                  % (violated[0].name, violated[0].slack, fam, inst.n, D), link=violated[0].name)
    return report

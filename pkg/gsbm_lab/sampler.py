"""
Draw GSBM instances under the null and planted measures.

Observation S is driven by word r of a Philox stream, where r is the colex
rank of S, so the draw does not depend on how subsets are chunked.
"""
import csv
import itertools
import json
import logging
import math
import typing

import numpy as np
from scipy.stats import chisquare

from gsbm_lab import conf
from gsbm_lab.exceptions import ConfigError
from gsbm_lab.futures import pmap

logger = logging.getLogger(__name__)

# Philox emits four 64-bit words per counter step
PHILOX_WORDS = 4


def colex_rank(S):
    """Rank of a sorted tuple among all same-size subsets in colexicographic order."""
    return sum(math.comb(s, i + 1) for i, s in enumerate(S))


def lex_subsets(n, p):
    return np.array(list(itertools.combinations(range(n), p)), dtype=np.intp).reshape(-1, p)


def colex_order(subsets):
    """Permutation putting lexicographically listed subsets into colex order."""
    return np.lexsort(subsets.T)


class Instance(typing.NamedTuple):
    n: int
    p: int
    k: int
    ell: int
    # None for null draws
    labels: typing.Optional[np.ndarray]
    subsets: np.ndarray
    symbols: np.ndarray
    seed: int

    @property
    def planted(self):
        return self.labels is not None

    @property
    def observations(self):
        return {tuple(int(i) for i in S): int(y) for S, y in zip(self.subsets, self.symbols)}

    def frequencies(self):
        return np.bincount(self.symbols, minlength=self.ell) / len(self.symbols)

    def to_json(self):
        return {
            'n': self.n,
            'p': self.p,
            'k': self.k,
            'ell': self.ell,
            'seed': self.seed,
            'labels': None if self.labels is None else self.labels.tolist(),
            'obs': np.column_stack([self.subsets, self.symbols]).tolist(),
        }

    def dumps(self):
        return json.dumps(self.to_json(), separators=(',', ':'))

    @classmethod
    def from_json(cls, data):
        n, p = int(data['n']), int(data['p'])
        obs = np.asarray(data['obs'], dtype=np.intp).reshape(-1, p + 1)
        if len(obs) != math.comb(n, p):
            raise ConfigError('instance holds %d observations, expected C(%d, %d)' % (len(obs), n, p))
        subsets = obs[:, :p]
        if not np.array_equal(subsets, lex_subsets(n, p)):
            raise ConfigError('instance subsets must be every sorted %d-subset, ascending' % p)
        labels = data.get('labels')
        return cls(n=n, p=p, k=int(data['k']), ell=int(data['ell']),
                   labels=None if labels is None else np.asarray(labels, dtype=np.intp),
                   subsets=subsets, symbols=obs[:, p], seed=int(data['seed']))

    def to_csv(self, fp, symbols=None):
        """Edge list ``i,j,symbol`` for pairwise instances, optionally only some symbols."""
        if self.p != 2:
            raise ConfigError('CSV edge lists need p = 2, got p = %d' % self.p)
        writer = csv.writer(fp, lineterminator='\n')
        writer.writerow(['i', 'j', 'symbol'])
        for (i, j), y in zip(self.subsets.tolist(), self.symbols.tolist()):
            if symbols is None or y in symbols:
                writer.writerow([i, j, y])


def _streams(seed):
    labels_seq, obs_seq = np.random.SeedSequence(seed).spawn(2)
    return labels_seq, obs_seq


def _uniforms(obs_seq, start, size):
    bitgen = np.random.Philox(obs_seq)
    bitgen.advance(start // PHILOX_WORDS)
    return np.random.Generator(bitgen).random(size)


def draw_symbols(mu, uniforms):
    """Inverse-CDF draw of one symbol per row of ``mu``, never landing on a zero-mass tail."""
    cdf = np.cumsum(mu, axis=-1)
    symbols = (cdf <= uniforms[:, None]).sum(axis=-1)
    last = mu.shape[-1] - 1 - np.argmax(mu[:, ::-1] > 0, axis=-1)
    return np.minimum(symbols, last)


def sample(fam, n, planted, seed=0):
    if int(n) != n or n < fam.p:
        raise ConfigError('population size must be an integer >= p=%d, got %r' % (fam.p, n))
    n, seed = int(n), int(seed)
    labels_seq, obs_seq = _streams(seed)
    labels = np.random.Generator(np.random.Philox(labels_seq)).integers(fam.k, size=n) if planted else None

    subsets = lex_subsets(n, fam.p)
    order = colex_order(subsets)
    colex = subsets[order]
    chunk = max(PHILOX_WORDS, conf.setting('chunk_size') // PHILOX_WORDS * PHILOX_WORDS)

    def run(start):
        block = colex[start:start + chunk]
        u = _uniforms(obs_seq, start, len(block))
        if labels is None:
            mu = np.broadcast_to(fam.mu_avg, (len(block), fam.ell))
        else:
            mu = fam.mu[tuple(labels[block].T)]
        return draw_symbols(mu, u)

    drawn = pmap(run, range(0, len(colex), chunk))
    symbols = np.empty(len(colex), dtype=np.intp)
    symbols[order] = np.concatenate(drawn) if drawn else []
    logger.debug('sampled %s instance of %r at n=%d (%d observations)',
                 'planted' if planted else 'null', fam, n, len(symbols))
    return Instance(n=n, p=fam.p, k=fam.k, ell=fam.ell, labels=labels, subsets=subsets, symbols=symbols, seed=seed)


class ChannelFit(typing.NamedTuple):
    labels: tuple
    counts: list
    expected: list
    statistic: float
    pvalue: float


class FrequencyReport(typing.NamedTuple):
    n: int
    samples: int
    seed: int
    channels: list
    # pooled symbols of one null instance of size n against mu_avg
    null: ChannelFit

    @property
    def min_pvalue(self):
        return min(fit.pvalue for fit in self.channels + [self.null])

    def as_dict(self):
        return {
            'n': self.n,
            'samples': self.samples,
            'seed': self.seed,
            'min_pvalue': self.min_pvalue,
            'channels': [fit._asdict() for fit in self.channels],
            'null': self.null._asdict(),
        }


def goodness_of_fit(labels, counts, probs):
    """Chi-squared test of counts against probs, restricted to the support of probs."""
    counts = np.asarray(counts, dtype=float)
    probs = np.asarray(probs, dtype=float)
    total = counts.sum()
    support = probs > 0
    expected = np.where(support, probs / probs[support].sum() * total, 0.0)
    if counts[~support].any():
        statistic, pvalue = math.inf, 0.0
    elif support.sum() < 2:
        statistic, pvalue = 0.0, 1.0
    else:
        statistic, pvalue = chisquare(counts[support], f_exp=expected[support])
    return ChannelFit(tuple(labels), counts.astype(int).tolist(), expected.tolist(), float(statistic), float(pvalue))


def empirical_chi2_distance(fam, n, samples=None, seed=0, reference=None):
    """
    Draw ``samples`` symbols from every channel of ``fam`` and test each
    against the matching channel of ``reference`` (``fam`` itself by default).
    """
    reference = fam if reference is None else reference
    if reference.mu.shape != fam.mu.shape:
        raise ConfigError('reference family has shape %s, expected %s' % (reference.mu.shape, fam.mu.shape))
    samples = int(samples or conf.setting('mc_samples'))
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed).spawn(1)[0]))
    channels = []
    for a in fam.labels():
        symbols = draw_symbols(np.broadcast_to(fam.mu[a], (samples, fam.ell)), rng.random(samples))
        channels.append(goodness_of_fit(a, np.bincount(symbols, minlength=fam.ell), reference.mu[a]))
    inst = sample(fam, n, planted=False, seed=seed)
    null = goodness_of_fit((), np.bincount(inst.symbols, minlength=fam.ell), reference.mu_avg)
    if (worst := min(fit.pvalue for fit in channels + [null])) < 1e-4:
        logger.warning('channel frequencies of %r disagree with the reference: min p-value %.3g', fam, worst)
    return FrequencyReport(n=int(n), samples=samples, seed=int(seed), channels=channels, null=null)

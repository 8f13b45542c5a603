"""
Chunked views of the multinomial law Mult(n, d) with uniform cell
probabilities: its full support with log-weights, or i.i.d. draws.
"""
import itertools
import logging
import math
import typing

import numpy as np
from scipy.special import gammaln, logsumexp

from gsbm_lab import conf
from gsbm_lab.exceptions import BudgetExceeded, ConfigError
from gsbm_lab.futures import pmap

logger = logging.getLogger(__name__)


class Estimate(typing.NamedTuple):
    value: typing.Any
    stderr: typing.Any = None
    count: int = 0
    exact: bool = True


class BaseIterable:
    def __init__(self, n, d, chunk_size=None):
        if int(n) != n or n < 0:
            raise ConfigError('number of throws n must be a nonnegative integer, got %r' % n)
        if int(d) != d or d < 1:
            raise ConfigError('number of cells d must be a positive integer, got %r' % d)
        self.n = int(n)
        self.d = int(d)
        self.chunk_size = chunk_size or conf.setting('chunk_size')

    def __iter__(self):
        for job in self.jobs():
            yield self.make_chunk(job)

    def expectation(self, fn):
        """E fn(z); fn maps an (m, d) batch to shape (m,) or (m, q)."""
        results = []
        jobs = iter(self.jobs())
        batch_size = max(1, conf.get_threads()) * 4
        while batch := list(itertools.islice(jobs, batch_size)):
            results.extend(pmap(lambda job: self.reduce_chunk(fn, job), batch))
        return self.combine(results)


class Compositions(BaseIterable):
    """Every z in N^d with sum n, weighted by its multinomial probability."""

    exact = True

    @property
    def size(self):
        return math.comb(self.n + self.d - 1, self.d - 1)

    def check_budget(self, budget=None):
        budget = conf.setting('enum_budget') if budget is None else budget
        if self.size > budget:
            raise BudgetExceeded(
                'enumerating %d compositions of n=%d into d=%d parts exceeds the budget %d; use Monte Carlo'
                % (self.size, self.n, self.d, budget))
        return self

    def jobs(self):
        bars = itertools.combinations(range(self.n + self.d - 1), self.d - 1)
        while chunk := list(itertools.islice(bars, self.chunk_size)):
            yield chunk

    def make_chunk(self, chunk):
        n, d = self.n, self.d
        if d == 1:
            z = np.full((len(chunk), 1), n)
        else:
            bars = np.array(chunk, dtype=np.int64).reshape(len(chunk), d - 1)
            edges = np.hstack([np.full((len(chunk), 1), -1), bars, np.full((len(chunk), 1), n + d - 1)])
            z = np.diff(edges, axis=1) - 1
        log_weights = gammaln(n + 1) - gammaln(z + 1).sum(axis=1) - n * math.log(d)
        return log_weights, z

    def reduce_chunk(self, fn, job):
        log_weights, z = self.make_chunk(job)
        values = np.asarray(fn(z), dtype=float)
        weights = log_weights.reshape((-1,) + (1,) * (values.ndim - 1))
        return logsumexp(np.broadcast_to(weights, values.shape), b=values, axis=0, return_sign=True)

    def combine(self, results):
        if not results:
            return Estimate(0.0, count=0)
        logs = np.array([r[0] for r in results])
        signs = np.array([r[1] for r in results])
        live = signs != 0
        if not live.any():
            value = np.zeros(logs.shape[1:])
        else:
            logs = np.where(live, logs, -np.inf)
            top = np.max(logs, axis=0)
            top = np.where(np.isfinite(top), top, 0.0)
            value = np.sum(signs * np.exp(logs - top), axis=0) * np.exp(top)
        value = float(value) if np.ndim(value) == 0 else value
        return Estimate(value, stderr=None, count=self.size, exact=True)


class MultinomialDraws(BaseIterable):
    """``samples`` i.i.d. draws; chunk i has its own Philox stream spawned from ``seed``."""

    exact = False

    def __init__(self, n, d, samples, seed=0, chunk_size=None):
        super().__init__(n, d, chunk_size)
        if int(samples) != samples or samples < 1:
            raise ConfigError('samples must be a positive integer, got %r' % samples)
        self.samples = int(samples)
        self.seed = int(seed)

    def jobs(self):
        count = -(-self.samples // self.chunk_size)
        children = np.random.SeedSequence(self.seed).spawn(count)
        for i, child in enumerate(children):
            yield child, min(self.chunk_size, self.samples - i * self.chunk_size)

    def make_chunk(self, job):
        child, size = job
        rng = np.random.Generator(np.random.Philox(child))
        z = rng.multinomial(self.n, np.full(self.d, 1.0 / self.d), size=size)
        return np.zeros(size), z

    def reduce_chunk(self, fn, job):
        _, z = self.make_chunk(job)
        values = np.asarray(fn(z), dtype=float)
        mean = values.mean(axis=0)
        return len(values), mean, ((values - mean) ** 2).sum(axis=0)

    def combine(self, results):
        # Chan et al. pairwise merge, in chunk order
        count, mean, m2 = results[0]
        for n_b, mean_b, m2_b in results[1:]:
            total = count + n_b
            delta = mean_b - mean
            mean = mean + delta * n_b / total
            m2 = m2 + m2_b + delta ** 2 * count * n_b / total
            count = total
        stderr = np.sqrt(m2 / (count - 1) / count) if count > 1 else np.zeros_like(mean)
        if np.ndim(mean) == 0:
            mean, stderr = float(mean), float(stderr)
        return Estimate(mean, stderr=stderr, count=count, exact=False)


def pearson_values(z, n):
    """(d/n) sum_i (z_i - n/d)^2 per row."""
    z = np.asarray(z, dtype=float)
    d = z.shape[-1]
    if n == 0:
        return np.zeros(z.shape[:-1])
    return (d / n) * ((z - n / d) ** 2).sum(axis=-1)

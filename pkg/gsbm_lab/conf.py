"""
Tolerances, budgets and the worker count.

Settings live in a thread-local dict, so an ``override`` in one thread never
leaks into another. ``futures.pmap`` copies the caller's settings into its
workers.
"""
import os
import threading
from contextlib import contextmanager

from gsbm_lab.exceptions import ConfigError

THREADS_ENV = 'GSBM_LAB_THREADS'

DEFAULTS = {
    'prob_tol': 1e-12,
    'neg_tol': 1e-14,
    'sym_tol': 1e-10,
    'zero_tol': 1e-10,
    'psd_tol': 1e-10,
    'audit_budget': 10 ** 6,
    'enum_budget': 10 ** 7,
    'state_budget': 10 ** 7,
    'mc_samples': 10 ** 5,
    'restarts': 50,
    'iters': 500,
    'power_tol': 1e-12,
    'chain_slack': 1e-9,
    'chunk_size': 4096,
    'threads': 1,
}


def env_threads():
    raw = os.environ.get(THREADS_ENV, '1')
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError('%s must be an integer, got %r' % (THREADS_ENV, raw))
    if value < 1:
        raise ConfigError('%s must be >= 1, got %d' % (THREADS_ENV, value))
    return value


threadlocal = threading.local()


def _settings():
    if (settings := getattr(threadlocal, 'settings', None)) is None:
        settings = threadlocal.settings = dict(DEFAULTS, threads=env_threads())
    return settings


def _coerce(name, value):
    if name not in DEFAULTS:
        raise ConfigError('unknown setting %r (known: %s)' % (name, ', '.join(sorted(DEFAULTS))))
    kind = type(DEFAULTS[name])
    try:
        value = kind(float(value)) if kind is int else kind(value)
    except (TypeError, ValueError):
        raise ConfigError('setting %r expects %s, got %r' % (name, kind.__name__, value))
    if value < 0 or (name in ('threads', 'chunk_size', 'restarts', 'iters') and value < 1):
        raise ConfigError('setting %r out of range: %r' % (name, value))
    return value


def setting(name):
    try:
        return _settings()[name]
    except KeyError:
        raise ConfigError('unknown setting %r' % name)


def configure(**values):
    settings = _settings()
    settings.update({name: _coerce(name, value) for name, value in values.items()})


def get_threads():
    return setting('threads')


def set_threads(value):
    configure(threads=value)


def snapshot():
    return dict(_settings())


def as_dict():
    return snapshot()


@contextmanager
def override(**values):
    saved = snapshot()
    try:
        configure(**values)
        yield
    finally:
        threadlocal.settings = saved


@contextmanager
def installed(settings):
    saved = getattr(threadlocal, 'settings', None)
    threadlocal.settings = dict(settings)
    try:
        yield
    finally:
        threadlocal.settings = saved

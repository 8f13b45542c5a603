import logging
import math
import typing

import numpy as np

from gsbm_lab import conf
from gsbm_lab.bounds import bound_corollary, bound_exact, bound_mc, multifreq_advantage
from gsbm_lab.builders import family_from_spec, symmetric_interaction
from gsbm_lab.cli.declare import arg, command
from gsbm_lab.cli.resolver import parse_grid, parse_sweep
from gsbm_lab.concentration import (
    PearsonSpec, bernstein_table, moment_table, pearson_moments_exact, pearson_sup, sample_pearson, tail_table,
)
from gsbm_lab.exceptions import ConfigError, UnsupportedRegime
from gsbm_lab.iterables import Compositions
from gsbm_lab.model import audit
from gsbm_lab.oracle import TinyInstance, verify_chain
from gsbm_lab.report import write_csv
from gsbm_lab.sampler import empirical_chi2_distance, sample
from gsbm_lab.tensor import SymTensor, characteristic_tensor, profile_from_tensor
from gsbm_lab.thresholds import check_theorem_p2, check_theorem_p3, ks_threshold_hsbm, ks_threshold_sbm

logger = logging.getLogger(__name__)


class Outcome(typing.NamedTuple):
    payload: dict
    # writes the tabular form to an open file, None when there is none
    csv: typing.Optional[typing.Callable] = None
    passed: bool = True


def build_family(config, **overrides):
    """The --model family, with --n, --eta and --gamma (or sweep values) applied."""
    if config.model is None:
        raise ConfigError('--model is required for %s' % config.command)
    spec = dict(config.model)
    params = {**config.params, **overrides}
    if params.get('eta') is not None:
        spec['eta'] = params['eta']
        spec.pop('gamma', None)
    elif params.get('gamma') is not None:
        spec['gamma'] = params['gamma']
        spec.pop('eta', None)
    return family_from_spec(spec, n=params.get('n'))


def _require(config, *names):
    missing = [name for name in names if config.params.get(name) is None]
    if missing:
        raise ConfigError('%s needs %s' % (config.command, ', '.join('--%s' % name for name in missing)))


def interaction(spec, fam, n=None):
    """
    The interaction tensor an sbm/hsbm family realises, or None for other
    models. Resampled or censored families report their effective edge rates.
    """
    if spec.get('model') not in ('sbm', 'hsbm'):
        return None
    if 'resample' in spec or 'censor' in spec:
        n = n if n is not None else spec['n']
        return math.comb(int(n), fam.p - 1) * fam.mu[..., 0]
    if 'Q' in spec:
        return np.asarray(spec['Q'], dtype=float)
    p = 2 if spec['model'] == 'sbm' else int(spec['p'])
    return symmetric_interaction(p, int(spec['k']), spec['alpha'], spec['beta'])


@command('analyze', help='audit a model and report its marginal profile and threshold verdicts')
def cmd_analyze(config):
    fam = build_family(config)
    checked = audit(fam)
    if not checked.weakly_symmetric:
        raise UnsupportedRegime(
            '%r is not weakly symmetric (defect %.3g): the overlap bounds need the pair Gram matrix to be '
            'invariant under swapping the two labellings, which fails e.g. for sumset models on non-abelian groups'
            % (fam, checked.max_symmetry_defect))

    T = characteristic_tensor(fam)
    profile = profile_from_tensor(T, fam.k)
    n, D = config.params.get('n'), config.params.get('D')
    verdicts, notes = [], []
    if (Q := interaction(config.model, fam, n)) is not None:
        verdicts.append(ks_threshold_sbm(Q) if Q.ndim == 2 else ks_threshold_hsbm(Q))
    if profile.trivial:
        notes.append('trivial model: every characteristic tensor vanishes')
    elif profile.marginal_order < 2:
        notes.append('marginal order 1: no low-degree hardness condition applies')
    elif n is None:
        notes.append('pass --n to evaluate the marginal-order conditions')
    else:
        if profile.marginal_order == 2:
            verdicts.append(check_theorem_p2(profile, n))
        if D is not None and 1 <= D <= n:
            verdicts.append(check_theorem_p3(profile, n, D))
        else:
            notes.append('pass 1 <= --D <= n to evaluate the degree-dependent condition')

    payload = {
        'model': {'name': repr(fam), 'p': fam.p, 'k': fam.k, 'ell': fam.ell},
        'audit': checked,
        'characteristic_tensor': {'asymmetry': T.asymmetry, 'max_abs': T.max_abs()},
        'profile': profile,
        'verdicts': verdicts,
        'notes': notes,
    }
    return Outcome(payload)


METHODS = ('exact', 'mc', 'corollary', 'multifreq', 'auto')
SWEEP_FIELDS = ['param', 'at', 'value', 'method', 'mc_stderr']


def run_bound(config, **overrides):
    params = {**config.params, **overrides}
    n, D, method = params.get('n'), params.get('D'), params['method']
    if n is None or D is None:
        raise ConfigError('bound needs --n and --D')
    samples, seed = params.get('samples'), params['seed']

    if method == 'multifreq':
        lam = params.get('lam') if params.get('lam') is not None else params.get('gamma')
        if lam is None:
            raise ConfigError('the multi-frequency bound needs --lambda or --gamma')
        k = params.get('k') or build_family(config, **overrides).k
        return multifreq_advantage(k, lam, n, D, samples=samples, seed=seed)

    fam = build_family(config, **overrides)
    if method == 'corollary':
        return bound_corollary(profile_from_tensor(characteristic_tensor(fam), fam.k), n, D,
                               form=params['form'], samples=samples, seed=seed)
    if method == 'auto':
        method = 'exact' if Compositions(n, fam.k ** 2).size <= conf.setting('enum_budget') else 'mc'
    if method == 'exact':
        return bound_exact(fam, n, D)
    return bound_mc(fam, n, D, samples=samples, seed=seed)


BOUND_ARGUMENTS = (
    arg('--method', choices=METHODS, default='auto'),
    arg('--form', choices=('zbar', 'chi2'), default='zbar'),
    arg('--lambda', dest='lam', type=float, help='multi-frequency signal strength'),
    arg('--k', type=int, help='group order for --method multifreq without a model'),
)


@command('bound', *BOUND_ARGUMENTS, help='upper-bound the squared coordinate advantage')
def cmd_bound(config):
    report = run_bound(config)
    return Outcome({'bound': report}, csv=lambda fp: write_csv(fp, [report.as_dict()]))


@command('sweep', *BOUND_ARGUMENTS, arg('--sweep', required=True, metavar='PARAM:START:STOP:STEPS'),
         help='run bound over a parameter grid')
def cmd_sweep(config):
    param, grid = parse_sweep(config.params['sweep'])
    key = 'lam' if param == 'lambda' else param
    rows = []
    for value in grid:
        report = run_bound(config, **{key: value})
        rows.append({'param': param, 'at': value, 'value': report.value,
                     'method': report.method, 'mc_stderr': report.mc_stderr})
        logger.info('sweep %s=%g: %.6g (%s)', param, value, report.value, report.method)
    return Outcome({'param': param, 'grid': grid, 'rows': rows}, csv=lambda fp: write_csv(fp, rows, SWEEP_FIELDS))


# (label, model spec, n); the last entry is dropped by --quick
VERIFY_SUITE = [
    ('sbm(3,1)', {'model': 'sbm', 'k': 2, 'alpha': 3, 'beta': 1}, 4),
    ('xor(2,0.4)', {'model': 'xor', 'p': 2, 'eta': 0.4}, 4),
    ('sync(Z2,0.5)', {'model': 'toh_sync', 'group': 'Z2', 'eta': 0.5}, 4),
    ('censored sbm(3,1)', {'model': 'sbm', 'k': 2, 'alpha': 3, 'beta': 1, 'censor': 0.3}, 4),
    ('sync(Z3,0.4)', {'model': 'toh_sync', 'group': 'Z3', 'eta': 0.4}, 4),
    ('sbm(3,1)', {'model': 'sbm', 'k': 2, 'alpha': 3, 'beta': 1}, 5),
]
VERIFY_DEGREES = (1, 2, 3, 4)
PEARSON_MEANS = [(20, 2), (20, 4), (50, 2), (50, 4)]
MOMENT_GRID = [(delta, epsilon) for delta in (0.25, 0.5) for epsilon in (0.25, 0.5)]


def negate_largest(T):
    entries = np.array(T.entries)
    where = np.unravel_index(np.argmax(np.abs(entries)), entries.shape)
    entries[where] = -entries[where]
    return SymTensor(entries, dim=T.dim)


def _check(name, ok, **detail):
    if not ok:
        logger.error('verification check failed: %s %s', name, detail)
    return {'name': name, 'ok': bool(ok), **detail}


def concentration_checks(quick, seed):
    checks = []
    for n, d in PEARSON_MEANS:
        mean = pearson_moments_exact(PearsonSpec(n, d), [1])[0]
        checks.append(_check('pearson-mean(n=%d, d=%d)' % (n, d), abs(mean - (d - 1)) <= 1e-10, value=mean))

    spec = PearsonSpec(20, 4)
    for delta, epsilon in MOMENT_GRID:
        rows = moment_table(spec, 5, delta, epsilon)
        worst = max(row['empirical'] / row['bound'] for row in rows)
        checks.append(_check('pearson-moments(delta=%g, eps=%g)' % (delta, epsilon), worst <= 1, worst_ratio=worst))

    if not quick:
        values = sample_pearson(spec, conf.setting('mc_samples'), seed)
        checks.append(_check('pearson-support', values.max() <= pearson_sup(spec), max=float(values.max())))
        ts = np.linspace(0, 60, 31)
        rows = tail_table(spec, ts, 0.5, samples=len(values), seed=seed)
        excess = max(row['empirical'] - row['bound'] for row in rows)
        checks.append(_check('pearson-tail(eps=0.5)', excess <= 0, worst_excess=excess))
    return checks


@command('verify', arg('--quick', action='store_true', help='only n <= 4 instances, no sampling'),
         arg('--mutate', action='store_true', help='negate one characteristic-tensor entry'),
         help='check the inequality chain and the concentration bounds on small instances')
def cmd_verify(config):
    quick, mutate = config.params['quick'], config.params['mutate']
    chains = []
    for label, spec, n in VERIFY_SUITE:
        if quick and n > 4:
            continue
        inst = TinyInstance(family_from_spec(spec, n=n), n)
        for D in VERIFY_DEGREES:
            report = verify_chain(inst, D, mutate=negate_largest if mutate else None, strict=False)
            chains.append({'instance': label, 'model': spec, **report.as_dict()})
    checks = concentration_checks(quick, config.params['seed'])
    passed = all(chain['passed'] for chain in chains) and all(check['ok'] for check in checks)
    violated = [link['name'] for chain in chains for link in chain['links'] if link['checked'] and not link['ok']]
    payload = {'chains': chains, 'concentration': checks, 'passed': passed, 'violated': sorted(set(violated))}
    return Outcome(payload, passed=passed)


@command('sample', arg('--planted', action='store_true', help='draw labels and plant them'),
         arg('--check', action='store_true', help='add per-channel chi-squared frequency checks'),
         help='draw one instance')
def cmd_sample(config):
    _require(config, 'n')
    fam = build_family(config)
    inst = sample(fam, config.params['n'], config.params['planted'], seed=config.params['seed'])
    payload = {'instance': inst.to_json()}
    if config.params['check']:
        payload['frequencies'] = empirical_chi2_distance(fam, inst.n, config.params['samples'], config.params['seed'])
    return Outcome(payload, csv=inst.to_csv)


@command('concentrate', arg('--d', type=int, required=True, help='number of cells'),
         arg('--t-grid', default='0:40:21', help='comma list or start:stop:steps'),
         arg('--r-max', type=int, default=5),
         arg('--epsilon', type=float, default=0.5),
         arg('--delta', type=float, default=0.5),
         help='compare Pearson and vector Bernstein tails and moments with their bounds')
def cmd_concentrate(config):
    _require(config, 'n')
    params = config.params
    spec = PearsonSpec(params['n'], params['d'])
    ts = parse_grid(params['t_grid'])
    samples, seed = params['samples'], params['seed']
    tables = {
        'pearson_tail': tail_table(spec, ts, params['epsilon'], samples=samples, seed=seed),
        'pearson_moments': moment_table(spec, params['r_max'], params['delta'], params['epsilon']),
        'vector_bernstein': bernstein_table(spec.n, spec.d, ts, params['epsilon'],
                                            samples=samples, seed=seed),
    }
    rows = [{'table': name, 'x': row.get('t', row.get('r')), 'empirical': row['empirical'], 'bound': row['bound']}
            for name, table in tables.items() for row in table]
    return Outcome(tables, csv=lambda fp: write_csv(fp, rows, ['table', 'x', 'empirical', 'bound']))


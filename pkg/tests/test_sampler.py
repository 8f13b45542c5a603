import io
import json
import math

import numpy as np
import pytest
from scipy.stats import chi2_contingency

from gsbm_lab import conf
from gsbm_lab.builders import build_xor_sat
from gsbm_lab.exceptions import ConfigError
from gsbm_lab.model import ChannelFamily, censor
from gsbm_lab.sampler import (
    Instance, colex_order, colex_rank, draw_symbols, empirical_chi2_distance, goodness_of_fit, lex_subsets, sample,
)


def test_colex_ranks():
    subsets = lex_subsets(5, 3)
    ranked = subsets[colex_order(subsets)]
    assert [colex_rank(S) for S in ranked.tolist()] == list(range(math.comb(5, 3)))
    assert colex_rank((0, 1)) == 0
    assert colex_rank((0, 2)) == 1
    assert colex_rank((1, 2)) == 2
    assert colex_rank((0, 3)) == 3


def test_instance_shape(make_sbm):
    fam = make_sbm(3, 1, 30)
    null, planted = sample(fam, 30, planted=False), sample(fam, 30, planted=True)
    assert null.labels is None and not null.planted
    assert planted.planted and planted.labels.shape == (30,)
    assert len(planted.symbols) == math.comb(30, 2)
    assert np.array_equal(planted.subsets, lex_subsets(30, 2))
    assert planted.frequencies().sum() == pytest.approx(1.0)


def test_same_seed_same_draw(sync_z3):
    first = sample(sync_z3, 25, planted=True, seed=8)
    again = sample(sync_z3, 25, planted=True, seed=8)
    other = sample(sync_z3, 25, planted=True, seed=9)
    assert np.array_equal(first.labels, again.labels)
    assert np.array_equal(first.symbols, again.symbols)
    assert not np.array_equal(first.symbols, other.symbols)


def test_draw_ignores_chunking(make_hsbm):
    fam = make_hsbm(3, 2, 5, 1, 20)
    reference = sample(fam, 20, planted=True, seed=2)
    with conf.override(chunk_size=4):
        small = sample(fam, 20, planted=True, seed=2)
    with conf.override(chunk_size=7, threads=3):
        pooled = sample(fam, 20, planted=True, seed=2)
    assert np.array_equal(reference.symbols, small.symbols)
    assert np.array_equal(reference.symbols, pooled.symbols)


@pytest.mark.parametrize('eta', [0.5, 0.9])
def test_planted_xor_clauses_hold(eta):
    inst = sample(build_xor_sat(3, eta), 12, planted=True, seed=1)
    parity = inst.labels[inst.subsets].sum(axis=1) % 2
    revealed = inst.symbols != 2
    assert revealed.any()
    assert (inst.symbols[revealed] == parity[revealed]).all()


def test_fully_revealed_xor_matches_every_clause():
    parity = np.indices((2, 2, 2)).sum(axis=0) % 2
    fam = ChannelFamily(np.stack([parity == 0, parity == 1], axis=-1).astype(float))
    inst = sample(fam, 12, planted=True, seed=1)
    assert np.array_equal(inst.symbols, inst.labels[inst.subsets].sum(axis=1) % 2)


def test_null_draws_are_exchangeable():
    fam = build_xor_sat(2, 0.6)
    draws = np.stack([sample(fam, 6, planted=False, seed=seed).symbols for seed in range(400)])
    table = np.stack([np.bincount(column, minlength=fam.ell) for column in draws.T])
    # every pair position sees the same symbol law
    assert chi2_contingency(table).pvalue > 1e-4
    pooled = goodness_of_fit((), table.sum(axis=0), fam.mu_avg)
    assert pooled.pvalue > 1e-4


def test_relabelled_null_draws_have_the_same_law():
    fam = build_xor_sat(2, 0.6)
    perm = np.array([3, 0, 5, 1, 4, 2])

    def degree(observations):
        return sum(y == 0 for S, y in observations.items() if 0 in S)

    plain, moved = [], []
    for seed in range(400):
        plain.append(degree(sample(fam, 6, planted=False, seed=seed).observations))
        observations = sample(fam, 6, planted=False, seed=400 + seed).observations
        moved.append(degree({tuple(sorted(perm[list(S)])): y for S, y in observations.items()}))
    table = np.stack([np.bincount(plain, minlength=6), np.bincount(moved, minlength=6)])
    table = table[:, table.sum(axis=0) > 0]
    assert chi2_contingency(table).pvalue > 1e-4


def test_sbm_edge_density(make_sbm):
    n = 300
    inst = sample(make_sbm(3, 1, n), n, planted=True, seed=4)
    same = inst.labels[inst.subsets[:, 0]] == inst.labels[inst.subsets[:, 1]]
    probs = np.where(same, 3, 1) / n
    edges = (inst.symbols == 0).sum()
    sigma = math.sqrt((probs * (1 - probs)).sum())
    assert abs(edges - probs.sum()) <= 5 * sigma


def test_draw_symbols_skips_zero_mass_tail():
    mu = np.array([[0.5, 0.5, 0.0], [1.0, 0.0, 0.0]])
    symbols = draw_symbols(mu, np.array([1.0, 0.999999]))
    assert symbols.tolist() == [1, 0]


def test_goodness_of_fit_edges():
    assert goodness_of_fit((0,), [5, 3], [1.0, 0.0]).pvalue == 0.0
    assert goodness_of_fit((0,), [8, 0], [1.0, 0.0]).pvalue == 1.0


def test_frequencies_match_channels(sbm31):
    report = empirical_chi2_distance(sbm31, 200, samples=50000, seed=3)
    assert len(report.channels) == 4
    assert report.min_pvalue > 1e-4
    assert report.as_dict()['null']['labels'] == ()


def test_fully_censored_channels(sbm31):
    report = empirical_chi2_distance(censor(sbm31, 1.0), 50, samples=1000)
    assert report.min_pvalue == 1.0


def test_wrong_reference_is_detected(caplog):
    report = empirical_chi2_distance(build_xor_sat(2, 0.9), 40, samples=20000, reference=build_xor_sat(2, 0.5))
    assert report.min_pvalue < 1e-6
    assert 'disagree' in caplog.text
    with pytest.raises(ConfigError):
        empirical_chi2_distance(build_xor_sat(2, 0.9), 40, reference=build_xor_sat(3, 0.9))


def test_json_and_csv(make_sbm):
    inst = sample(make_sbm(3, 1, 6), 6, planted=True, seed=0)
    data = json.loads(inst.dumps())
    assert set(data) == {'n', 'p', 'k', 'ell', 'seed', 'labels', 'obs'}
    again = Instance.from_json(data)
    assert np.array_equal(again.symbols, inst.symbols)
    assert np.array_equal(again.labels, inst.labels)

    data['obs'] = data['obs'][1:]
    with pytest.raises(ConfigError):
        Instance.from_json(data)

    out = io.StringIO()
    inst.to_csv(out, symbols={0})
    lines = out.getvalue().splitlines()
    assert lines[0] == 'i,j,symbol'
    assert len(lines) - 1 == (inst.symbols == 0).sum()


def test_csv_needs_pairs(make_hsbm):
    with pytest.raises(ConfigError):
        sample(make_hsbm(3, 2, 5, 1, 8), 8, planted=False).to_csv(io.StringIO())

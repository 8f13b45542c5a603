import numpy as np
import pytest

from gsbm_lab.builders import build_truth_or_haar, build_xor_sat, trivial_family
from gsbm_lab.exceptions import ConfigError
from gsbm_lab.model import ChannelFamily, audit, censor, centered_channel, marginal_family, resample
from gsbm_lab.tensor import characteristic_tensor, marginal_profile


def test_validation():
    with pytest.raises(ConfigError, match='p >= 2'):
        ChannelFamily(np.full((2, 2), 0.5))
    with pytest.raises(ConfigError, match='sums to'):
        ChannelFamily(np.full((2, 2, 2), 0.6))
    with pytest.raises(ConfigError, match='negative'):
        ChannelFamily(np.array([[[1.5, -0.5]] * 2] * 2))
    with pytest.raises(ConfigError, match='degenerate'):
        ChannelFamily(np.array([[[1.0, 0.0]] * 2] * 2))
    with pytest.raises(ConfigError, match='same size'):
        ChannelFamily(np.full((2, 3, 2), 0.5))


def test_tiny_negatives_are_clamped():
    mu = np.full((2, 2, 2), 0.5)
    mu[0, 0] = [1.0 + 1e-15, -1e-15]
    fam = ChannelFamily(mu)
    assert (fam.mu >= 0).all()


def test_read_only():
    fam = trivial_family(2, 2, 3)
    with pytest.raises(ValueError):
        fam.mu[0, 0, 0] = 1.0


def test_from_table():
    table = {(0, 0): [0.9, 0.1], (0, 1): [0.5, 0.5], (1, 0): [0.5, 0.5], (1, 1): [0.9, 0.1]}
    fam = ChannelFamily.from_table(2, 2, 2, table)
    assert fam.channel((1, 0)).tolist() == [0.5, 0.5]
    assert np.allclose(fam.mu_avg, [0.7, 0.3])
    assert np.allclose(centered_channel(fam, (0, 0)), [0.2, -0.2])
    del table[(1, 1)]
    with pytest.raises(ConfigError, match='misses'):
        ChannelFamily.from_table(2, 2, 2, table)


def test_channel_out_of_range():
    fam = trivial_family(2, 2, 2)
    with pytest.raises(IndexError):
        fam.channel((0, 2))
    with pytest.raises(IndexError):
        fam.channel((0,))


def test_to_spec_keys():
    spec = trivial_family(2, 2, 2).to_spec()
    assert sorted(spec['mu']) == ['0,0', '0,1', '1,0', '1,1']


def test_audit(sbm31):
    checked = audit(sbm31)
    assert checked.nontrivial and checked.weakly_symmetric and checked.strongly_symmetric

    assert not audit(trivial_family(2, 3, 2)).nontrivial


def test_audit_sync_is_weak_only():
    checked = audit(build_truth_or_haar('Z3', 0.3))
    assert checked.weakly_symmetric
    assert not checked.strongly_symmetric


def test_audit_nonabelian_sumset():
    checked = audit(build_truth_or_haar('S3', 0.3, mode='sumset'))
    assert not checked.weakly_symmetric
    assert checked.max_symmetry_defect > 1e-3
    assert audit(build_truth_or_haar('S3', 0.3, mode='sync')).weakly_symmetric


@pytest.mark.parametrize('eta', [0.2, 0.7])
def test_channel_calculus(random_family, eta):
    rng = np.random.default_rng(1234)
    for _ in range(10):
        fam = random_family(rng, 2, int(rng.integers(2, 4)), int(rng.integers(2, 4)))
        T = characteristic_tensor(fam).entries
        assert np.allclose(characteristic_tensor(resample(fam, eta)).entries, (1 - eta) ** 2 * T, rtol=0, atol=1e-12)
        assert np.allclose(characteristic_tensor(censor(fam, eta)).entries, (1 - eta) * T, rtol=0, atol=1e-12)


def test_censor_edges(sbm31):
    assert censor(sbm31, 0) is sbm31
    erased = censor(sbm31, 1)
    assert erased.ell == 1
    assert not audit(erased).nontrivial
    assert censor(sbm31, 0.3).ell == 3


def test_eta_range(sbm31):
    with pytest.raises(ConfigError):
        resample(sbm31, 1.5)
    with pytest.raises(ConfigError):
        censor(sbm31, -0.1)


def test_marginal_family_matches_contraction(make_hsbm):
    fam = make_hsbm(3, 2, 5, 1, 12)
    profile = marginal_profile(fam)
    T2 = characteristic_tensor(marginal_family(fam, 2)).entries
    # T^(j) = (j!/p!) times the tensor of the order-j marginal model
    assert np.allclose(profile.tensor(2).entries, T2 / 3, rtol=0, atol=1e-14)
    assert marginal_family(fam, 3) is fam
    with pytest.raises(ConfigError):
        marginal_family(fam, 1)


def test_resampling_composes(random_family):
    fam = random_family(np.random.default_rng(5), 3, 2, 3)
    twice = resample(resample(fam, 0.3), 0.4)
    assert twice.allclose(resample(fam, 1 - 0.7 * 0.6))
    assert not twice.allclose(resample(fam, 0.4))


def test_resampled_sync_is_a_weaker_sync():
    assert resample(build_truth_or_haar('Z3', 0.5), 0.4).allclose(build_truth_or_haar('Z3', 0.6 * 0.5))
    assert resample(build_truth_or_haar('S3', 0.2), 1.0).allclose(build_truth_or_haar('S3', 0.0))


@pytest.mark.parametrize('p', [2, 3])
def test_xor_is_a_censored_parity_channel(p):
    parity = np.indices((2,) * p).sum(axis=0) % 2
    revealed = ChannelFamily(np.stack([parity == 0, parity == 1], axis=-1).astype(float))
    assert build_xor_sat(p, 0.7).allclose(censor(revealed, 1 - 0.7))
    assert not build_xor_sat(p, 0.7).allclose(revealed)


def test_audit_cyclic_sync():
    checked = audit(build_truth_or_haar('Z4', 0.3))
    assert checked.weakly_symmetric
    assert not checked.strongly_symmetric
    assert checked.strong_symmetry_defect > 1e-3

import numpy as np
import pytest

from gsbm_lab import conf
from gsbm_lab.builders import build_hsbm, build_sbm, build_truth_or_haar, symmetric_interaction
from gsbm_lab.model import ChannelFamily


@pytest.fixture(autouse=True)
def fresh_settings():
    with conf.installed(dict(conf.DEFAULTS)):
        yield


@pytest.fixture
def make_sbm():
    def make(alpha, beta, n, k=2):
        return build_sbm(symmetric_interaction(2, k, alpha, beta), n)
    return make


@pytest.fixture
def make_hsbm():
    def make(p, k, alpha, beta, n):
        return build_hsbm(symmetric_interaction(p, k, alpha, beta), n)
    return make


@pytest.fixture
def random_family():
    def make(rng, p, k, ell):
        return ChannelFamily(rng.dirichlet(np.ones(ell), size=(k,) * p))
    return make


@pytest.fixture
def sbm31(make_sbm):
    return make_sbm(3, 1, 500)


@pytest.fixture
def sync_z3():
    return build_truth_or_haar('Z3', 0.3)

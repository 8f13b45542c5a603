from gsbm_lab.bounds import BoundReport, bound_corollary, bound_exact, bound_mc, multifreq_advantage
from gsbm_lab.builders import (
    build_hsbm, build_sbm, build_truth_or_haar, build_xor_sat, family_from_spec, load_spec, trivial_family,
)
from gsbm_lab.conf import configure, override, set_threads
from gsbm_lab.exceptions import BudgetExceeded, ConfigError, GSBMError, UnsupportedRegime, VerificationFailure
from gsbm_lab.groups import groups
from gsbm_lab.model import ChannelFamily, audit, censor, marginal_family, resample
from gsbm_lab.tensor import characteristic_tensor, marginal_profile

__version__ = '0.1.0'

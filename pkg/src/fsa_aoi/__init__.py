"""Age-of-information toolkit for frame slotted ALOHA with reservation."""

from .analysis import (
    AnalysisReport,
    MomentDecomposition,
    Scheme,
    SlotProfile,
    aaoi_from_moments,
    aaoi_fsa_rd,
    aaoi_fsa_rd_one,
    aaoi_upper_bound_one,
    collision_free_prob,
    near_optimal_gamma,
    p_success_fsa_rd,
    p_success_fsa_rd_one,
)
from .combinatorics import (
    CountPmf,
    capped_success_pmf,
    reservation_count_pmf,
    singleton_count_pmf,
    successful_update_pmf,
)
from .config import (
    AlohaConfig,
    AmbiguousOptimumError,
    ConfigError,
    ConvergenceError,
    DegenerateChainError,
    InsufficientSamplesError,
    ProtocolConfig,
    SchemeKind,
    SchemeSpec,
)
from .markov import SteadyState, StochasticMatrix, build_transition_matrix, steady_state

__version__ = "0.1.0"

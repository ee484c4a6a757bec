"""Average age of information for the reservation schemes.

The multi-attempt scheme (FSA-RD) needs the stationary active-user law from
the Markov chain; the one-shot scheme (FSA-RD-One) admits fully closed forms,
an upper bound, and a near-optimal reservation probability.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .combinatorics import binomial_pmf, singleton_count_pmf
from .config import ConfigError, ProtocolConfig
from .markov import SteadyState, build_transition_matrix, steady_state

PROFILE_SUM_TOL = 1e-10
MOMENT_CONSISTENCY_TOL = 1e-9
_PS_UNDERFLOW = 1e-300


class Scheme(enum.Enum):
    FSA_RD = "fsa-rd"
    FSA_RD_ONE = "fsa-rd-one"


@dataclass(frozen=True)
class SlotProfile:
    """Per-data-slot success probabilities.

    phi[alpha] for alpha in 2..M is the probability that a tagged active user
    delivers its update in the (alpha-1)-th data slot of the frame; p_s is the
    total success probability once the user decides to reserve.
    """

    M: int
    p_s: float
    phi: tuple[float, ...]  # index 0 <-> alpha = 2

    def __post_init__(self):
        if len(self.phi) != self.M - 1:
            raise ValueError("phi must have M-1 entries for alpha = 2..M")
        if any(x < 0.0 for x in self.phi):
            raise ValueError("phi entries must be nonnegative")
        if abs(math.fsum(self.phi) - self.p_s) > PROFILE_SUM_TOL:
            raise ValueError("phi does not sum to p_s within tolerance")

    def phi_at(self, alpha: int) -> float:
        return self.phi[alpha - 2]

    def expected_alpha(self) -> float:
        """Mean index of the reception slot within its frame, in [2, M]."""
        if self.p_s < _PS_UNDERFLOW:
            return math.inf
        return math.fsum((a + 2) * x for a, x in enumerate(self.phi)) / self.p_s


@dataclass(frozen=True)
class MomentDecomposition:
    """First and second moments of the renewal quantities, in slots.

    W: frames waited for a fresh update after a delivery frame; K: frames from
    availability to delivery; Y = W + K; S: service time of a delivered
    update; l: slots aged inside the generation frame; Z: slots spent
    scheduled; alpha: reception slot index within its frame.
    """

    e_W: float
    e_W2: float
    e_K: float
    e_K2: float
    e_Y: float
    e_Y2: float
    e_S: float
    e_l: float
    e_Z: float
    e_alpha: float
    var_alpha: float | None = None
    e_X: float | None = None
    e_X2: float | None = None


@dataclass(frozen=True)
class AnalysisReport:
    config: ProtocolConfig
    scheme: Scheme
    profile: SlotProfile
    moments: MomentDecomposition
    aaoi: float
    upper_bound: float | None = None
    aaoi_infinite: bool = False

    def to_record(self) -> dict:
        """Flat key-value record for CSV rows / JSON objects."""
        rec = {
            "scheme": self.scheme.value,
            "N": self.config.N,
            "M": self.config.M,
            "V": self.config.V,
            "rho": self.config.rho,
            "gamma": self.config.gamma,
            "p_s": self.profile.p_s,
            "phi": list(self.profile.phi),
            "aaoi": self.aaoi,
            "upper_bound": self.upper_bound,
            "aaoi_infinite": self.aaoi_infinite,
        }
        for name in ("e_W", "e_W2", "e_K", "e_K2", "e_Y", "e_Y2",
                     "e_S", "e_l", "e_Z", "e_alpha"):
            rec[name] = getattr(self.moments, name)
        return rec


def _slot_profile(active_weights, gamma: float, V: int, M: int) -> SlotProfile:
    """Success probability and slot profile for a tagged reserving user.

    active_weights[n1] is the probability that n1 of the other users are
    active alongside the tagged one. Conditioned on n2 of them reserving, the
    tagged user ranks uniformly among the n2+1 contenders, so it wins the
    (alpha-1)-th data slot with probability 1/(n2+1) whenever at least
    alpha-1 mini-slots are singletons.
    """
    n_weights = len(active_weights)
    ps_terms: list[float] = []
    phi_terms: list[list[float]] = [[] for _ in range(M - 1)]
    for n1 in range(n_weights):
        w1 = active_weights[n1]
        for n2 in range(n1 + 1):
            w2 = w1 * binomial_pmf(n1, n2, gamma)
            contenders = n2 + 1
            singles = singleton_count_pmf(contenders, V)
            for n3 in range(1, min(V, contenders) + 1):
                base = w2 * singles[n3]
                ps_terms.append(base * (min(n3, M - 1) / contenders))
                for alpha in range(2, min(M, n3 + 1) + 1):
                    phi_terms[alpha - 2].append(base * (1 / contenders))
    p_s = math.fsum(ps_terms)
    phi = tuple(math.fsum(t) for t in phi_terms)
    return SlotProfile(M, p_s, phi)


def p_success_fsa_rd(config: ProtocolConfig, pi: SteadyState) -> SlotProfile:
    """Multi-attempt scheme: the tagged active user sees its peers through the
    size-biased stationary law pi_{n1+1}(n1+1) / sum_j pi_{j+1}(j+1)."""
    n = config.N
    weights = [pi.pi[k + 1] * (k + 1) for k in range(n)]
    total = math.fsum(weights)
    if total <= 0.0:
        raise ZeroDivisionError(
            "no state with an active user has stationary mass; chain is degenerate"
        )
    weights = [w / total for w in weights]
    return _slot_profile(weights, config.gamma, config.V, config.M)


def p_success_fsa_rd_one(config: ProtocolConfig) -> SlotProfile:
    """One-shot scheme: frames decouple, so the peer count is binomial with
    per-frame activity probability 1-(1-rho)^M."""
    n = config.N
    p = config.frame_arrival_prob
    weights = [binomial_pmf(n - 1, k, p) for k in range(n)]
    return _slot_profile(weights, config.gamma, config.V, config.M)


def collision_free_prob(config: ProtocolConfig) -> float:
    """Probability that a reserving user picks a mini-slot nobody else picks:
    (1 - gamma p / V)^(N-1) with p = 1-(1-rho)^M. Upper-bounds p_s since it
    ignores the M-1 data-slot cap."""
    p = config.frame_arrival_prob
    return (1.0 - config.gamma * p / config.V) ** (config.N - 1)


def collision_free_prob_triple_sum(config: ProtocolConfig) -> float:
    """Cross-check route for collision_free_prob: condition on the peer count,
    the reserving count, and the singleton count, crediting the tagged user
    n3 out of n2+1 shares."""
    n, V = config.N, config.V
    p = config.frame_arrival_prob
    terms = []
    for n1 in range(n):
        w1 = binomial_pmf(n - 1, n1, p)
        for n2 in range(n1 + 1):
            w2 = w1 * binomial_pmf(n1, n2, config.gamma)
            contenders = n2 + 1
            singles = singleton_count_pmf(contenders, V)
            for n3 in range(1, min(V, contenders) + 1):
                terms.append(w2 * singles[n3] * (n3 / contenders))
    return math.fsum(terms)


def near_optimal_gamma(N: int, V: int, M: int, rho: float) -> float:
    """Reservation probability min{1, V / (N (1-(1-rho)^M))}: drives the
    expected number of contenders toward the V available mini-slots."""
    if not isinstance(N, int) or N < 1:
        raise ConfigError(f"N must be an integer >= 1, got {N!r}")
    if not isinstance(V, int) or V < 1:
        raise ConfigError(f"V must be an integer >= 1, got {V!r}")
    if not isinstance(M, int) or not 2 <= M <= V + 1:
        raise ConfigError(f"M must be an integer in 2..V+1 = 2..{V + 1}, got {M!r}")
    if not 0.0 < rho <= 1.0:
        raise ConfigError(f"rho must be in (0, 1], got {rho!r}")
    p = 1.0 - (1.0 - rho) ** M
    return min(1.0, V / (N * p))


def aaoi_from_moments(moments: MomentDecomposition) -> float:
    """Average age from the renewal moments: E[Y^2]/(2 E[Y]) + E[S] - 1/2."""
    if not moments.e_Y > 0.0:
        raise ConfigError(f"e_Y must be positive, got {moments.e_Y!r}")
    return moments.e_Y2 / (2.0 * moments.e_Y) + moments.e_S - 0.5


def _waiting_moments(M: int, p: float) -> tuple[float, float]:
    # W/M is geometric on {0,1,...} with success probability p
    e_w = (1.0 - p) * M / p
    e_w2 = (p * p - 3.0 * p + 2.0) * M * M / (p * p)
    return e_w, e_w2


def _fsa_rd_moments(config: ProtocolConfig, profile: SlotProfile) -> MomentDecomposition:
    M, rho = config.M, config.rho
    p = config.frame_arrival_prob
    q = config.gamma * profile.p_s
    e_w, e_w2 = _waiting_moments(M, p)
    # K/M is geometric on {1,2,...}: retries continue until delivery
    e_k = M / q
    e_k2 = M * M * (2.0 - q) / (q * q)
    e_y = e_w + e_k
    e_y2 = e_w2 + e_k2 + 2.0 * e_w * e_k
    e_l = 1.0 / rho - M * (1.0 - p) / p
    e_z = M / (1.0 - (1.0 - q) * (1.0 - p))
    e_alpha = profile.expected_alpha()
    e_s = e_l + e_z - M + e_alpha
    return MomentDecomposition(e_w, e_w2, e_k, e_k2, e_y, e_y2, e_s, e_l, e_z, e_alpha)


def _one_shot_moments(config: ProtocolConfig, profile: SlotProfile) -> MomentDecomposition:
    M, rho = config.M, config.rho
    p = config.frame_arrival_prob
    q = config.gamma * profile.p_s
    e_w, e_w2 = _waiting_moments(M, p)
    # failure discards the update, so K restarts behind a fresh wait W':
    # E[K] = q M + (1-q)(M + E[W] + E[K]) and likewise for the square
    e_k = (M + (1.0 - q) * e_w) / q
    e_k2 = (
        M * M
        + (1.0 - q) * (e_w2 + 2.0 * e_k * e_w + 2.0 * M * (e_k + e_w))
    ) / q
    e_y = e_w + e_k
    e_y2 = e_w2 + e_k2 + 2.0 * e_w * e_k
    e_l = 1.0 / rho - M * (1.0 - p) / p
    e_alpha = profile.expected_alpha()
    e_s = e_l + e_alpha
    return MomentDecomposition(e_w, e_w2, e_k, e_k2, e_y, e_y2, e_s, e_l, M * 1.0, e_alpha)


def _check_consistency(direct: float, via_moments: float) -> None:
    tol = max(MOMENT_CONSISTENCY_TOL, 1e-12 * abs(direct))
    if abs(direct - via_moments) > tol:
        raise ArithmeticError(
            f"AAoI routes disagree: direct {direct} vs moments {via_moments}"
        )


def aaoi_fsa_rd(config: ProtocolConfig) -> AnalysisReport:
    """Average age of the multi-attempt scheme via the stationary chain."""
    P = build_transition_matrix(config)
    pi = steady_state(P)
    profile = p_success_fsa_rd(config, pi)
    if profile.p_s < _PS_UNDERFLOW:
        return _infinite_report(config, Scheme.FSA_RD, profile)
    moments = _fsa_rd_moments(config, profile)
    M, rho = config.M, config.rho
    q = config.gamma * profile.p_s
    aaoi = M / q - M / 2.0 + 1.0 / rho + moments.e_alpha - 0.5
    _check_consistency(aaoi, aaoi_from_moments(moments))
    return AnalysisReport(config, Scheme.FSA_RD, profile, moments, aaoi)


def _one_shot_prefix(config: ProtocolConfig, p_s: float) -> float:
    M, rho = config.M, config.rho
    p = config.frame_arrival_prob
    q = config.gamma * p_s
    return M / (q * p) - M * (1.0 - p) / p + 1.0 / rho


def aaoi_fsa_rd_one(config: ProtocolConfig) -> AnalysisReport:
    """Closed-form average age of the one-shot scheme, plus its upper bound."""
    profile = p_success_fsa_rd_one(config)
    if profile.p_s < _PS_UNDERFLOW:
        return _infinite_report(config, Scheme.FSA_RD_ONE, profile)
    moments = _one_shot_moments(config, profile)
    M = config.M
    prefix = _one_shot_prefix(config, profile.p_s)
    aaoi = prefix + (moments.e_alpha - (M + 1) / 2.0)
    _check_consistency(aaoi, aaoi_from_moments(moments))
    return AnalysisReport(
        config, Scheme.FSA_RD_ONE, profile, moments, aaoi,
        upper_bound=prefix + (M - 1) / 2.0,
    )


def aaoi_upper_bound_one(config: ProtocolConfig) -> float:
    """Upper bound on the one-shot average age obtained by replacing the
    reception-slot index with its maximum M; the gap is at most M."""
    profile = p_success_fsa_rd_one(config)
    if profile.p_s < _PS_UNDERFLOW:
        return math.inf
    return _one_shot_prefix(config, profile.p_s) + (config.M - 1) / 2.0


def _infinite_report(config, scheme, profile) -> AnalysisReport:
    inf = math.inf
    p = config.frame_arrival_prob
    e_l = 1.0 / config.rho - config.M * (1.0 - p) / p
    moments = MomentDecomposition(*([inf] * 6), inf, e_l, inf, inf)
    return AnalysisReport(config, scheme, profile, moments, inf,
                          upper_bound=inf if scheme is Scheme.FSA_RD_ONE else None,
                          aaoi_infinite=True)


# -- vectorized one-shot evaluation over gamma grids --------------------------
#
# Thinning a Binomial(N-1, p) peer count by the reservation probability gives
# a Binomial(N-1, p*gamma) contender count, collapsing the double sum. The
# faithful sum-by-sum route above stays the reference; tests pin agreement.

@lru_cache(maxsize=None)
def _one_shot_coefficients(N: int, V: int, M: int):
    """coef[n2, 0] = success share, coef[n2, a] = share of data slot a, for a
    tagged contender among n2 reserving peers."""
    coef = np.zeros((N, M))
    for n2 in range(N):
        contenders = n2 + 1
        singles = singleton_count_pmf(contenders, V)
        for n3 in range(1, min(V, contenders) + 1):
            r = singles[n3] / contenders
            coef[n2, 0] += r * min(n3, M - 1)
            coef[n2, 1:min(M, n3 + 1)] += r
    return coef


def one_shot_aaoi_grid(N: int, V: int, M: int, rho: float, gammas) -> np.ndarray:
    """Closed-form one-shot AAoI evaluated over a gamma grid."""
    gammas = np.asarray(gammas, dtype=float)
    if np.any(gammas <= 0.0) or np.any(gammas > 1.0):
        raise ConfigError("gamma grid values must be in (0, 1]")
    p = 1.0 - (1.0 - rho) ** M
    coef = _one_shot_coefficients(N, V, M)
    ks = np.arange(N)
    log_comb = np.array(
        [math.lgamma(N) - math.lgamma(k + 1) - math.lgamma(N - k) for k in ks]
    )
    out = np.empty(len(gammas))
    for idx, g in enumerate(gammas):
        t = p * g
        if t < 1.0:
            logs = log_comb + ks * np.log(t) + (N - 1 - ks) * np.log1p(-t)
            w = np.exp(logs)
        else:
            w = np.where(ks == N - 1, 1.0, 0.0)
        p_s = float(w @ coef[:, 0])
        phi = w @ coef[:, 1:]
        e_alpha = float(np.arange(2, M + 1) @ phi) / p_s
        q = g * p_s
        out[idx] = (M / (q * p) - M * (1.0 - p) / p + 1.0 / rho) + (
            e_alpha - (M + 1) / 2.0
        )
    return out

"""Discrete-time Markov chain over the number of active users at frame starts."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import connected_components

from .combinatorics import binomial_pmf, successful_update_pmf
from .config import ConfigError, ConvergenceError, DegenerateChainError, ProtocolConfig

ROW_SUM_TOL = 1e-12
STATIONARY_TOL = 1e-10
_ENTRY_CLAMP = 1e-14


@dataclass
class StochasticMatrix:
    """Dense row-stochastic matrix; entries[i, j] = Pr(j active next | i active now)."""

    n_states: int
    entries: np.ndarray

    def __post_init__(self):
        if self.entries.shape != (self.n_states, self.n_states):
            raise ValueError("entries must be a square n_states x n_states array")
        row_sums = self.entries.sum(axis=1)
        if np.any(self.entries < 0.0) or np.any(np.abs(row_sums - 1.0) > ROW_SUM_TOL):
            raise ValueError("matrix is not row-stochastic within tolerance")

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            for i, row in enumerate(self.entries):
                writer.writerow([i] + [repr(x) for x in row])


@dataclass
class SteadyState:
    """Stationary distribution pi over 0..N active users."""

    pi: np.ndarray

    def __post_init__(self):
        if abs(float(self.pi.sum()) - 1.0) > STATIONARY_TOL or np.any(self.pi < 0.0):
            raise ValueError("pi is not a probability vector within tolerance")

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            for i, p in enumerate(self.pi):
                writer.writerow([i, repr(p)])


def build_transition_matrix(config: ProtocolConfig) -> StochasticMatrix:
    """Transition law of the active-user count.

    From i active users, s of them succeed within the frame (capped singleton
    mixture), and the N-i+s users without a pending update turn active with
    probability p = 1-(1-rho)^M each.
    """
    if not isinstance(config, ProtocolConfig):
        raise ConfigError("config must be a ProtocolConfig")
    n, m = config.N, config.M
    p = config.frame_arrival_prob
    P = np.zeros((n + 1, n + 1))
    for i in range(n + 1):
        success = successful_update_pmf(i, config.gamma, config.V, config.M)
        for j in range(n + 1):
            terms = []
            for s in range(max(0, i - j), min(i, m - 1) + 1):
                terms.append(
                    success[s] * binomial_pmf(n - i + s, j - i + s, p)
                )
            entry = math.fsum(terms)
            if entry < 0.0:
                if entry < -_ENTRY_CLAMP:
                    raise ArithmeticError(f"transition entry P[{i}][{j}] = {entry}")
                entry = 0.0
            P[i, j] = entry
    return StochasticMatrix(n + 1, P)


def _count_recurrent_classes(P: np.ndarray) -> int:
    """Number of closed communicating classes of the support digraph."""
    support = P > 0.0
    n_comp, labels = connected_components(support, directed=True, connection="strong")
    closed = 0
    for c in range(n_comp):
        members = labels == c
        if not support[members][:, ~members].any():
            closed += 1
    return closed


def _power_iteration(P: np.ndarray, tol: float, max_iters: int = 200_000) -> np.ndarray:
    pi = np.full(P.shape[0], 1.0 / P.shape[0])
    for _ in range(max_iters):
        nxt = pi @ P
        nxt /= nxt.sum()
        if np.max(np.abs(nxt - pi)) <= 0.1 * tol:
            return nxt
        pi = nxt
    raise ConvergenceError(
        f"power iteration did not reach residual {tol} in {max_iters} steps"
    )


def steady_state(P: StochasticMatrix, method: str = "direct") -> SteadyState:
    """Solve pi = pi P, sum(pi) = 1.

    Direct dense solve of (P^T - I) pi = 0 with one equation replaced by the
    normalization row; a power-iteration fallback covers ill-conditioned
    solves. Ergodicity is detected, not assumed: multiple closed classes
    raise DegenerateChainError.
    """
    A = P.entries
    n = P.n_states
    pi = None
    if method not in ("direct", "power"):
        raise ValueError(f"unknown method {method!r}")
    if method == "direct":
        system = A.T - np.eye(n)
        system[-1, :] = 1.0
        rhs = np.zeros(n)
        rhs[-1] = 1.0
        try:
            candidate = np.linalg.solve(system, rhs)
            residual = np.max(np.abs(candidate @ A - candidate))
            if residual <= STATIONARY_TOL and np.all(candidate >= -1e-12):
                pi = candidate
        except np.linalg.LinAlgError:
            pi = None
    if pi is None:
        if _count_recurrent_classes(A) > 1:
            raise DegenerateChainError(
                "multiple recurrent classes: stationary distribution is not unique"
            )
        pi = _power_iteration(A, STATIONARY_TOL)
    pi = np.clip(pi, 0.0, None)
    pi /= pi.sum()
    residual = np.max(np.abs(pi @ A - pi))
    if residual > STATIONARY_TOL:
        raise ConvergenceError(f"stationary residual {residual} exceeds {STATIONARY_TOL}")
    return SteadyState(pi)

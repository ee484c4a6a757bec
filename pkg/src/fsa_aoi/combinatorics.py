"""Exact probability kernels for the reservation contention.

Counts of reserving users are binomial; the number of mini-slots picked by
exactly one contender (a "singleton", the success condition) follows a
balls-into-bins occupancy law computed here by an exact integer recursion.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .config import ConfigError

#: Sums of clamped probabilities may drift this far from 1.
PMF_SUM_TOL = 1e-10
#: Floating-point noise below this magnitude is clamped to zero.
NEG_CLAMP = 1e-12


@dataclass(frozen=True)
class CountPmf:
    """Probability mass function over counts 0..support_max."""

    support_max: int
    mass: tuple[float, ...]

    def __post_init__(self):
        if len(self.mass) != self.support_max + 1:
            raise ValueError("mass length must be support_max + 1")
        total = math.fsum(self.mass)
        if abs(total - 1.0) > PMF_SUM_TOL:
            raise ValueError(f"pmf mass sums to {total}, expected 1")

    def __getitem__(self, s: int) -> float:
        return self.mass[s] if 0 <= s <= self.support_max else 0.0

    def mean(self) -> float:
        return math.fsum(s * p for s, p in enumerate(self.mass))

    def tail(self, s0: int) -> float:
        """Total mass at counts >= s0."""
        return math.fsum(self.mass[max(s0, 0):])


def _clamped(values) -> tuple[float, ...]:
    out = []
    for v in values:
        if v < 0.0:
            if v < -NEG_CLAMP:
                raise ArithmeticError(f"probability {v} below clamping threshold")
            v = 0.0
        out.append(v)
    return tuple(out)


def binomial_pmf(n: int, k: int, p: float) -> float:
    """Pr(Binomial(n, p) = k), exact combinatorics for small n,
    log-domain for n > 60 so counts up to ~10^3 users stay finite."""
    if k < 0 or k > n:
        return 0.0
    if p <= 0.0:
        return 1.0 if k == 0 else 0.0
    if p >= 1.0:
        return 1.0 if k == n else 0.0
    if n <= 60:
        return math.comb(n, k) * p**k * (1.0 - p) ** (n - k)
    log_pmf = (
        math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)
        + k * math.log(p) + (n - k) * math.log1p(-p)
    )
    return math.exp(log_pmf)


def reservation_count_pmf(i: int, gamma: float) -> CountPmf:
    """PMF of how many of i active users decide to reserve, Binomial(i, gamma)."""
    if not isinstance(i, int) or i < 0:
        raise ConfigError(f"i must be an integer >= 0, got {i!r}")
    if not 0.0 <= gamma <= 1.0:
        raise ConfigError(f"gamma must be in [0, 1], got {gamma!r}")
    return CountPmf(i, _clamped(binomial_pmf(i, j, gamma) for j in range(i + 1)))


@lru_cache(maxsize=None)
def _placement_count(v: int, j: int, s: int) -> int:
    """Number of ways to place j labeled balls into v labeled bins so that
    exactly s bins hold exactly one ball. Exact integer recursion over bins."""
    if v == 0:
        return 1 if j == 0 and s == 0 else 0
    total = 0
    for k in range(j + 1):
        s_rest = s - 1 if k == 1 else s
        if s_rest < 0:
            continue
        total += math.comb(j, k) * _placement_count(v - 1, j - k, s_rest)
    return total


def singleton_count_pmf(j: int, V: int) -> CountPmf:
    """PMF of the number of mini-slots chosen by exactly one of j contenders,
    each picking one of V mini-slots uniformly at random.

    Computed from exact integer placement counts; the equivalent alternating
    sum cancels catastrophically for moderate j, V and is kept only as a
    cross-check (see alternating_sum_singleton_pmf).
    """
    if not isinstance(j, int) or j < 0:
        raise ConfigError(f"j must be an integer >= 0, got {j!r}")
    if not isinstance(V, int) or V < 1:
        raise ConfigError(f"V must be an integer >= 1, got {V!r}")
    support = min(V, j)
    denom = V**j
    return CountPmf(
        support, tuple(_placement_count(V, j, s) / denom for s in range(support + 1))
    )


def alternating_sum_singleton_pmf(j: int, V: int) -> CountPmf:
    """Same law as singleton_count_pmf via the inclusion-exclusion alternating
    sum, evaluated in exact rational arithmetic. Cross-check only; unusable in
    floating point beyond small j, V."""
    if not isinstance(j, int) or j < 0:
        raise ConfigError(f"j must be an integer >= 0, got {j!r}")
    if not isinstance(V, int) or V < 1:
        raise ConfigError(f"V must be an integer >= 1, got {V!r}")
    support = min(V, j)
    mass = []
    for s in range(support + 1):
        acc = Fraction(0)
        for m in range(s, min(V, j) + 1):
            acc += (
                Fraction((-1) ** m * (V - m) ** (j - m))
                / (
                    math.factorial(m - s)
                    * math.factorial(V - m)
                    * math.factorial(j - m)
                )
            )
        term = (
            Fraction((-1) ** s * math.factorial(V) * math.factorial(j))
            / (Fraction(V) ** j * math.factorial(s))
        ) * acc
        mass.append(float(term))
    return CountPmf(support, _clamped(mass))


def capped_success_pmf(j: int, V: int, M: int) -> CountPmf:
    """PMF of how many of j contenders win a data slot: the singleton law with
    all mass at >= M-1 winners folded onto M-1, since a frame has M-1 data
    slots. Support 0..min(M-1, V, j)."""
    if not isinstance(M, int) or not 2 <= M <= V + 1:
        raise ConfigError(f"M must be an integer in 2..V+1 = 2..{V + 1}, got {M!r}")
    base = singleton_count_pmf(j, V)
    support = min(M - 1, base.support_max)
    mass = list(base.mass[:support])
    mass.append(base.tail(support))
    return CountPmf(support, _clamped(mass))


def successful_update_pmf(i: int, gamma: float, V: int, M: int) -> CountPmf:
    """PMF of how many of i active users deliver their update in one frame:
    binomial reservation counts mixed with the capped singleton law."""
    reserve = reservation_count_pmf(i, gamma)
    support = min(i, M - 1)
    mass = [0.0] * (support + 1)
    terms: list[list[float]] = [[] for _ in range(support + 1)]
    for j in range(i + 1):
        w = reserve[j]
        capped = capped_success_pmf(j, V, M)
        for s in range(capped.support_max + 1):
            terms[s].append(w * capped.mass[s])
    for s in range(support + 1):
        mass[s] = math.fsum(terms[s])
    return CountPmf(support, _clamped(mass))

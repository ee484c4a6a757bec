"""Parameter search: exhaustive (gamma, M) for the multi-attempt scheme,
rule-guided M search for the one-shot scheme, simulated tau grid for ALOHA."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .analysis import aaoi_fsa_rd, aaoi_fsa_rd_one, near_optimal_gamma
from .config import (
    AlohaConfig,
    AmbiguousOptimumError,
    ConfigError,
    ProtocolConfig,
    SchemeKind,
    SchemeSpec,
)

_TIE_TOL = 1e-9


@dataclass
class OptimizationResult:
    scheme: SchemeKind
    best_gamma: float | None
    best_tau: float | None
    best_M: int | None
    best_aaoi: float
    search_trace: list[dict] = field(default_factory=list)

    def to_records(self) -> list[dict]:
        return [dict(t) for t in self.search_trace]


def default_gamma_grid(step: float = 0.01) -> list[float]:
    """Grid step..1.0 inclusive; 0 is excluded since the age diverges there."""
    n = round(1.0 / step)
    return [i * step for i in range(1, n + 1)]


def _pick_best(trace, value_key="aaoi"):
    # ties broken toward smaller M, then smaller gamma/tau, for determinism
    best = None
    for rec in trace:
        if best is None or rec[value_key] < best[value_key] - _TIE_TOL:
            best = rec
        elif abs(rec[value_key] - best[value_key]) <= _TIE_TOL:
            key = (rec.get("M", 0), rec.get("gamma", rec.get("tau", 0.0)))
            best_key = (best.get("M", 0), best.get("gamma", best.get("tau", 0.0)))
            if key < best_key:
                best = rec
    return best


def optimize_fsa_rd(N: int, V: int, rho: float,
                    gamma_grid: list[float] | None = None) -> OptimizationResult:
    """Exhaustive search over the gamma grid and every frame size 2..V+1.

    The default grid is 0.01-spaced plus, for each M, the one-shot rule's
    gamma so the rule-optimal point is always evaluated.
    """
    explicit = gamma_grid is not None
    if explicit and not gamma_grid:
        raise ConfigError("gamma_grid must be nonempty")
    if explicit and any(not 0.0 < g <= 1.0 for g in gamma_grid):
        raise ConfigError("gamma_grid values must be in (0, 1]")
    trace = []
    for M in range(2, V + 2):
        if explicit:
            grid_m = sorted(set(gamma_grid))
        else:
            grid_m = sorted(set(default_gamma_grid()) | {near_optimal_gamma(N, V, M, rho)})
        for g in grid_m:
            report = aaoi_fsa_rd(ProtocolConfig(N=N, M=M, V=V, rho=rho, gamma=g))
            trace.append({"gamma": g, "M": M, "aaoi": report.aaoi})
    best = _pick_best(trace)
    return OptimizationResult(SchemeKind.FSA_RD, best["gamma"], None, best["M"],
                              best["aaoi"], trace)


def optimize_fsa_rd_one(N: int, V: int, rho: float) -> OptimizationResult:
    """For each frame size, take the near-optimal reservation probability and
    keep the best of the V resulting closed-form ages."""
    trace = []
    for M in range(2, V + 2):
        g = near_optimal_gamma(N, V, M, rho)
        report = aaoi_fsa_rd_one(ProtocolConfig(N=N, M=M, V=V, rho=rho, gamma=g))
        trace.append({"gamma": g, "M": M, "aaoi": report.aaoi})
    best = _pick_best(trace)
    return OptimizationResult(SchemeKind.FSA_RD_ONE, best["gamma"], None, best["M"],
                              best["aaoi"], trace)


def optimize_slotted_aloha(N: int, rho: float, tau_grid: list[float],
                           sim_budget_slots: int, replications: int,
                           seed: int, force: bool = False,
                           warmup_slots: int | None = None) -> OptimizationResult:
    """Minimize the replication-averaged simulated age over the tau grid.

    Declines to declare an optimum when the winner's neighbors overlap it
    within 95% half-widths, unless force is set.
    """
    from .simulator import replicate  # deferred: numba compilation is costly

    if not tau_grid:
        raise ConfigError("tau_grid must be nonempty")
    if any(not 0.0 < t <= 1.0 for t in tau_grid):
        raise ConfigError("tau_grid values must be in (0, 1]")
    if sim_budget_slots < 10**6:
        raise ConfigError(f"sim_budget_slots must be >= 1e6, got {sim_budget_slots}")
    if warmup_slots is None:
        warmup_slots = 10**4
    taus = sorted(set(tau_grid))
    trace = []
    for t in taus:
        spec = SchemeSpec(SchemeKind.SLOTTED_ALOHA, AlohaConfig(N=N, rho=rho, tau=t))
        agg = replicate(spec, sim_budget_slots, warmup_slots, seed, replications)
        trace.append({"tau": t, "aaoi": agg.network_aaoi, "ci_halfwidth": agg.ci_halfwidth})
    best = _pick_best(trace)
    idx = trace.index(best)
    result = OptimizationResult(SchemeKind.SLOTTED_ALOHA, None, best["tau"], None,
                                best["aaoi"], trace)
    for j in (idx - 1, idx + 1):
        if 0 <= j < len(trace):
            gap = trace[j]["aaoi"] - best["aaoi"]
            if gap < best["ci_halfwidth"] + trace[j]["ci_halfwidth"] and not force:
                raise AmbiguousOptimumError(
                    f"tau={best['tau']} and tau={trace[j]['tau']} overlap within "
                    f"confidence half-widths; rerun with more budget or force",
                    result=result,
                )
    return result

"""Monte Carlo simulation with exact age bookkeeping.

Ground truth for the analytical results: the reservation schemes are run
frame by frame (exact in distribution versus the slot-level process), the
ALOHA baseline slot by slot. Fixed seeds give bit-identical results.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .analysis import MomentDecomposition
from .config import (
    AlohaConfig,
    ConfigError,
    InsufficientSamplesError,
    ProtocolConfig,
    SchemeKind,
    SchemeSpec,
)

_MAX_HORIZON = 10**9  # keeps int64 age accumulators far from overflow
_MIN_MOMENT_SAMPLES = 1000

TRACE_COLUMNS = _kernels.TRACE_COLS
derive_seed = _kernels.derive_seed


@dataclass(frozen=True)
class SimResult:
    scheme: SchemeSpec
    horizon_slots: int
    warmup_slots: int
    seed: int
    network_aaoi: float
    per_user_aaoi: tuple[float, ...]
    reception_count: int
    ci_halfwidth: float
    empirical_moments: MomentDecomposition | None = None
    trace: np.ndarray | None = None
    active_hist_batches: np.ndarray | None = None
    transition_counts: np.ndarray | None = None

    def to_json(self) -> str:
        """Canonical serialization; identical seeds yield identical bytes."""
        cfg = self.scheme.config
        payload = {
            "scheme": self.scheme.kind.value,
            "config": {k: getattr(cfg, k) for k in cfg.__dataclass_fields__},
            "horizon_slots": self.horizon_slots,
            "warmup_slots": self.warmup_slots,
            "seed": self.seed,
            "network_aaoi": self.network_aaoi,
            "per_user_aaoi": list(self.per_user_aaoi),
            "reception_count": self.reception_count,
            "ci_halfwidth": self.ci_halfwidth,
        }
        if self.empirical_moments is not None:
            payload["empirical_moments"] = {
                k: getattr(self.empirical_moments, k)
                for k in self.empirical_moments.__dataclass_fields__
            }
        return json.dumps(payload, sort_keys=True)


def _validate_run(horizon_slots: int, warmup_slots: int) -> None:
    if not isinstance(horizon_slots, int) or not isinstance(warmup_slots, int):
        raise ConfigError("horizon_slots and warmup_slots must be integers")
    if warmup_slots < 0 or horizon_slots <= warmup_slots:
        raise ConfigError(
            f"need horizon_slots > warmup_slots >= 0, got {horizon_slots}, {warmup_slots}"
        )
    if horizon_slots > _MAX_HORIZON:
        raise ConfigError(f"horizon_slots above overflow guard {_MAX_HORIZON}")


def simulate(scheme: SchemeSpec, horizon_slots: int, warmup_slots: int,
             seed: int, trace: bool = False,
             trace_limit: int = 1_000_000) -> SimResult:
    """Run one replication and return age statistics.

    For the framed schemes the horizon is truncated to whole frames. The
    per-reception trace (service, inter-departure and waiting samples) is
    opt-in to keep long runs memory-light; `trace_limit` caps recorded rows
    while the run itself continues.
    """
    _validate_run(horizon_slots, warmup_slots)
    if not isinstance(scheme, SchemeSpec):
        raise ConfigError("scheme must be a SchemeSpec")
    seed = int(seed) % (1 << 64)
    seed_word = np.uint64(seed)

    if scheme.kind is SchemeKind.SLOTTED_ALOHA:
        if trace:
            raise ConfigError("per-reception traces are only recorded for the framed schemes")
        cfg: AlohaConfig = scheme.config
        aoi_sum, receptions = _kernels.aloha_kernel(
            cfg.N, cfg.rho, cfg.tau, horizon_slots, warmup_slots, seed_word
        )
        per_user = tuple(aoi_sum / (horizon_slots - warmup_slots))
        return SimResult(scheme, horizon_slots, warmup_slots, seed,
                         float(np.mean(per_user)), per_user, int(receptions), 0.0)

    cfg: ProtocolConfig = scheme.config
    n_frames = horizon_slots // cfg.M
    effective_horizon = n_frames * cfg.M
    if effective_horizon <= warmup_slots:
        raise ConfigError("horizon too short: no full frame after warmup")
    one_shot = scheme.kind is SchemeKind.FSA_RD_ONE
    aoi_sum, receptions, hist, transitions, trace_rows = _kernels.fsa_kernel(
        cfg.N, cfg.M, cfg.V, cfg.rho, cfg.gamma, one_shot,
        n_frames, warmup_slots, seed_word, trace, trace_limit if trace else 0,
    )
    per_user = tuple(aoi_sum / (effective_horizon - warmup_slots))
    moments = None
    trace_out = None
    if trace:
        trace_out = np.array(trace_rows)
        if len(trace_out) >= _MIN_MOMENT_SAMPLES:
            moments = _moments_from_rows(trace_out)
    return SimResult(scheme, effective_horizon, warmup_slots, seed,
                     float(np.mean(per_user)), per_user, int(receptions), 0.0,
                     empirical_moments=moments, trace=trace_out,
                     active_hist_batches=np.array(hist),
                     transition_counts=np.array(transitions))


def _moments_from_rows(rows: np.ndarray) -> MomentDecomposition:
    col = {name: rows[:, i].astype(float) for i, name in enumerate(TRACE_COLUMNS)}
    alpha = col["alpha"]
    return MomentDecomposition(
        e_W=col["W"].mean(), e_W2=(col["W"] ** 2).mean(),
        e_K=col["K"].mean(), e_K2=(col["K"] ** 2).mean(),
        e_Y=col["Y"].mean(), e_Y2=(col["Y"] ** 2).mean(),
        e_S=col["S"].mean(), e_l=col["l"].mean(), e_Z=col["Z"].mean(),
        e_alpha=alpha.mean(), var_alpha=alpha.var(),
        e_X=col["X"].mean(), e_X2=(col["X"] ** 2).mean(),
    )


def empirical_moment_report(result: SimResult) -> MomentDecomposition:
    """Sample moments of the per-reception quantities from a traced run."""
    if result.trace is None:
        raise ConfigError("simulation was run without trace recording")
    if len(result.trace) < _MIN_MOMENT_SAMPLES:
        raise InsufficientSamplesError(
            f"{len(result.trace)} receptions recorded, need {_MIN_MOMENT_SAMPLES}"
        )
    return _moments_from_rows(result.trace)


def export_trace_csv(result: SimResult, path) -> None:
    """Per-reception samples, grouped by user with a per-user running index."""
    if result.trace is None:
        raise ConfigError("simulation was run without trace recording")
    rows = result.trace
    order = np.lexsort((rows[:, 1], rows[:, 0]))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["reception_index"] + list(TRACE_COLUMNS[1:]))
        index = 0
        last_user = None
        for i in order:
            user = rows[i, 0]
            index = index + 1 if user == last_user else 1
            last_user = user
            writer.writerow([index] + [int(x) for x in rows[i, 1:]])


@dataclass(frozen=True)
class ReplicatedResult:
    """Replication average of independent runs with derived seeds."""

    scheme: SchemeSpec
    replications: int
    base_seed: int
    network_aaoi: float
    ci_halfwidth: float
    runs: tuple[SimResult, ...]


def replicate(scheme: SchemeSpec, horizon_slots: int, warmup_slots: int,
              seed: int, replications: int) -> ReplicatedResult:
    """Average independent replications; 95% half-width via Student t."""
    if replications < 1:
        raise ConfigError(f"replications must be >= 1, got {replications}")
    runs = tuple(
        simulate(scheme, horizon_slots, warmup_slots, derive_seed(seed, r))
        for r in range(replications)
    )
    values = np.array([r.network_aaoi for r in runs])
    mean = float(values.mean())
    if replications == 1:
        hw = 0.0
    else:
        from scipy.stats import t as student_t

        sd = float(values.std(ddof=1))
        hw = float(student_t.ppf(0.975, replications - 1)) * sd / math.sqrt(replications)
    return ReplicatedResult(scheme, replications, seed, mean, hw, runs)

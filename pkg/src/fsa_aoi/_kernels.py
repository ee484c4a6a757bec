"""Numba-compiled simulation kernels.

All randomness comes from a splitmix64 stream so that runs are bit-identical
for a given seed on any platform. Draws are consumed in a fixed order: per
frame, contention decisions for users 0..N-1, then arrival samples for users
0..N-1 (per slot for the ALOHA kernel).
"""
from __future__ import annotations

import numpy as np
from numba import njit

U64 = np.uint64
_GAMMA64 = U64(0x9E3779B97F4A7C15)
_MIX1 = U64(0xBF58476D1CE4E5B9)
_MIX2 = U64(0x94D049BB133111EB)
_INV53 = 1.1102230246251565e-16  # 2**-53

# trace row layout
TRACE_COLS = ("user", "t_prime", "generation_slot", "S", "X", "Y", "W", "K",
              "alpha", "l", "Z")
N_TRACE_COLS = len(TRACE_COLS)
HIST_BATCHES = 32


@njit(cache=True, inline="always")
def _mix(z):
    z = (z ^ (z >> U64(30))) * _MIX1
    z = (z ^ (z >> U64(27))) * _MIX2
    return z ^ (z >> U64(31))


@njit(cache=True, inline="always")
def _next_u01(state):
    state[0] = state[0] + _GAMMA64
    return (_mix(state[0]) >> U64(11)) * _INV53


@njit(cache=True)
def _seed_state(seed):
    out = np.empty(1, dtype=np.uint64)
    out[0] = _mix(U64(seed))
    return out


def derive_seed(seed: int, index: int) -> int:
    """Replication seed: splitmix64 mix of seed + index * golden gamma."""
    z = (int(seed) + index * 0x9E3779B97F4A7C15) % (1 << 64)
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) % (1 << 64)
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) % (1 << 64)
    return (z ^ (z >> 31)) % (1 << 64)


@njit(cache=True, inline="always")
def _acc_span(v0, a, b, lo, hi):
    """Sum of v0 + (t - a) for t in [a, b] clipped to [lo, hi]."""
    t0 = a if a > lo else lo
    t1 = b if b < hi else hi
    if t1 < t0:
        return np.int64(0)
    first = v0 + (t0 - a)
    last = v0 + (t1 - a)
    return (t1 - t0 + 1) * (first + last) // 2


@njit(cache=True)
def fsa_kernel(N, M, V, rho, gamma, one_shot, n_frames, warmup, seed,
               collect_trace, trace_cap):
    """Frame-level simulation of the reservation schemes.

    Exact in distribution versus the slot-level process: within a frame only
    the presence and position of the last status arrival matter, and the age
    curve between receptions is arithmetic, so both are handled in closed
    form per frame.
    """
    state = _seed_state(seed)
    horizon = n_frames * M
    p_any = 1.0 - (1.0 - rho) ** M
    log1m_rho = np.log(1.0 - rho) if rho < 1.0 else 0.0

    buf_gen = np.full(N, -1, dtype=np.int64)       # transmit packet generation slot
    buf_frame = np.full(N, -1, dtype=np.int64)     # frame it was first scheduled
    pend_gen = np.full(N, -1, dtype=np.int64)      # latest arrival this frame
    delta = np.ones(N, dtype=np.int64)             # AoI at current frame start
    await_fresh = np.zeros(N, dtype=np.bool_)
    g_slot = np.full(N, -1, dtype=np.int64)        # first fresh-availability frame start
    prev_t_prime = np.full(N, -1, dtype=np.int64)
    prev_t_star = np.full(N, -1, dtype=np.int64)

    aoi_sum = np.zeros(N, dtype=np.int64)
    occ = np.zeros(V, dtype=np.int64)
    slot_user = np.full(V, -1, dtype=np.int64)
    recv_offset = np.zeros(N, dtype=np.int64)
    recv_value = np.zeros(N, dtype=np.int64)

    hist = np.zeros((HIST_BATCHES, N + 1), dtype=np.int64)
    transitions = np.zeros((N + 1, N + 1), dtype=np.int64)
    trace = np.empty((trace_cap if collect_trace else 0, N_TRACE_COLS),
                     dtype=np.int64)
    trace_len = 0
    reception_count = 0

    warmup_frames = (warmup + M - 1) // M
    pw_frames = n_frames - warmup_frames
    prev_active = np.int64(-1)

    for k in range(n_frames):
        fs = k * M
        # promote last frame's arrivals into the transmit buffer
        for n in range(N):
            if one_shot:
                buf_gen[n] = pend_gen[n]
                if buf_gen[n] >= 0:
                    buf_frame[n] = k
            elif pend_gen[n] >= 0:
                buf_gen[n] = pend_gen[n]
                buf_frame[n] = k
            pend_gen[n] = -1
            if await_fresh[n] and buf_gen[n] >= 0:
                g_slot[n] = fs
                await_fresh[n] = False

        active = np.int64(0)
        for n in range(N):
            if buf_gen[n] >= 0:
                active += 1
        if fs >= warmup and pw_frames > 0:
            b = (k - warmup_frames) * HIST_BATCHES // pw_frames
            if b >= HIST_BATCHES:
                b = HIST_BATCHES - 1
            hist[b, active] += 1
            if prev_active >= 0:
                transitions[prev_active, active] += 1
            prev_active = active

        # reservation contention
        for v in range(V):
            occ[v] = 0
            slot_user[v] = -1
        for n in range(N):
            if buf_gen[n] >= 0:
                if _next_u01(state) < gamma:
                    v = int(_next_u01(state) * V)
                    if v >= V:
                        v = V - 1
                    occ[v] += 1
                    slot_user[v] = n
        for n in range(N):
            recv_offset[n] = 0

        rank = 0
        for v in range(V):
            if occ[v] == 1:
                rank += 1
                if rank > M - 1:
                    break
                n = slot_user[v]
                t_prime = fs + rank
                gen = buf_gen[n]
                s_val = t_prime - gen + 1
                if t_prime >= warmup:
                    reception_count += 1
                if collect_trace and t_prime >= warmup and prev_t_prime[n] >= 0 \
                        and trace_len < trace_cap:
                    t_star = fs + M
                    trace[trace_len, 0] = n
                    trace[trace_len, 1] = t_prime
                    trace[trace_len, 2] = gen
                    trace[trace_len, 3] = s_val
                    trace[trace_len, 4] = t_prime - prev_t_prime[n]
                    trace[trace_len, 5] = t_star - prev_t_star[n]
                    trace[trace_len, 6] = g_slot[n] - prev_t_star[n]
                    trace[trace_len, 7] = t_star - g_slot[n]
                    trace[trace_len, 8] = rank + 1
                    trace[trace_len, 9] = buf_frame[n] * M - gen
                    trace[trace_len, 10] = (k - buf_frame[n] + 1) * M
                    trace_len += 1
                recv_offset[n] = rank
                recv_value[n] = s_val
                prev_t_prime[n] = t_prime
                prev_t_star[n] = fs + M
                await_fresh[n] = True
                g_slot[n] = -1
                buf_gen[n] = -1
                buf_frame[n] = -1

        # arrivals during this frame: only the latest one survives
        for n in range(N):
            if rho >= 1.0:
                pend_gen[n] = fs + M - 1
            elif _next_u01(state) < p_any:
                u = _next_u01(state)
                gap = int(np.ceil(np.log(1.0 - u * p_any) / log1m_rho)) - 1
                if gap < 0:
                    gap = 0
                elif gap > M - 1:
                    gap = M - 1
                pend_gen[n] = fs + (M - 1 - gap)

        # age accounting over the frame's slots
        for n in range(N):
            r = recv_offset[n]
            if r == 0:
                aoi_sum[n] += _acc_span(delta[n], fs, fs + M - 1, warmup, horizon - 1)
                delta[n] += M
            else:
                aoi_sum[n] += _acc_span(delta[n], fs, fs + r, warmup, horizon - 1)
                s_val = recv_value[n]
                if r < M - 1:
                    aoi_sum[n] += _acc_span(s_val, fs + r + 1, fs + M - 1,
                                            warmup, horizon - 1)
                delta[n] = s_val + (M - r - 1)

    return (aoi_sum, reception_count, hist, transitions,
            trace[:trace_len] if collect_trace else trace)


@njit(cache=True)
def aloha_kernel(N, rho, tau, horizon, warmup, seed):
    """Slot-level slotted ALOHA with Bernoulli arrivals.

    An arrival becomes eligible the slot after its generation, replacing any
    buffered packet (sent or not); holders transmit with probability tau and
    a slot succeeds only with a unique transmitter network-wide.
    """
    state = _seed_state(seed)
    buf_gen = np.full(N, -1, dtype=np.int64)
    pend_gen = np.full(N, -1, dtype=np.int64)
    delta = np.ones(N, dtype=np.int64)
    aoi_sum = np.zeros(N, dtype=np.int64)
    reception_count = 0

    for t in range(horizon):
        tx_count = 0
        tx_user = -1
        for n in range(N):
            if pend_gen[n] >= 0:
                buf_gen[n] = pend_gen[n]
                pend_gen[n] = -1
            if _next_u01(state) < rho:
                pend_gen[n] = t
            if buf_gen[n] >= 0 and _next_u01(state) < tau:
                tx_count += 1
                tx_user = n
        if t >= warmup:
            for n in range(N):
                aoi_sum[n] += delta[n]
        if tx_count == 1:
            delta[tx_user] = t - buf_gen[tx_user] + 1
            buf_gen[tx_user] = -1
            if t >= warmup:
                reception_count += 1
            for n in range(N):
                if n != tx_user:
                    delta[n] += 1
        else:
            for n in range(N):
                delta[n] += 1

    return aoi_sum, reception_count

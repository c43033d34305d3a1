"""Pure-NumPy simulation kernels (reference backend).

Trajectory i consumes its own counter-based stream: draw k of trajectory i
is a pure function of (seed, i, k) through a splitmix-style mixer on 64-bit
counters.  Results are therefore independent of batch partitioning and match
the jit backend's scalar loops draw for draw.
"""

from __future__ import annotations

import numpy as np

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
MIX1 = np.uint64(0xBF58476D1CE4E5B9)
MIX2 = np.uint64(0x94D049BB133111EB)
TWO_NEG53 = 2.0**-53
_U1 = np.uint64(1)


def _mix(z):
    z = z ^ (z >> np.uint64(30))
    z = z * MIX1
    z = z ^ (z >> np.uint64(27))
    z = z * MIX2
    return z ^ (z >> np.uint64(31))


def traj_keys(seed, n_traj):
    idx = np.arange(1, n_traj + 1, dtype=np.uint64)
    return _mix(np.uint64(seed) + idx * GOLDEN)


def _uniform(keys, counters):
    """Open-interval (0, 1) uniforms for the given per-trajectory counters."""
    bits = _mix(keys + (counters + _U1) * GOLDEN)
    return ((bits >> np.uint64(11)).astype(np.float64) + 0.5) * TWO_NEG53


def _pick(cdf_rows, u):
    """First index whose cdf entry exceeds u, rowwise."""
    return (cdf_rows <= u[:, None]).sum(axis=1).astype(np.int64)


def absorbing_continuous(seed, n_traj, horizon, m0_cdf, dest_cdf, inv_rate, rate_ok, killing):
    """Jump-chain simulation of the absorbing process up to the horizon.

    Returns (tau, terminal, intv, jumps): absorption times (inf if censored),
    final state (-1 once absorbed), the killing integral along the path, and
    the jump count.
    """
    n = killing.size
    keys = traj_keys(seed, n_traj)
    counters = np.zeros(n_traj, dtype=np.uint64)

    u = _uniform(keys, counters)
    counters += _U1
    state = _pick(m0_cdf[None, :].repeat(n_traj, axis=0), u)

    t = np.zeros(n_traj)
    intv = np.zeros(n_traj)
    tau = np.full(n_traj, np.inf)
    terminal = state.copy()
    jumps = np.zeros(n_traj, dtype=np.int64)

    active = np.flatnonzero(rate_ok[state])
    while active.size:
        s = state[active]
        u = _uniform(keys[active], counters[active])
        counters[active] += _U1
        h = -np.log(u) * inv_rate[s]
        censor = t[active] + h >= horizon
        idx = active[censor]
        intv[idx] += killing[state[idx]] * (horizon - t[idx])
        t[idx] = horizon
        active = active[~censor]
        if not active.size:
            break
        h = h[~censor]
        s = state[active]
        t[active] += h
        intv[active] += killing[s] * h
        u = _uniform(keys[active], counters[active])
        counters[active] += _U1
        dest = _pick(dest_cdf[s], u)
        jumps[active] += 1
        absorbed = dest == n
        idx = active[absorbed]
        tau[idx] = t[idx]
        terminal[idx] = -1
        cont = active[~absorbed]
        state[cont] = dest[~absorbed]
        terminal[cont] = state[cont]
        active = cont[rate_ok[state[cont]]]
    return tau, terminal, intv, jumps


def nonkilled_continuous(seed, n_traj, t_end, m0_cdf, dest_cdf, inv_rate, rate_ok, killing):
    """Simulate the non-killed jump chain to time t_end, tracking int V ds.

    Returns (final_state, intv)."""
    keys = traj_keys(seed, n_traj)
    counters = np.zeros(n_traj, dtype=np.uint64)

    u = _uniform(keys, counters)
    counters += _U1
    state = _pick(m0_cdf[None, :].repeat(n_traj, axis=0), u)

    t = np.zeros(n_traj)
    intv = np.zeros(n_traj)
    alive = np.ones(n_traj, dtype=bool)

    stuck = ~rate_ok[state]
    intv[stuck] += killing[state[stuck]] * t_end
    alive[stuck] = False

    active = np.flatnonzero(alive)
    while active.size:
        s = state[active]
        u = _uniform(keys[active], counters[active])
        counters[active] += _U1
        h = -np.log(u) * inv_rate[s]
        done = t[active] + h >= t_end
        idx = active[done]
        intv[idx] += killing[state[idx]] * (t_end - t[idx])
        active = active[~done]
        if not active.size:
            break
        h = h[~done]
        s = state[active]
        t[active] += h
        intv[active] += killing[s] * h
        u = _uniform(keys[active], counters[active])
        counters[active] += _U1
        state[active] = _pick(dest_cdf[s], u)
        stuck = ~rate_ok[state[active]]
        idx = active[stuck]
        intv[idx] += killing[state[idx]] * (t_end - t[idx])
        active = active[~stuck]
    return state, intv


def absorbing_discrete(seed, n_traj, steps, m0_cdf, row_cdf):
    """Step simulation of the absorbing kernel.

    Returns (tau, terminal): absorption step counts (-1 if censored at the
    step horizon) and the final state (-1 once absorbed)."""
    n = row_cdf.shape[0]
    keys = traj_keys(seed, n_traj)
    counters = np.zeros(n_traj, dtype=np.uint64)

    u = _uniform(keys, counters)
    counters += _U1
    state = _pick(m0_cdf[None, :].repeat(n_traj, axis=0), u)
    tau = np.full(n_traj, -1, dtype=np.int64)
    terminal = state.copy()
    active = np.arange(n_traj)
    for step in range(1, steps + 1):
        if not active.size:
            break
        u = _uniform(keys[active], counters[active])
        counters[active] += _U1
        dest = _pick(row_cdf[state[active]], u)
        absorbed = dest == n
        idx = active[absorbed]
        tau[idx] = step
        terminal[idx] = -1
        cont = active[~absorbed]
        state[cont] = dest[~absorbed]
        terminal[cont] = state[cont]
        active = cont
    return tau, terminal


def nonkilled_discrete(seed, n_traj, steps, m0_cdf, p_cdf, log_surv, surv_ok):
    """Simulate the survival-normalized kernel, accumulating log weights.

    Returns (final_state, logw) with logw = sum of log row-survivals along
    the path (-inf if a zero-survival row is hit)."""
    keys = traj_keys(seed, n_traj)
    counters = np.zeros(n_traj, dtype=np.uint64)

    u = _uniform(keys, counters)
    counters += _U1
    state = _pick(m0_cdf[None, :].repeat(n_traj, axis=0), u)
    logw = np.zeros(n_traj)
    active = np.arange(n_traj)
    for _ in range(steps):
        if not active.size:
            break
        dead = ~surv_ok[state[active]]
        logw[active[dead]] = -np.inf
        active = active[~dead]
        if not active.size:
            break
        logw[active] += log_surv[state[active]]
        u = _uniform(keys[active], counters[active])
        counters[active] += _U1
        state[active] = _pick(p_cdf[state[active]], u)
    return state, logw

"""Jit-compiled simulation kernels (numba backend).

Scalar per-trajectory loops compiled with @njit; the draw sequence matches
the NumPy reference backend exactly (same counter-based stream per
trajectory), so both backends sample identical jump chains.
"""

from __future__ import annotations

import numpy as np
from numba import njit

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
MIX1 = np.uint64(0xBF58476D1CE4E5B9)
MIX2 = np.uint64(0x94D049BB133111EB)
TWO_NEG53 = 2.0**-53


@njit(cache=True)
def _mix(z):
    z = z ^ (z >> np.uint64(30))
    z = z * MIX1
    z = z ^ (z >> np.uint64(27))
    z = z * MIX2
    return z ^ (z >> np.uint64(31))


@njit(cache=True)
def _key(seed, i):
    return _mix(np.uint64(seed) + np.uint64(i + 1) * GOLDEN)


@njit(cache=True)
def _u01(key, k):
    bits = _mix(key + (k + np.uint64(1)) * GOLDEN)
    return (np.float64(bits >> np.uint64(11)) + 0.5) * TWO_NEG53


@njit(cache=True)
def _pick_vec(cdf, u):
    j = 0
    while u >= cdf[j]:
        j += 1
    return j


@njit(cache=True)
def _pick_row(cdf, row, u):
    j = 0
    while u >= cdf[row, j]:
        j += 1
    return j


@njit(cache=True)
def absorbing_continuous(seed, n_traj, horizon, m0_cdf, dest_cdf, inv_rate, rate_ok, killing):
    n = killing.size
    tau = np.full(n_traj, np.inf)
    terminal = np.empty(n_traj, dtype=np.int64)
    intv = np.zeros(n_traj)
    jumps = np.zeros(n_traj, dtype=np.int64)
    for i in range(n_traj):
        key = _key(seed, i)
        k = np.uint64(0)
        u = _u01(key, k)
        k += np.uint64(1)
        x = _pick_vec(m0_cdf, u)
        t = 0.0
        acc = 0.0
        nj = 0
        term = x
        while True:
            if not rate_ok[x]:
                term = x
                break
            u = _u01(key, k)
            k += np.uint64(1)
            h = -np.log(u) * inv_rate[x]
            if t + h >= horizon:
                acc += killing[x] * (horizon - t)
                t = horizon
                term = x
                break
            t += h
            acc += killing[x] * h
            u = _u01(key, k)
            k += np.uint64(1)
            d = _pick_row(dest_cdf, x, u)
            nj += 1
            if d == n:
                tau[i] = t
                term = -1
                break
            x = d
            term = x
        terminal[i] = term
        intv[i] = acc
        jumps[i] = nj
    return tau, terminal, intv, jumps


@njit(cache=True)
def nonkilled_continuous(seed, n_traj, t_end, m0_cdf, dest_cdf, inv_rate, rate_ok, killing):
    state = np.empty(n_traj, dtype=np.int64)
    intv = np.zeros(n_traj)
    for i in range(n_traj):
        key = _key(seed, i)
        k = np.uint64(0)
        u = _u01(key, k)
        k += np.uint64(1)
        x = _pick_vec(m0_cdf, u)
        t = 0.0
        acc = 0.0
        while True:
            if not rate_ok[x]:
                acc += killing[x] * (t_end - t)
                break
            u = _u01(key, k)
            k += np.uint64(1)
            h = -np.log(u) * inv_rate[x]
            if t + h >= t_end:
                acc += killing[x] * (t_end - t)
                break
            t += h
            acc += killing[x] * h
            u = _u01(key, k)
            k += np.uint64(1)
            x = _pick_row(dest_cdf, x, u)
        state[i] = x
        intv[i] = acc
    return state, intv


@njit(cache=True)
def absorbing_discrete(seed, n_traj, steps, m0_cdf, row_cdf):
    n = row_cdf.shape[0]
    tau = np.full(n_traj, -1, dtype=np.int64)
    terminal = np.empty(n_traj, dtype=np.int64)
    for i in range(n_traj):
        key = _key(seed, i)
        k = np.uint64(0)
        u = _u01(key, k)
        k += np.uint64(1)
        x = _pick_vec(m0_cdf, u)
        term = x
        for step in range(1, steps + 1):
            u = _u01(key, k)
            k += np.uint64(1)
            d = _pick_row(row_cdf, x, u)
            if d == n:
                tau[i] = step
                term = -1
                break
            x = d
            term = x
        terminal[i] = term
    return tau, terminal


@njit(cache=True)
def nonkilled_discrete(seed, n_traj, steps, m0_cdf, p_cdf, log_surv, surv_ok):
    state = np.empty(n_traj, dtype=np.int64)
    logw = np.zeros(n_traj)
    for i in range(n_traj):
        key = _key(seed, i)
        k = np.uint64(0)
        u = _u01(key, k)
        k += np.uint64(1)
        x = _pick_vec(m0_cdf, u)
        acc = 0.0
        for _ in range(steps):
            if not surv_ok[x]:
                acc = -np.inf
                break
            acc += log_surv[x]
            u = _u01(key, k)
            k += np.uint64(1)
            x = _pick_row(p_cdf, x, u)
        state[i] = x
        logw[i] = acc
    return state, logw

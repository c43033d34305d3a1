"""Trajectory simulation and weighted-path estimation.

Absorbing paths are simulated exactly (exponential holding times, jump
chain); the killing integral along a path is exact because the killing rate
is piecewise constant between jumps, so there is no time discretization
anywhere.  The weighted-path estimator simulates the non-killed process and
reweights by ``exp(-int_0^t V(X_s) ds)`` (continuous) or by the product of
row survival probabilities (discrete).

All sampling is driven by a counter-based stream: trajectory i is a pure
function of (seed, i), so a fixed :class:`SimConfig` reproduces results
bit for bit and batches can run in any order or in parallel.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _backend
from .core import ContinuousAbsorbingChain, DiscreteAbsorbingChain, probability_vector
from .errors import NegativeTime, TooFewSurvivors
from .evolution import conditioned_law


@dataclass(frozen=True)
class SimConfig:
    n_traj: int
    horizon: float
    seed: int = 0

    def __post_init__(self):
        if self.n_traj < 1:
            raise ValueError("n_traj must be >= 1")
        if not self.horizon > 0:
            raise ValueError("horizon must be positive")


@dataclass
class AbsorptionSample:
    """Per-trajectory absorption data.

    ``tau``: absorption times, ``inf`` when censored at the horizon;
    ``terminal``: final state index, ``-1`` once absorbed;
    ``weights``: ``exp(-int V ds)`` along the realized path (1 for discrete
    chains, which have no killing integral);
    ``jumps``: number of jump events (continuous chains).
    """

    tau: np.ndarray
    terminal: np.ndarray
    weights: np.ndarray
    jumps: np.ndarray
    config: SimConfig

    @property
    def absorbed(self):
        return self.terminal == -1

    def summary(self):
        absorbed = self.absorbed
        out = {
            "n_traj": int(self.tau.size),
            "n_absorbed": int(absorbed.sum()),
            "n_censored": int((~absorbed).sum()),
            "seed": self.config.seed,
            "horizon": float(self.config.horizon),
        }
        if absorbed.any():
            finite = self.tau[absorbed]
            out["tau_mean"] = float(finite.mean())
            out["tau_max"] = float(finite.max())
        return out


def _continuous_tables(chain, m0):
    off = np.array(chain.rates)
    np.fill_diagonal(off, 0.0)
    total = off.sum(axis=1) + chain.killing
    rate_ok = total > 0
    inv_rate = np.where(rate_ok, 1.0 / np.where(rate_ok, total, 1.0), 0.0)
    n = chain.n
    dest = np.zeros((n, n + 1))
    dest[:, :n] = np.where(rate_ok[:, None], off / np.where(rate_ok, total, 1.0)[:, None], 0.0)
    dest[:, n] = np.where(rate_ok, chain.killing / np.where(rate_ok, total, 1.0), 0.0)
    dest_cdf = np.minimum(np.cumsum(dest, axis=1), 1.0)
    dest_cdf[:, -1] = 1.0
    m0_cdf = np.minimum(np.cumsum(m0), 1.0)
    m0_cdf[-1] = 1.0
    return m0_cdf, dest_cdf, inv_rate, rate_ok


def simulate(chain, m0, cfg: SimConfig):
    """Simulate the absorbing process; deterministic under cfg.seed."""
    m0 = probability_vector(m0, chain.n)
    kern = _backend.kernels()
    if isinstance(chain, ContinuousAbsorbingChain):
        m0_cdf, dest_cdf, inv_rate, rate_ok = _continuous_tables(chain, m0)
        tau, terminal, intv, jumps = kern.absorbing_continuous(
            int(cfg.seed), int(cfg.n_traj), float(cfg.horizon),
            m0_cdf, dest_cdf, inv_rate, rate_ok, np.asarray(chain.killing),
        )
        weights = np.exp(-intv)
        return AbsorptionSample(tau=tau, terminal=terminal, weights=weights,
                                jumps=jumps, config=cfg)
    if isinstance(chain, DiscreteAbsorbingChain):
        steps = int(round(float(cfg.horizon)))
        if abs(float(cfg.horizon) - steps) > 1e-9 or steps < 1:
            raise ValueError("discrete horizons must be positive integers")
        n = chain.n
        rows = np.zeros((n, n + 1))
        rows[:, :n] = chain.sub
        rows[:, n] = chain.absorb
        row_cdf = np.minimum(np.cumsum(rows, axis=1), 1.0)
        row_cdf[:, -1] = 1.0
        m0_cdf = np.minimum(np.cumsum(m0), 1.0)
        m0_cdf[-1] = 1.0
        tau_steps, terminal = kern.absorbing_discrete(
            int(cfg.seed), int(cfg.n_traj), steps, m0_cdf, row_cdf,
        )
        tau = np.where(tau_steps < 0, np.inf, tau_steps.astype(float))
        return AbsorptionSample(tau=tau, terminal=terminal,
                                weights=np.ones(cfg.n_traj),
                                jumps=np.zeros(cfg.n_traj, dtype=np.int64),
                                config=cfg)
    raise TypeError(f"unsupported chain type {type(chain).__name__}")


def estimate_conditioned(chain, mu0, t, cfg: SimConfig, min_expected=100.0):
    """Empirical law of the survivors at time t, with binomial standard errors.

    The exact survival probability gates the run: the expected survivor
    count must reach ``min_expected``.
    """
    if t <= 0:
        raise NegativeTime(f"t = {t!r} must be positive")
    _, survival = conditioned_law(chain, mu0, t)
    expected = survival * cfg.n_traj
    if expected < min_expected:
        raise TooFewSurvivors(
            f"expected survivors {expected:.1f} < {min_expected:g}; "
            f"raise n_traj above {int(np.ceil(min_expected / survival))}"
        )
    sample = simulate(chain, mu0, SimConfig(n_traj=cfg.n_traj, horizon=t, seed=cfg.seed))
    alive = ~sample.absorbed
    m = int(alive.sum())
    if m == 0:
        raise TooFewSurvivors("no trajectory survived to t")
    counts = np.bincount(sample.terminal[alive], minlength=chain.n).astype(float)
    est = counts / m
    se = np.sqrt(np.clip(est * (1.0 - est), 0.0, None) / m)
    return est, se


def feynman_kac(chain, mu0, t, f, cfg: SimConfig):
    """Weighted-path (ratio) estimator of the conditioned mean of f at time t.

    Simulates the non-killed process and reweights; returns the estimate and
    its delta-method standard error.
    """
    mu0 = probability_vector(mu0, chain.n)
    f = np.asarray(f, dtype=float)
    kern = _backend.kernels()
    if isinstance(chain, ContinuousAbsorbingChain):
        if t < 0:
            raise NegativeTime(f"t = {t!r} < 0")
        off = np.array(chain.rates)
        np.fill_diagonal(off, 0.0)
        total = off.sum(axis=1)
        rate_ok = total > 0
        inv_rate = np.where(rate_ok, 1.0 / np.where(rate_ok, total, 1.0), 0.0)
        dest = np.where(rate_ok[:, None], off / np.where(rate_ok, total, 1.0)[:, None], 0.0)
        dest_cdf = np.minimum(np.cumsum(dest, axis=1), 1.0)
        dest_cdf[:, -1] = 1.0
        m0_cdf = np.minimum(np.cumsum(mu0), 1.0)
        m0_cdf[-1] = 1.0
        final, intv = kern.nonkilled_continuous(
            int(cfg.seed), int(cfg.n_traj), float(t),
            m0_cdf, dest_cdf, inv_rate, rate_ok, np.asarray(chain.killing),
        )
        w = np.exp(-intv)
    elif isinstance(chain, DiscreteAbsorbingChain):
        steps = int(round(float(t)))
        if abs(float(t) - steps) > 1e-9 or steps < 0:
            raise ValueError("discrete times must be nonnegative integers")
        surv = chain.sub.sum(axis=1)
        surv_ok = surv > 0
        P = np.where(surv_ok[:, None], chain.sub / np.where(surv_ok, surv, 1.0)[:, None], 0.0)
        p_cdf = np.minimum(np.cumsum(P, axis=1), 1.0)
        p_cdf[:, -1] = 1.0
        with np.errstate(divide="ignore"):
            log_surv = np.where(surv_ok, np.log(np.where(surv_ok, surv, 1.0)), -np.inf)
        m0_cdf = np.minimum(np.cumsum(mu0), 1.0)
        m0_cdf[-1] = 1.0
        final, logw = kern.nonkilled_discrete(
            int(cfg.seed), int(cfg.n_traj), steps, m0_cdf, p_cdf, log_surv, surv_ok,
        )
        w = np.exp(logw)
    else:
        raise TypeError(f"unsupported chain type {type(chain).__name__}")
    fx = f[final]
    den = float(w.mean())
    if den <= 0:
        raise TooFewSurvivors("all path weights vanished")
    theta = float((w * fx).mean() / den)
    resid = w * fx - theta * w
    se = float(np.std(resid, ddof=1) / (np.sqrt(len(w)) * den))
    return theta, se


def survival_estimate(sample: AbsorptionSample, t):
    """Empirical P[tau > t] from a simulated sample (t within the horizon)."""
    if t > sample.config.horizon:
        raise ValueError("t exceeds the simulation horizon")
    return float((sample.tau > t).mean())

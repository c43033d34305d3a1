"""Exact transient analysis of the conditioned dynamics.

The conditioned law at time t is ``mu_t = mu_0 exp(t (L - V)) / survival``
for continuous chains and ``mu_0 Q^l / survival`` at integer steps for
discrete ones.  Reversible chains are propagated through a symmetric
eigendecomposition (backward stable, one factorization for any number of
times); the general path uses scaling-and-squaring.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .core import DiscreteAbsorbingChain
from .doob import DoobChain
from .errors import (
    NegativeTime,
    ReferenceZero,
    TotalMassUnderflow,
)
from .spectral import PerronData

UNDERFLOW = 1e-300


class Propagator:
    """Evaluates row-vector propagation v -> v exp(t A) for many times t.

    If ``weight`` is supplied and conjugating by sqrt(weight) symmetrizes A,
    the propagator uses that eigendecomposition; otherwise each requested
    time falls back to ``scipy.linalg.expm``.
    """

    def __init__(self, A, weight=None, sym_tol=1e-12):
        self.A = np.asarray(A, dtype=float)
        self._sym = None
        if weight is not None:
            d = np.sqrt(np.asarray(weight, dtype=float))
            B = (d[:, None] * self.A) / d[None, :]
            scale = max(1.0, float(np.abs(B).max()))
            if float(np.abs(B - B.T).max()) <= sym_tol * scale:
                w, U = np.linalg.eigh(0.5 * (B + B.T))
                self._sym = (d, w, U)
        self._cache = {}

    def matrix(self, t):
        """Dense exp(t A)."""
        if t < 0:
            raise NegativeTime(f"t = {t!r} < 0")
        key = float(t)
        if key not in self._cache:
            if self._sym is not None:
                # A = D^{-1} B D with B symmetric, so exp(tA) = D^{-1} U e^{tw} U^T D
                d, w, U = self._sym
                M = (U * np.exp(t * w)) @ U.T
                M = (M / d[:, None]) * d[None, :]
            else:
                M = sla.expm(t * self.A)
            self._cache[key] = M
        return self._cache[key]

    def act(self, v, t):
        return np.asarray(v, dtype=float) @ self.matrix(t)


def _killed_propagator(chain):
    weight = None
    if chain.irreducible:
        from .spectral import check_reversible, invariant_measure

        eta = invariant_measure(chain)
        if check_reversible(chain, eta):
            weight = eta
    return Propagator(chain.sub_generator(), weight=weight)


def _check_time(t):
    if t < 0:
        raise NegativeTime(f"t = {t!r} < 0")


def _discrete_steps(t):
    steps = int(round(float(t)))
    if abs(float(t) - steps) > 1e-9:
        raise ValueError(f"discrete chains evolve at integer times, got {t!r}")
    if steps < 0:
        raise NegativeTime(f"t = {t!r} < 0")
    return steps


def conditioned_law(chain, mu0, t, propagator=None):
    """Law conditioned on survival at time t, and the survival probability."""
    mu0 = np.asarray(mu0, dtype=float)
    if isinstance(chain, DiscreteAbsorbingChain):
        steps = _discrete_steps(t)
        v = mu0 @ np.linalg.matrix_power(chain.sub, steps)
    else:
        _check_time(t)
        prop = propagator or _killed_propagator(chain)
        v = prop.act(mu0, t)
    v = np.clip(v, 0.0, None)
    survival = float(v.sum())
    if survival < UNDERFLOW:
        raise TotalMassUnderflow(f"survival mass {survival!r} at t = {t!r}")
    return v / survival, survival


def doob_law(doob: DoobChain, mu_tilde0, t, propagator=None):
    """Time-t law of the transformed (ergodic) chain started from mu_tilde0."""
    mu_tilde0 = np.asarray(mu_tilde0, dtype=float)
    if doob.discrete:
        steps = _discrete_steps(t)
        v = mu_tilde0 @ np.linalg.matrix_power(doob.generator, steps)
    else:
        _check_time(t)
        prop = propagator or Propagator(doob.generator, weight=doob.invariant)
        v = prop.act(mu_tilde0, t)
    v = np.clip(v, 0.0, None)
    return v / v.sum()


def distances(mu, ref):
    """(tv, chi2, kl) of mu against a strictly positive reference law.

    ``tv`` is the analyst's total variation ``sum |mu - ref|`` (twice the
    probabilist convention, maximum value 2); ``chi2 = sum (mu/ref - 1)^2
    ref``; ``kl = sum mu log(mu/ref)`` with 0 log 0 = 0.
    """
    mu = np.asarray(mu, dtype=float)
    ref = np.asarray(ref, dtype=float)
    if ref.min() <= 0:
        raise ReferenceZero("reference law must be strictly positive")
    delta = (mu - ref) / ref
    tv = float(np.abs(mu - ref).sum())
    chi2 = float((delta**2 * ref).sum())
    # kl as the sum of nonnegative Bregman terms ref * h(mu/ref) with
    # h(f) = f log f - f + 1; summing mu log(mu/ref) directly cancels
    # catastrophically near mu = ref, so the near-1 branch uses log1p
    small = np.abs(delta) < 0.5
    with np.errstate(divide="ignore", invalid="ignore"):
        near = ref * ((1.0 + delta) * np.log1p(np.where(small, delta, 0.0)) - delta)
        ratio = np.where(mu > 0, mu / ref, 1.0)
        far = np.where(mu > 0, mu * np.log(ratio), 0.0) - mu + ref
    kl = float(np.where(small, near, far).sum())
    return tv, chi2, kl


def worst_case_tv(chain, p: PerronData, t, propagator=None):
    """Worst total variation to nu over all initial laws at time t.

    The maximum over point masses equals the supremum over all initial laws:
    any conditioned law is a convex combination of point-mass-started
    conditioned laws (with survival-proportional weights), and total
    variation is convex.
    """
    nu = p.nu
    if isinstance(chain, DiscreteAbsorbingChain):
        steps = _discrete_steps(t)
        M = np.linalg.matrix_power(chain.sub, steps)
    else:
        _check_time(t)
        prop = propagator or _killed_propagator(chain)
        M = prop.matrix(t)
    M = np.clip(M, 0.0, None)
    mass = M.sum(axis=1)
    if mass.min() < UNDERFLOW:
        raise TotalMassUnderflow(f"survival mass underflow at t = {t!r}")
    laws = M / mass[:, None]
    tvs = np.abs(laws - nu[None, :]).sum(axis=1)
    k = int(np.argmax(tvs))
    return float(tvs[k]), chain.states.labels[k]


def survival_curve(chain, m0, times, propagator=None):
    """P[tau > t] on a time grid."""
    m0 = np.asarray(m0, dtype=float)
    times = np.asarray(times, dtype=float)
    if np.any(np.diff(times) < 0) or (times.size and times[0] < 0):
        raise NegativeTime("times must be nondecreasing and nonnegative")
    if isinstance(chain, DiscreteAbsorbingChain):
        out = []
        for t in times:
            steps = _discrete_steps(t)
            out.append(float((m0 @ np.linalg.matrix_power(chain.sub, steps)).sum()))
        return np.array(out)
    prop = propagator or _killed_propagator(chain)
    return np.array([float(prop.act(m0, t).sum()) for t in times])


@dataclass
class EvolutionReport:
    """Exact conditioned evolution along a time grid.

    ``chi2``/``kl`` are the chi-square and relative-entropy divergences of the
    conditioned law from nu; ``chi2_doob``/``kl_doob`` are the corresponding
    divergences of the transformed flow from its invariant law.
    """

    times: np.ndarray
    laws: np.ndarray          # shape (T, n)
    survival: np.ndarray
    tv: np.ndarray
    chi2: np.ndarray
    kl: np.ndarray
    chi2_doob: np.ndarray
    kl_doob: np.ndarray

    def rows(self):
        for i, t in enumerate(self.times):
            yield {
                "t": float(t),
                "survival": float(self.survival[i]),
                "tv_actual": float(self.tv[i]),
                "I_t": float(self.chi2[i]),
                "I_tilde_t": float(self.chi2_doob[i]),
                "J_t": float(self.kl[i]),
                "J_tilde_t": float(self.kl_doob[i]),
            }


def evolution_report(chain, p: PerronData, doob: DoobChain, mu0, times):
    """Evaluate the conditioned flow, its transform, and their divergences."""
    mu0 = np.asarray(mu0, dtype=float)
    times = np.asarray(times, dtype=float)
    nu = p.nu
    mu_tilde0 = p.phi * mu0
    mu_tilde0 = mu_tilde0 / mu_tilde0.sum()

    if isinstance(chain, DiscreteAbsorbingChain):
        prop = None
        dprop = None
    else:
        prop = _killed_propagator(chain)
        dprop = Propagator(doob.generator, weight=doob.invariant)

    laws = np.empty((times.size, chain.n))
    survival = np.empty(times.size)
    tv = np.empty(times.size)
    chi2 = np.empty(times.size)
    kl = np.empty(times.size)
    chi2_d = np.empty(times.size)
    kl_d = np.empty(times.size)
    for i, t in enumerate(times):
        mu_t, s = conditioned_law(chain, mu0, t, propagator=prop)
        laws[i] = mu_t
        survival[i] = s
        tv[i], chi2[i], kl[i] = distances(mu_t, nu)
        mu_td = doob_law(doob, mu_tilde0, t, propagator=dprop)
        _, chi2_d[i], kl_d[i] = distances(mu_td, doob.invariant)
    return EvolutionReport(
        times=times,
        laws=laws,
        survival=survival,
        tv=tv,
        chi2=chi2,
        kl=kl,
        chi2_doob=chi2_d,
        kl_doob=kl_d,
    )

"""Functional-inequality constants: spectral gaps, log-Sobolev brackets,
comparison bounds, and canonical-path estimates for discrete chains.

Log-Sobolev convention: ``alpha`` is the largest constant with

    alpha * sum_x g(x)^2 log(g(x)^2 / m[g^2]) m(x)  <=  E(g, g)

where ``E`` is the Dirichlet form of the reversible pair ``(G, m)``.  Under
this normalization ``alpha <= gap / 2``, with equality on the symmetric
two-state chain.  The constant is reported as a certified bracket (a proven
lower bound and trial-function upper bounds) plus a point estimate from a
seeded projected-gradient search; the optimization is nonconvex, so only the
bracket is a certificate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DiscreteAbsorbingChain
from .doob import symmetrize
from .errors import (
    NoPathToAbsorption,
    NotReversible,
    NotSymmetric,
    OptimizerStall,
)
from .spectral import PerronData

DETAILED_BALANCE_TOL = 1e-10


@dataclass
class FunctionalConstants:
    gap_tilde: float                # spectral gap of the symmetrized transform
    gap_base: float                 # gap of the additive symmetrization of L in L^2(eta)
    eq_lower: float                 # eigenvector-ratio comparison lower bound on gap_tilde
    lsi_lower: float
    lsi_estimate: float
    lsi_upper: float
    path_A: float | None = None     # canonical-path Poincare constant, discrete only


def _detailed_balance_defect(G, m):
    flows = m[:, None] * G
    defect = np.abs(flows - flows.T)
    np.fill_diagonal(defect, 0.0)
    return float(defect.max()), max(1.0, float(np.abs(flows).max()))


def spectral_gap(sym_generator, invariant, tol=DETAILED_BALANCE_TOL):
    """Smallest nonzero eigenvalue of the negative of a reversible generator.

    Equals the reciprocal of the optimal Poincare constant for the pair.
    """
    G = np.asarray(sym_generator, dtype=float)
    m = np.asarray(invariant, dtype=float)
    defect, scale = _detailed_balance_defect(G, m)
    if defect > tol * scale:
        raise NotSymmetric(f"detailed balance fails by {defect:g}")
    d = np.sqrt(m)
    B = (d[:, None] * G) / d[None, :]
    w = np.linalg.eigvalsh(-0.5 * (B + B.T))
    w = np.sort(w)
    if abs(w[0]) > 1e-8 * max(1.0, float(np.abs(w).max())):
        raise NotSymmetric(f"no zero mode: bottom eigenvalue {w[0]:g}")
    return float(w[1])


def base_gap(chain, eta):
    """Spectral gap of the additive symmetrization of L in L^2(eta)."""
    return spectral_gap(symmetrize(chain.rates, eta), eta)


def compare_gap(p: PerronData, gap_base):
    """Eigenvector-ratio comparison: gap_tilde >= (phi_min phi*_min)/(phi_max phi*_max) * gap_base."""
    if p.discrete:
        raise TypeError("compare_gap applies to continuous Perron data")
    num = p.phi.min() * p.phi_star.min()
    den = p.phi.max() * p.phi_star.max()
    return float(num / den * gap_base)


def dirichlet_energy(sym_generator, invariant, g):
    """E(g, g) = (1/2) sum of conductance * (g(y) - g(x))^2 for a reversible pair.

    The conductance form is nonnegative term by term, so the energy of
    near-constant functions does not suffer cancellation.
    """
    G = np.asarray(sym_generator, dtype=float)
    m = np.asarray(invariant, dtype=float)
    g = np.asarray(g, dtype=float)
    C = m[:, None] * G
    np.fill_diagonal(C, 0.0)
    diff = g[None, :] - g[:, None]
    return float(0.5 * (C * diff**2).sum())


def _entropy(g2, m):
    s = float(g2 @ m)
    if s <= 0:
        return 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(g2 > 0, g2 * np.log(np.where(g2 > 0, g2 / s, 1.0)), 0.0)
    return float(terms @ m)


# Below this entropy level (for g normalized to m[g^2] = 1) the quotient is
# dominated by rounding noise; such g are treated as effectively constant.
ENTROPY_FLOOR = 1e-7


def _lsi_quotient(G, m, g):
    g = g / np.sqrt(float(m @ (g * g)))
    ent = _entropy(g * g, m)
    if ent <= ENTROPY_FLOOR:
        return np.inf
    return dirichlet_energy(G, m, g) / ent


def lsi_lower_bound(eta_min, gap):
    """Proven gap-to-entropy lower bound: alpha >= c(m_min) * gap.

    ``c(p) = (1 - 2p)/log(1/p - 1)``, taken to be exactly 1/2 in the
    boundary case ``m_min = 1/2`` (its continuous limit).
    """
    if abs(eta_min - 0.5) < 1e-12:
        factor = 0.5
    else:
        factor = (1.0 - 2.0 * eta_min) / np.log(1.0 / eta_min - 1.0)
    return float(factor * gap)


def lsi_constant(sym_generator, invariant, mode="full", restarts=50, seed=0, tol=1e-8):
    """Bracket (lower, estimate, upper) for the log-Sobolev constant.

    ``mode="bracket"`` skips the gradient search and reports the best trial
    value as the estimate.  With a fixed ``seed`` the result is deterministic;
    restarts are independent and merged by a plain minimum.
    """
    G = np.asarray(sym_generator, dtype=float)
    m = np.asarray(invariant, dtype=float)
    defect, scale = _detailed_balance_defect(G, m)
    if defect > DETAILED_BALANCE_TOL * scale:
        raise NotSymmetric(f"detailed balance fails by {defect:g}")
    n = m.size
    gap = spectral_gap(G, m)
    lower = lsi_lower_bound(float(m.min()), gap)

    # trial functions: smoothed indicators and gap-eigenfunction perturbations
    d = np.sqrt(m)
    B = (d[:, None] * G) / d[None, :]
    w, U = np.linalg.eigh(-0.5 * (B + B.T))
    g2 = U[:, 1] / d
    g2 = g2 / np.sqrt(m @ g2**2)
    trials = []
    for x in range(n):
        for delta in (1e-3, 1e-2, 0.1, 1.0):
            e = np.full(n, delta)
            e[x] += 1.0
            trials.append(np.sqrt(e))
    for eps in (1e-3, 3e-3, 1e-2, 0.1, 1.0):
        trials.append(1.0 + eps * g2)
    upper = min(_lsi_quotient(G, m, g) for g in trials)

    if mode == "bracket":
        return lower, upper, upper

    # projected-gradient descent on the scale-invariant quotient
    S = m[:, None] * G          # symmetric under detailed balance
    S = 0.5 * (S + S.T)

    def minimize(g0):
        g = g0 / np.sqrt(m @ g0**2)
        val = _lsi_quotient(G, m, g)
        if not np.isfinite(val):
            return np.inf
        step = 1.0
        for _ in range(400):
            energy = dirichlet_energy(G, m, g)
            g2v = g * g
            s = float(g2v @ m)
            ent = _entropy(g2v, m)
            if ent <= ENTROPY_FLOOR:
                break
            grad_e = -2.0 * (S @ g)
            with np.errstate(divide="ignore"):
                logs = np.where(g2v > 0, np.log(np.where(g2v > 0, g2v / s, 1.0)), 0.0)
            grad_h = 2.0 * g * m * logs
            grad = (grad_e * ent - energy * grad_h) / ent**2
            step = min(step * 2.0, 1e3)
            improved = False
            for _ in range(60):
                cand = g - step * grad
                norm = np.sqrt(m @ cand**2)
                if norm > 0:
                    cand = cand / norm
                    cval = _lsi_quotient(G, m, cand)
                    if cval < val - 1e-15:
                        improved = True
                        break
                step *= 0.5
            if not improved:
                break
            delta = val - cval
            g, val = cand, cval
            if delta < tol * max(abs(val), 1e-30):
                break
        return val

    rng = np.random.default_rng(seed)
    starts = [rng.standard_normal(n) for _ in range(restarts)]
    starts.append(1.0 + 1e-2 * g2)
    best = min(trials, key=lambda g: _lsi_quotient(G, m, g))
    starts.append(best)
    values = [minimize(g0) for g0 in starts]
    finite = [v for v in values if np.isfinite(v)]
    if not finite:
        raise OptimizerStall(f"no restart converged; bracket is [{lower:g}, {upper:g}]")
    estimate = min(finite)
    return lower, float(estimate), float(upper)


# -- canonical paths (discrete time) ------------------------------------------

ABSORB = -1   # sentinel index for the trap state inside a path


@dataclass(frozen=True)
class PathFamily:
    """For every state, a positive-probability path ending at the trap."""

    paths: tuple          # tuple of tuples of state indices, last entry ABSORB

    def length(self, x):
        return len(self.paths[x]) - 1


def default_paths(chain: DiscreteAbsorbingChain):
    """Breadth-first shortest paths to absorption, lexicographic tie-break."""
    Q, a = chain.sub, chain.absorb
    n = chain.n
    dist = np.full(n, -1)
    frontier = [x for x in range(n) if a[x] > 0]
    for x in frontier:
        dist[x] = 1
    level = 1
    while frontier:
        nxt = []
        for y in range(n):
            if dist[y] < 0 and any(Q[y, x] > 0 for x in frontier):
                dist[y] = level + 1
                nxt.append(y)
        frontier = nxt
        level += 1
    if (dist < 0).any():
        missing = [chain.states.labels[x] for x in np.flatnonzero(dist < 0)]
        raise NoPathToAbsorption(f"states with no route to absorption: {missing}")
    paths = []
    for x in range(n):
        path = [x]
        cur = x
        while dist[cur] > 1:
            nxt = min(y for y in range(n) if Q[cur, y] > 0 and dist[y] == dist[cur] - 1)
            path.append(nxt)
            cur = nxt
        path.append(ABSORB)
        paths.append(tuple(path))
    return PathFamily(paths=tuple(paths))


def dirichlet_form(chain: DiscreteAbsorbingChain, q, f):
    """E(f, f) = (1/2) sum over the extended space of (f(y)-f(x))^2 q(x) K(x, y).

    ``f`` lives on the surviving states and is extended by zero at the trap;
    ``q`` gets zero weight at the trap.
    """
    q = np.asarray(q, dtype=float)
    f = np.asarray(f, dtype=float)
    Q, a = chain.sub, chain.absorb
    diff2 = (f[None, :] - f[:, None]) ** 2
    interior = float((q[:, None] * Q * diff2).sum())
    boundary = float((q * a * f**2).sum())
    return 0.5 * (interior + boundary)


def path_bound(chain: DiscreteAbsorbingChain, q, paths: PathFamily | None = None,
               tol=DETAILED_BALANCE_TOL):
    """Canonical-path Poincare constant A and the induced bound 1 - 1/A >= beta1.

    ``A = max over used edges (x, y) of 2 / (q(x) K(x, y)) * sum over states z
    routing through (x, y) of |path_z| q(z)``; requires ``q`` to be reversing
    for the surviving-states kernel.
    """
    q = np.asarray(q, dtype=float)
    Q, a = chain.sub, chain.absorb
    n = chain.n
    flows = q[:, None] * Q
    defect = float(np.abs(flows - flows.T).max())
    if defect > tol * max(1.0, float(np.abs(flows).max())):
        raise NotReversible(f"q K is not symmetric on the surviving states ({defect:g})")
    if paths is None:
        paths = default_paths(chain)

    routed = {}
    for z, path in enumerate(paths.paths):
        for u, v in zip(path[:-1], path[1:]):
            routed.setdefault((u, v), []).append(z)
    A = 0.0
    for (u, v), users in routed.items():
        kuv = a[u] if v == ABSORB else Q[u, v]
        if kuv <= 0:
            raise NoPathToAbsorption(f"path uses zero-probability edge ({u}, {v})")
        # accumulate q(z)/q(u) so that equal weights cancel exactly
        load = sum(paths.length(z) * (q[z] / q[u]) for z in users)
        A = max(A, 2.0 * load / kuv)
    return float(A), float(1.0 - 1.0 / A)


def functional_constants(chain, p: PerronData, doob_chain, lsi_mode="full",
                         restarts=50, seed=0):
    """Aggregate gaps, the comparison bound, and the log-Sobolev bracket."""
    gap_tilde = spectral_gap(doob_chain.symmetrized, doob_chain.invariant)
    gb = base_gap(chain, p.eta)
    eq_lower = compare_gap(p, gb)
    lower, estimate, upper = lsi_constant(
        doob_chain.symmetrized, doob_chain.invariant,
        mode=lsi_mode, restarts=restarts, seed=seed,
    )
    return FunctionalConstants(
        gap_tilde=gap_tilde,
        gap_base=gb,
        eq_lower=eq_lower,
        lsi_lower=lower,
        lsi_estimate=estimate,
        lsi_upper=upper,
    )

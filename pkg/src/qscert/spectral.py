"""Principal eigendata of the killed generator L - V (or of the kernel Q).

Conventions: ``lambda1`` is the bottom eigenvalue of V - L (it has strictly
minimal real part); ``phi`` is the positive right eigenvector normalized by
``eta[phi^2] = 1``; ``nu`` is the quasi-stationary law, i.e. the positive left
eigenvector normalized to total mass one; ``phi_star = nu / eta`` so that
``eta[phi_star] = 1``.  Discrete chains carry the Perron root ``beta`` of Q
and ``lambda1 = 1 - beta``; their ``eta``/``phi_star`` slots stay empty and
the discrete formulas use (phi, psi, beta) only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .core import ContinuousAbsorbingChain, DiscreteAbsorbingChain
from .errors import NotIrreducible, PerronFailure, SolverDivergence

EIGEN_TOL = 1e-9
REVERSIBLE_TOL = 1e-10


@dataclass(frozen=True)
class PerronData:
    lambda1: float
    phi: np.ndarray
    nu: np.ndarray
    ratio: float                    # phi_max / phi_min
    residual: float                 # max eigen-equation defect, relative
    eta: np.ndarray | None = None   # continuous only
    phi_star: np.ndarray | None = None
    beta: float | None = None       # discrete only
    psi: np.ndarray | None = None   # discrete left eigenvector, sums to 1

    @property
    def discrete(self):
        return self.beta is not None


@dataclass(frozen=True)
class DirichletSpectrum:
    eigenvalues: np.ndarray         # of V - L (continuous) or {1 - beta_i} (discrete)
    reversible: bool
    lambda2: float | None = None    # populated only in the reversible case

    @property
    def lambda1(self):
        return float(self.eigenvalues[0].real)


def _sorted_eigenvalues(w):
    order = np.lexsort((w.imag, w.real))
    return w[order]


def _detailed_balance_invariant(L):
    """Reconstruct a reversible invariant law from rate ratios along a
    spanning tree of the two-sided edge graph; exact to relative rounding
    even when the law spans many orders of magnitude.  Returns None when the
    chain is not reversible (one-sided edges, or a non-balancing cycle)."""
    n = L.shape[0]
    log_eta = np.full(n, np.nan)
    log_eta[0] = 0.0
    frontier = [0]
    while frontier:
        u = frontier.pop()
        for v in range(n):
            if v != u and L[u, v] > 0 and L[v, u] > 0 and np.isnan(log_eta[v]):
                log_eta[v] = log_eta[u] + np.log(L[u, v]) - np.log(L[v, u])
                frontier.append(v)
    if np.isnan(log_eta).any():
        return None
    eta = np.exp(log_eta - log_eta.max())
    eta = eta / eta.sum()
    flows = eta[:, None] * L
    np.fill_diagonal(flows, 0.0)
    scale = np.maximum(np.abs(flows), np.abs(flows.T))
    gap = np.abs(flows - flows.T)
    ok = gap <= 1e-8 * np.maximum(scale, 1e-300)
    if not ok.all():
        return None
    return eta


def invariant_measure(chain, tol=1e-10):
    """Unique invariant probability of the generator L (irreducible chains).

    Reversible generators are resolved through detailed-balance ratio
    propagation (exact relative accuracy for strongly graded laws); the
    general case uses a dense null-space computation.
    """
    if not isinstance(chain, ContinuousAbsorbingChain):
        raise TypeError("invariant_measure expects a continuous chain")
    if not chain.irreducible:
        raise NotIrreducible("the rate digraph is not strongly connected")
    eta = _detailed_balance_invariant(np.asarray(chain.rates))
    if eta is None:
        null = sla.null_space(chain.rates.T, rcond=None)
        if null.shape[1] != 1:
            raise SolverDivergence(f"kernel of L^T has dimension {null.shape[1]}")
        eta = null[:, 0]
        eta = eta * np.sign(eta.sum())
        eta = eta / eta.sum()
    if eta.min() <= 0:
        raise SolverDivergence(f"invariant vector has nonpositive entry {eta.min()!r}")
    resid = float(np.abs(eta @ chain.rates).max())
    if resid > tol * max(1.0, float(np.abs(chain.rates).max())):
        raise SolverDivergence(f"invariant residual {resid:g} exceeds tolerance")
    out = eta.copy()
    out.setflags(write=False)
    return out


def check_reversible(chain, eta, tol=REVERSIBLE_TOL):
    """Detailed balance of eta for L (continuous) or Q (discrete)."""
    G = chain.rates if isinstance(chain, ContinuousAbsorbingChain) else chain.sub
    flows = eta[:, None] * G
    scale = max(1.0, float(np.abs(flows).max()))
    defect = np.abs(flows - flows.T)
    np.fill_diagonal(defect, 0.0)
    return bool(defect.max() <= tol * scale)


def _positive_direction(v):
    v = np.real(np.real_if_close(v, tol=1e6))
    # deterministic sign: make the dominant entry (hence any strictly positive
    # vector's first entry) positive
    if v[int(np.argmax(np.abs(v)))] < 0:
        v = -v
    return v


def _perron_continuous(chain, tol):
    eta = invariant_measure(chain)
    A = np.diag(chain.killing) - chain.rates          # V - L, bottom eigenvalue lambda1
    reversible = check_reversible(chain, eta)
    if reversible:
        d = np.sqrt(eta)
        B = (d[:, None] * A) / d[None, :]
        w, U = np.linalg.eigh(0.5 * (B + B.T))
        lam1 = float(w[0])
        phi = _positive_direction(U[:, 0] / d)
        nu = phi * eta
        nu = nu / nu.sum()
    else:
        w, vr = np.linalg.eig(A)
        k = int(np.argmin(w.real))
        lam1 = w[k]
        if abs(lam1.imag) > tol * max(1.0, abs(lam1)):
            raise SolverDivergence(f"bottom eigenvalue {lam1!r} is not real")
        lam1 = float(lam1.real)
        phi = _positive_direction(vr[:, k])
        wl, vl = np.linalg.eig(A.T)
        kl = int(np.argmin(wl.real))
        nu = _positive_direction(vl[:, kl])
        nu = nu / nu.sum()
    if phi.min() <= 0:
        raise PerronFailure("principal right eigenvector is not strictly positive")
    if nu.min() < 0:
        raise PerronFailure("quasi-stationary vector has negative entries")
    phi = phi / np.sqrt(eta @ phi**2)
    phi_star = nu / eta
    scale = max(1.0, float(np.abs(A).max()))
    res_r = float(np.abs(A @ phi - lam1 * phi).max() / (np.abs(phi).max() * scale))
    res_l = float(np.abs(nu @ A - lam1 * nu).max() / (np.abs(nu).max() * scale))
    residual = max(res_r, res_l)
    if residual > tol:
        raise SolverDivergence(f"eigen residual {residual:g} exceeds {tol:g}")
    for arr in (phi, nu, phi_star):
        arr.setflags(write=False)
    return PerronData(
        lambda1=lam1,
        phi=phi,
        nu=nu,
        ratio=float(phi.max() / phi.min()),
        residual=residual,
        eta=eta,
        phi_star=phi_star,
    )


def _perron_root(Q):
    """Perron data of a nonnegative matrix by dense eigendecomposition."""
    w, vr = np.linalg.eig(Q)
    k = int(np.argmax(w.real))
    beta = float(w[k].real)
    phi = _positive_direction(vr[:, k])
    wl, vl = np.linalg.eig(Q.T)
    kl = int(np.argmax(wl.real))
    psi = _positive_direction(vl[:, kl])
    return beta, phi, psi


def _perron_discrete(chain, tol):
    Q = chain.sub
    n = chain.n
    if chain.irreducible:
        beta, phi, psi = _perron_root(Q)
        phi = phi / phi.min()
    else:
        # Reducible kernels: analyze (1-eps) Q + eps J for two values of eps
        # and extrapolate the eigendata linearly to eps = 0, then re-check the
        # residual on the original Q.  Zeros in psi are legitimate (nu may be
        # a Dirac mass); phi must still come out strictly positive.
        J = np.full((n, n), 1.0 / n)
        eps1, eps2 = 1e-6, 1e-8
        data = []
        for eps in (eps1, eps2):
            b, f, s = _perron_root((1 - eps) * Q + eps * J)
            f = f / f.min()
            s = s / s.sum()
            data.append((b, f, s))
        (b1, f1, s1), (b2, f2, s2) = data
        beta = (eps1 * b2 - eps2 * b1) / (eps1 - eps2)
        phi = (eps1 * f2 - eps2 * f1) / (eps1 - eps2)
        psi = (eps1 * s2 - eps2 * s1) / (eps1 - eps2)
        # entries vanishing in the eps -> 0 limit surface as extrapolation
        # noise; such models have no strictly positive Perron profile
        if phi.min() <= 1e-8 * phi.max():
            raise PerronFailure("right Perron vector is not strictly positive")
    if phi.min() <= 0:
        raise PerronFailure("right Perron vector is not strictly positive")
    psi = np.where(np.abs(psi) < 1e-12, 0.0, psi)
    if psi.min() < 0:
        raise PerronFailure("left Perron vector has negative entries")
    psi = psi / psi.sum()
    scale = max(1.0, float(np.abs(Q).max()))
    res_r = float(np.abs(Q @ phi - beta * phi).max() / (np.abs(phi).max() * scale))
    res_l = float(np.abs(psi @ Q - beta * psi).max() / (np.abs(psi).max() * scale))
    residual = max(res_r, res_l)
    if residual > tol:
        raise SolverDivergence(f"eigen residual {residual:g} exceeds {tol:g}")
    for arr in (phi, psi):
        arr.setflags(write=False)
    return PerronData(
        lambda1=1.0 - beta,
        phi=phi,
        nu=psi,
        ratio=float(phi.max() / phi.min()),
        residual=residual,
        beta=beta,
        psi=psi,
    )


def perron(chain, tol=EIGEN_TOL):
    """Principal eigendata of the chain; see the module docstring."""
    if isinstance(chain, ContinuousAbsorbingChain):
        return _perron_continuous(chain, tol)
    if isinstance(chain, DiscreteAbsorbingChain):
        return _perron_discrete(chain, tol)
    raise TypeError(f"unsupported chain type {type(chain).__name__}")


def dirichlet_spectrum(chain, tol=EIGEN_TOL):
    """Full spectrum of V - L (continuous) or of I - Q reported as {1 - beta_i}."""
    if isinstance(chain, ContinuousAbsorbingChain):
        A = np.diag(chain.killing) - chain.rates
        reversible = chain.irreducible and check_reversible(chain, invariant_measure(chain))
        if reversible:
            eta = invariant_measure(chain)
            d = np.sqrt(eta)
            B = (d[:, None] * A) / d[None, :]
            w = np.linalg.eigvalsh(0.5 * (B + B.T)).astype(complex)
        else:
            w = np.linalg.eigvals(A)
    elif isinstance(chain, DiscreteAbsorbingChain):
        w = 1.0 - np.linalg.eigvals(chain.sub)
        reversible = False
        if chain.irreducible:
            try:
                emb = embed_discrete(chain)
                reversible = emb.irreducible and check_reversible(emb, invariant_measure(emb))
            except (NotIrreducible, SolverDivergence):
                reversible = False
    else:
        raise TypeError(f"unsupported chain type {type(chain).__name__}")
    w = _sorted_eigenvalues(w)
    lambda2 = None
    if reversible:
        if np.abs(w.imag).max(initial=0.0) > tol:
            raise SolverDivergence("reversible chain produced complex spectrum")
        if len(w) > 1:
            lambda2 = float(w[1].real)
    w.setflags(write=False)
    return DirichletSpectrum(eigenvalues=w, reversible=reversible, lambda2=lambda2)


def embed_discrete(chain):
    """Unit-jump-rate continuous embedding: L = Q - I + diag(a), V = a.

    The killed minor is then Q - I, so the bottom eigenvalue of the embedding
    equals 1 - beta of the discrete chain.
    """
    from .core import build_continuous

    Q = chain.sub
    L = Q.copy()
    np.fill_diagonal(L, 0.0)
    return build_continuous(
        chain.states,
        L,
        chain.absorb,
        meta={"embedded_from": "discrete"},
    )

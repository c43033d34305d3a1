"""Doob transform of an absorbing chain into an ergodic one.

Continuous case: the transformed generator has off-diagonal entries
``Lt(x, y) = L(x, y) phi(y) / phi(x)``, equivalently the similarity identity
``Lt = Phi^{-1} (L - V + lambda1 I) Phi`` with ``Phi = diag(phi)``; its
invariant law is ``eta_tilde`` proportional to ``phi * phi_star * eta``.

Discrete case: the transformed kernel is ``K(x, y) = Q(x, y) phi(y) /
(beta phi(x))``, which is the row-stochastic orientation (row sums equal
``(Q phi)(x) / (beta phi(x)) = 1``); the transposed orientation
``Q(x, y) phi(x) / (beta phi(y))`` does not have unit row sums and is not
used.  The stationary law is ``pi`` proportional to ``phi * psi``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ContinuousAbsorbingChain, DiscreteAbsorbingChain
from .errors import NonStochastic, PerronMismatch
from .spectral import PerronData, perron

CONJUGATION_TOL = 1e-10
STATIONARY_TOL = 1e-10


@dataclass(frozen=True)
class DoobChain:
    generator: np.ndarray           # Markov generator (continuous) or kernel K (discrete)
    invariant: np.ndarray           # eta_tilde, resp. pi
    symmetrized: np.ndarray | None  # additive symmetrization, continuous only
    discrete: bool = False


def doob_invariant(p: PerronData):
    """Invariant law of the transformed generator: proportional to phi*phi_star*eta."""
    if p.discrete:
        raise TypeError("doob_invariant applies to continuous Perron data")
    w = p.phi * p.phi_star * p.eta
    w = w / w.sum()
    w.setflags(write=False)
    return w


def symmetrize(generator, invariant):
    """Additive symmetrization (G + G*)/2 with G* the adjoint in L^2(invariant).

    The adjoint is formed explicitly as ``D^{-1} G^T D`` with
    ``D = diag(invariant)``.  The result satisfies detailed balance with
    respect to ``invariant`` and fixes reversible generators.
    """
    m = np.asarray(invariant, dtype=float)
    G = np.asarray(generator, dtype=float)
    adjoint = (G.T * m[None, :]) / m[:, None]
    return 0.5 * (G + adjoint)


def doob_continuous(chain: ContinuousAbsorbingChain, p: PerronData | None = None):
    """Transform an absorbing continuous chain into its ergodic companion."""
    if p is None:
        p = perron(chain)
    if p.discrete:
        raise TypeError("continuous chain with discrete Perron data")
    phi = p.phi
    Lt = chain.rates * (phi[None, :] / phi[:, None])
    np.fill_diagonal(Lt, 0.0)
    np.fill_diagonal(Lt, -Lt.sum(axis=1))

    # similarity identity: Phi^{-1} (L - V + lambda1 I) Phi must reproduce Lt
    conj = (chain.sub_generator() + p.lambda1 * np.eye(chain.n)) * (
        phi[None, :] / phi[:, None]
    )
    scale = max(1.0, float(np.abs(Lt).max()))
    defect = float(np.abs(conj - Lt).max())
    if defect > CONJUGATION_TOL * scale:
        raise PerronMismatch(f"conjugation defect {defect:g}; Perron data inconsistent")

    inv = doob_invariant(p)
    resid = float(np.abs(inv @ Lt).max())
    if resid > STATIONARY_TOL * scale:
        raise PerronMismatch(f"stationarity defect {resid:g} for the transformed generator")

    sym = symmetrize(Lt, inv)
    flows = inv[:, None] * sym
    bal = float(np.abs(flows - flows.T).max())
    if bal > STATIONARY_TOL * max(1.0, float(np.abs(flows).max())):
        raise PerronMismatch(f"symmetrization breaks detailed balance by {bal:g}")

    Lt.setflags(write=False)
    sym.setflags(write=False)
    return DoobChain(generator=Lt, invariant=inv, symmetrized=sym, discrete=False)


def doob_discrete(chain: DiscreteAbsorbingChain, beta=None, phi=None, psi=None):
    """Transform via K(x, y) = Q(x, y) phi(y) / (beta phi(x)); see module docs."""
    if beta is None or phi is None or psi is None:
        p = perron(chain)
        beta = p.beta if beta is None else beta
        phi = p.phi if phi is None else phi
        psi = p.psi if psi is None else psi
    phi = np.asarray(phi, dtype=float)
    psi = np.asarray(psi, dtype=float)
    K = chain.sub * (phi[None, :] / phi[:, None]) / beta
    rowsums = K.sum(axis=1)
    defect = float(np.abs(rowsums - 1.0).max())
    if defect > 1e-9:
        raise NonStochastic(f"transformed kernel rows sum to 1 +- {defect:g}")
    pi = phi * psi
    pi = pi / pi.sum()
    resid = float(np.abs(pi @ K - pi).max())
    if resid > STATIONARY_TOL:
        raise NonStochastic(f"pi is not stationary for K (defect {resid:g})")
    K.setflags(write=False)
    pi.setflags(write=False)
    return DoobChain(generator=K, invariant=pi, symmetrized=None, discrete=True)


def doob_transform(chain, p: PerronData | None = None):
    """Dispatch on the chain kind."""
    if isinstance(chain, ContinuousAbsorbingChain):
        return doob_continuous(chain, p)
    if isinstance(chain, DiscreteAbsorbingChain):
        if p is None:
            p = perron(chain)
        return doob_discrete(chain, p.beta, p.phi, p.psi)
    raise TypeError(f"unsupported chain type {type(chain).__name__}")

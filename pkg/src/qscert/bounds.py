"""Explicit convergence certificates: C * exp(-rho t) curves and envelopes.

Total variation follows the analyst convention ``||m|| = sum_x |m(x)|``
(twice the probabilist value, maximum 2); :func:`probabilist_tv` converts.

Curve kinds (also used in CSV/JSON output):

* ``thm2``            spectral-gap certificate of the symmetrized transform,
                      valid for any irreducible chain;
* ``thm3_a``/``thm3_b`` reversible certificates at the optimal rate
                      ``lambda2 - lambda1`` (variant a is always at most b);
* ``lsi``/``lsi_reversible`` entropy-route certificates at half the
                      gap-to-entropy constant, with logarithmic prefactors;
* ``product_tv``/``product_lsi`` d-fold product-chain certificates built
                      from single-factor constants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NotReversible
from .evolution import conditioned_law, distances, doob_law
from .spectral import PerronData

CURVE_KINDS = (
    "thm2",
    "thm3_a",
    "thm3_b",
    "lsi",
    "lsi_reversible",
    "product_tv",
    "product_lsi",
)


@dataclass(frozen=True)
class BoundCurve:
    prefactor: float
    rate: float
    kind: str

    def __post_init__(self):
        if self.kind not in CURVE_KINDS:
            raise ValueError(f"unknown curve kind {self.kind!r}")

    def eval(self, t):
        return self.prefactor * np.exp(-self.rate * np.asarray(t, dtype=float))


def probabilist_tv(tv):
    """Convert the analyst total variation to the probabilist convention."""
    return 0.5 * tv


def _weights(p: PerronData):
    if p.discrete:
        raise TypeError("curve prefactors need continuous Perron data")
    w = p.phi * p.phi_star * p.eta        # unnormalized eta_tilde
    return w


def _require_proportional(p: PerronData):
    """Reversibility in eigen-terms: phi_star must be proportional to phi."""
    rel = np.abs(p.phi_star / p.phi_star.sum() - p.phi / p.phi.sum())
    if rel.max() > 1e-8 * float(np.abs(p.phi / p.phi.sum()).max()):
        raise NotReversible("left and right eigenvectors are not proportional")


def thm2_curve(p: PerronData, gap_tilde):
    """Spectral-gap certificate: C = sqrt(1 / min eta_tilde) * phi-ratio."""
    w = _weights(p)
    C = math.sqrt(w.sum() / w.min()) * p.ratio
    return BoundCurve(prefactor=C, rate=float(gap_tilde), kind="thm2")


def thm3_curve(p: PerronData, lambda2, variant="a"):
    """Reversible certificates at rate lambda2 - lambda1.

    Variant a: C = sqrt(1 / min(phi^2 eta)) * ratio.
    Variant b: C = sqrt(1 / min eta) * ratio^2 (always at least variant a).
    """
    if p.phi_star is None or p.eta is None:
        raise NotReversible("reversible certificate needs continuous eigendata")
    _require_proportional(p)
    rate = float(lambda2 - p.lambda1)
    if variant == "a":
        C = math.sqrt(1.0 / (p.phi**2 * p.eta).min()) * p.ratio
        return BoundCurve(prefactor=C, rate=rate, kind="thm3_a")
    if variant == "b":
        C = math.sqrt(1.0 / p.eta.min()) * p.ratio**2
        return BoundCurve(prefactor=C, rate=rate, kind="thm3_b")
    raise ValueError(f"unknown variant {variant!r}")


def lsi_curve(p: PerronData, alpha, reversible=False):
    """Entropy-route certificate at rate alpha / 2.

    The certificate stays valid for any 0 < alpha <= the true log-Sobolev
    constant, so callers typically pass the certified lower bound.
    """
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha!r}")
    if reversible:
        C = math.sqrt(2.0 * math.log(1.0 / (p.phi**2 * p.eta).min())) * p.ratio
        kind = "lsi_reversible"
    else:
        w = _weights(p)
        C = math.sqrt(2.0 * math.log(w.sum() / w.min())) * p.ratio
        kind = "lsi"
    return BoundCurve(prefactor=C, rate=0.5 * float(alpha), kind=kind)


def product_curves(p: PerronData, constants, d):
    """d-fold product certificates from single-factor constants.

    ``product_tv``:  C = (sqrt(1/min eta) ratio^2)^d at the single-factor rate
    ``gap_tilde``;  ``product_lsi``: C = sqrt(2 d log(ratio / min eta)) *
    ratio^d at half the certified single-factor log-Sobolev constant.
    """
    if d < 1:
        raise ValueError("d must be >= 1")
    if p.phi_star is None:
        raise NotReversible("product certificates need continuous eigendata")
    _require_proportional(p)
    eta_min = float(p.eta.min())
    C_tv = (math.sqrt(1.0 / eta_min) * p.ratio**2) ** d
    tv = BoundCurve(prefactor=C_tv, rate=float(constants.gap_tilde), kind="product_tv")
    C_ls = math.sqrt(2.0 * d * math.log(p.ratio / eta_min)) * p.ratio**d
    ls = BoundCurve(prefactor=C_ls, rate=0.5 * float(constants.lsi_lower), kind="product_lsi")
    return tv, ls


def mixing_time(curve: BoundCurve, eps):
    """First time the certificate reaches level eps: (ln C + ln(1/eps)) / rho.

    Levels at or above the prefactor return 0 (the curve starts below eps).
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if eps >= curve.prefactor:
        return 0.0
    return (math.log(curve.prefactor) - math.log(eps)) / curve.rate


def thm1_envelope(chain, p: PerronData, doob_chain, mu0, t):
    """Two-sided transfer envelope: (lower, actual, upper) at time t.

    ``actual`` is the exact conditioned total variation to nu; the envelope
    scales the transformed flow's distance to its invariant law by
    ``phi_min / (2 phi_max)`` from below and ``2 phi_max / phi_min`` from
    above, with the transformed start carrying density proportional to phi
    with respect to mu0.
    """
    mu0 = np.asarray(mu0, dtype=float)
    mu_t, _ = conditioned_law(chain, mu0, t)
    actual, _, _ = distances(mu_t, p.nu)
    mu_tilde0 = p.phi * mu0
    mu_tilde0 = mu_tilde0 / mu_tilde0.sum()
    mu_td = doob_law(doob_chain, mu_tilde0, t)
    tv_doob = float(np.abs(mu_td - doob_chain.invariant).sum())
    lower = tv_doob / (2.0 * p.ratio)
    upper = 2.0 * p.ratio * tv_doob
    return lower, actual, upper


def median_envelope(mu, nu):
    """Median sandwich: (integral, tv, 2 * integral) with
    ``integral = int |f - m| d nu``, ``f = mu/nu``, ``m`` the lower nu-median.

    The sandwich ``integral <= tv <= 2 integral`` holds for any median; ties
    resolve to the smallest admissible value for determinism.
    """
    mu = np.asarray(mu, dtype=float)
    nu = np.asarray(nu, dtype=float)
    f = mu / nu
    m = lower_median(f, nu)
    integral = float((np.abs(f - m) * nu).sum())
    tv = float(np.abs(mu - nu).sum())
    return integral, tv, 2.0 * integral


def lower_median(values, weights):
    """Smallest v with weight(values <= v) >= 1/2."""
    order = np.argsort(values, kind="stable")
    cum = np.cumsum(weights[order])
    k = int(np.searchsorted(cum, 0.5 - 1e-12, side="left"))
    k = min(k, len(order) - 1)
    return float(values[order[k]])

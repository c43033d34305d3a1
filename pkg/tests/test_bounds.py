import math

import numpy as np
import pytest

from qscert import models
from qscert.bounds import (
    BoundCurve,
    lower_median,
    lsi_curve,
    median_envelope,
    mixing_time,
    probabilist_tv,
    product_curves,
    thm1_envelope,
    thm2_curve,
    thm3_curve,
)
from qscert.core import build_continuous
from qscert.doob import doob_transform
from qscert.errors import NotReversible
from qscert.evolution import conditioned_law, worst_case_tv
from qscert.funineq import functional_constants, spectral_gap
from qscert.spectral import dirichlet_spectrum, perron


def _analyze(chain):
    p = perron(chain)
    d = doob_transform(chain, p)
    spec = dirichlet_spectrum(chain)
    return p, d, spec


def test_curve_shape():
    c = BoundCurve(prefactor=3.0, rate=0.5, kind="thm2")
    assert c.eval(0.0) == pytest.approx(3.0)
    ts = np.linspace(0, 5, 11)
    vals = c.eval(ts)
    assert np.all(np.diff(vals) < 0)
    with pytest.raises(ValueError):
        BoundCurve(prefactor=1.0, rate=1.0, kind="bogus")


def test_two_point_curves():
    chain = models.two_point()
    p, d, spec = _analyze(chain)
    gap = spectral_gap(d.symmetrized, d.invariant)
    c2 = thm2_curve(p, gap)
    assert c2.prefactor == pytest.approx(np.sqrt(2.0), rel=1e-12)
    assert c2.rate == pytest.approx(2.0, abs=1e-12)
    cl = lsi_curve(p, 1.0)
    assert cl.prefactor == pytest.approx(np.sqrt(2.0 * np.log(2.0)), rel=1e-12)
    assert cl.rate == pytest.approx(0.5)


def test_unkilled_uniform_chain_prefactors():
    n = 5
    rates = np.ones((n, n))
    np.fill_diagonal(rates, 0.0)
    chain = build_continuous([str(i) for i in range(n)], rates, np.zeros(n))
    p, d, spec = _analyze(chain)
    gap = spectral_gap(d.symmetrized, d.invariant)
    assert thm2_curve(p, gap).prefactor == pytest.approx(np.sqrt(n), rel=1e-9)
    assert lsi_curve(p, 1.0).prefactor == pytest.approx(np.sqrt(2 * np.log(n)), rel=1e-9)
    assert gap == pytest.approx(spectral_gap(chain.rates, p.eta), rel=1e-9)


def test_thm3_variants_ordering():
    for make in (lambda: models.bd_uniform(6), lambda: models.bd_biased(6, 2.0),
                 lambda: models.bd_biased(7, 0.5)):
        chain = make()
        p, d, spec = _analyze(chain)
        a = thm3_curve(p, spec.lambda2, "a")
        b = thm3_curve(p, spec.lambda2, "b")
        assert a.prefactor <= b.prefactor + 1e-12
        assert a.rate == b.rate == pytest.approx(spec.lambda2 - p.lambda1)


def test_thm3_rejects_nonreversible():
    chain = models.cycle_chain(5)
    p, d, spec = _analyze(chain)
    reals = np.sort(np.unique(spec.eigenvalues.real.round(12)))
    with pytest.raises(NotReversible):
        thm3_curve(p, reals[1], "a")


def test_large_n_prefactor_asymptotics():
    # variant-a prefactor approaches (2 sqrt2 / pi^2) N^{5/2} for the
    # symmetric walk
    N = 30
    chain = models.bd_uniform(N)
    p, d, spec = _analyze(chain)
    a = thm3_curve(p, spec.lambda2, "a")
    ref = 2.0 * np.sqrt(2.0) / np.pi**2 * N**2.5
    assert a.prefactor == pytest.approx(ref, rel=0.01)


def test_biased_prefactor_profile():
    # with the reflected top edge the exact invariant law carries the factor
    # 2/(r+1) relative to the plain geometric profile, so variant b sits at
    # sqrt(2/(r+1)) times sqrt(r^N/(r-1)) (r/(r-1))^2
    N, r = 12, 2.0
    chain = models.bd_biased(N, r)
    p, d, spec = _analyze(chain)
    b = thm3_curve(p, spec.lambda2, "b")
    profile = math.sqrt(r**N / (r - 1.0)) * (r / (r - 1.0)) ** 2
    corrected = math.sqrt(2.0 / (r + 1.0)) * profile
    assert b.prefactor == pytest.approx(corrected, rel=0.02)


def test_cycle_thm2_prefactor_scaling():
    N = 200
    chain = models.cycle_chain(N)
    p = perron(chain)
    d = doob_transform(chain, p)
    gap = spectral_gap(d.symmetrized, d.invariant)
    C = thm2_curve(p, gap).prefactor
    assert C == pytest.approx(2.0 * np.sqrt(2.0 * N), rel=0.05)


def test_lsi_curve_dominates_initial_distance():
    chain = models.bd_uniform(4)
    p, d, spec = _analyze(chain)
    curve = lsi_curve(p, 1e-6, reversible=True)
    worst0, _ = worst_case_tv(chain, p, 0.0)
    assert curve.prefactor >= worst0


def test_thm1_envelope_unkilled_reduction():
    n = 3
    rates = np.array([[-2.0, 1.0, 1.0], [1.0, -2.0, 1.0], [1.0, 1.0, -2.0]])
    chain = build_continuous(["a", "b", "c"], rates, np.zeros(n))
    p, d, spec = _analyze(chain)
    mu0 = np.array([1.0, 0.0, 0.0])
    t = 0.4
    lower, actual, upper = thm1_envelope(chain, p, d, mu0, t)
    law, _ = conditioned_law(chain, mu0, t)
    tv = float(np.abs(law - p.eta).sum())
    assert lower == pytest.approx(0.5 * tv, rel=1e-9)
    assert actual == pytest.approx(tv, rel=1e-9)
    assert upper == pytest.approx(2.0 * tv, rel=1e-9)


def test_thm1_envelope_quasi_stationary_start():
    chain = models.bd_uniform(5)
    p, d, spec = _analyze(chain)
    lower, actual, upper = thm1_envelope(chain, p, d, p.nu, 1.0)
    assert actual <= 1e-9
    assert lower <= actual + 1e-12


def test_thm1_envelope_point_mass_grid():
    chain = models.bd_uniform(5)
    p, d, spec = _analyze(chain)
    mu0 = np.zeros(5)
    mu0[4] = 1.0
    for t in (0.5, 2.0, 8.0):
        lower, actual, upper = thm1_envelope(chain, p, d, mu0, t)
        assert lower - 1e-12 <= actual <= upper + 1e-12


def test_product_curves_two_point():
    chain = models.two_point()
    p, d, spec = _analyze(chain)
    fc = functional_constants(chain, p, d, restarts=5)
    for dd in (1, 2, 5):
        tv, ls = product_curves(p, fc, dd)
        assert tv.prefactor == pytest.approx(2.0 ** (dd / 2.0), rel=1e-12)
        assert tv.rate == pytest.approx(2.0, abs=1e-10)
        assert ls.prefactor == pytest.approx(np.sqrt(2 * dd * np.log(2.0)), rel=1e-12)
        assert ls.rate == pytest.approx(0.5, abs=1e-10)
    tv1, _ = product_curves(p, fc, 1)
    b = thm3_curve(p, spec.lambda2, "b")
    assert tv1.prefactor == pytest.approx(b.prefactor, rel=1e-12)
    assert tv1.rate == pytest.approx(b.rate, abs=1e-10)


def test_mixing_time_inversion():
    c = BoundCurve(prefactor=1.0, rate=3.0, kind="thm2")
    assert mixing_time(c, 1.0) == 0.0
    cl = BoundCurve(prefactor=np.sqrt(2 * np.log(2.0)), rate=0.5, kind="lsi")
    expect = 2.0 * (np.log(np.sqrt(2 * np.log(2.0))) + np.log(2.0))
    assert mixing_time(cl, 0.5) == pytest.approx(expect, rel=1e-12)
    assert cl.eval(mixing_time(cl, 0.37)) == pytest.approx(0.37, rel=1e-12)


def test_mixing_time_asymptotic_form():
    # the symmetric walk's two-level gap is 4 sin(pi/N) sin(pi/(2N)), i.e.
    # 2 pi^2/N^2 to leading order; solving the variant-a certificate at level
    # e^{-s} therefore takes (5/2 ln N + s + ln(2 sqrt2/pi^2)) N^2/(2 pi^2)
    N, s = 100, 1.0
    chain = models.bd_uniform(N)
    p, d, spec = _analyze(chain)
    gap = spec.lambda2 - p.lambda1
    assert gap == pytest.approx(4 * math.sin(math.pi / N) * math.sin(math.pi / (2 * N)),
                                rel=1e-12)
    a = thm3_curve(p, spec.lambda2, "a")
    t = mixing_time(a, math.exp(-s))
    ref = (2.5 * math.log(N) + s + math.log(2 * math.sqrt(2) / math.pi**2)) * N**2 / (
        2 * math.pi**2
    )
    assert t == pytest.approx(ref, rel=0.01)


def test_worst_case_below_one_at_level_one_crossing():
    chain = models.bd_uniform(10)
    p, d, spec = _analyze(chain)
    a = thm3_curve(p, spec.lambda2, "a")
    t = mixing_time(a, 1.0)
    worst, _ = worst_case_tv(chain, p, t)
    assert worst <= 1.0


def test_median_envelope_cases():
    nu = np.full(4, 0.25)
    assert median_envelope(nu, nu) == (0.0, 0.0, 0.0)
    n = 5
    mu = np.zeros(n)
    mu[0] = 1.0
    uniform = np.full(n, 1.0 / n)
    integral, tv, twice = median_envelope(mu, uniform)
    assert integral == pytest.approx(1.0)
    assert tv == pytest.approx(2.0 * (1.0 - 1.0 / n))
    assert twice == pytest.approx(2.0)
    assert integral <= tv <= twice


def test_lower_median_minimizes_l1():
    rng = np.random.default_rng(31)
    for _ in range(300):
        n = int(rng.integers(2, 8))
        nu = rng.random(n) + 0.01
        nu /= nu.sum()
        f = rng.standard_normal(n)
        m = lower_median(f, nu)
        best = (np.abs(f - m) * nu).sum()
        for r in np.unique(f):
            assert best <= (np.abs(f - r) * nu).sum() + 1e-12
        # lower median on ties: the smallest admissible value
        assert m in f


def test_probabilist_conversion():
    assert probabilist_tv(2.0) == 1.0


def test_random_chain_soundness_sweep():
    # certificates must dominate the exact worst-case distance on arbitrary
    # irreducible chains, not just the curated families
    from qscert.core import build_continuous
    from qscert.evolution import Propagator
    from qscert.funineq import functional_constants

    rng = np.random.default_rng(123)
    checked = 0
    while checked < 15:
        n = int(rng.integers(2, 7))
        rates = rng.random((n, n)) * 2.0
        np.fill_diagonal(rates, 0.0)
        V = rng.random(n) * (rng.random(n) < 0.7)
        chain = build_continuous([str(i) for i in range(n)], rates, V)
        if not chain.irreducible:
            continue
        checked += 1
        p = perron(chain)
        d = doob_transform(chain, p)
        spec = dirichlet_spectrum(chain)
        fc = functional_constants(chain, p, d, lsi_mode="bracket")
        curves = [thm2_curve(p, fc.gap_tilde), lsi_curve(p, fc.lsi_lower)]
        if spec.reversible:
            curves += [thm3_curve(p, spec.lambda2, "a"), thm3_curve(p, spec.lambda2, "b")]
        reals = np.sort(np.unique(spec.eigenvalues.real.round(10)))
        prop = Propagator(chain.sub_generator())
        for t in np.geomspace(0.05, 15.0 / (reals[1] - reals[0]), 8):
            wc, _ = worst_case_tv(chain, p, t, propagator=prop)
            for c in curves:
                assert c.eval(t) >= wc - 1e-9

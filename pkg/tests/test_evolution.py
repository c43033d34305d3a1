import numpy as np
import pytest

from qscert import models
from qscert.core import build_continuous
from qscert.doob import doob_transform
from qscert.errors import NegativeTime, ReferenceZero, TotalMassUnderflow
from qscert.evolution import (
    Propagator,
    conditioned_law,
    distances,
    doob_law,
    evolution_report,
    survival_curve,
    worst_case_tv,
)
from qscert.spectral import dirichlet_spectrum, perron


def test_time_zero_is_identity():
    chain = models.bd_uniform(4)
    mu0 = np.array([0.1, 0.2, 0.3, 0.4])
    law, surv = conditioned_law(chain, mu0, 0.0)
    assert np.allclose(law, mu0, atol=1e-14)
    assert surv == pytest.approx(1.0, abs=1e-14)


def test_quasi_stationary_start():
    chain = models.bd_uniform(5)
    p = perron(chain)
    for t in (0.1, 1.0, 10.0):
        law, surv = conditioned_law(chain, p.nu, t)
        assert np.abs(law - p.nu).sum() <= 1e-10
        assert surv == pytest.approx(np.exp(-p.lambda1 * t), abs=1e-12)


def test_small_walk_against_spectral_expansion():
    # independent oracle: expand exp(t(L-V)) in the known eigenbasis
    # (eigenvalues 2 -+ sqrt(2), profiles sin(pi x (2k+1)/4)) and compare
    chain = models.bd_uniform(2)
    A = chain.sub_generator()
    lams = np.array([2.0 - np.sqrt(2.0), 2.0 + np.sqrt(2.0)])
    t = 1.0
    modes = []
    for k in (0, 1):
        v = np.array([np.sin(np.pi * x * (2 * k + 1) / 4.0) for x in (1, 2)])
        modes.append(v)
    # biorthogonal expansion w.r.t. the reversible weights
    eta = np.array([2.0, 1.0]) / 3.0
    mu0 = np.array([0.0, 1.0])
    expansion = np.zeros(2)
    for lam, v in zip(lams, modes):
        norm = (eta * v * v).sum()
        coef = (mu0 * v).sum() / norm
        expansion += np.exp(-lam * t) * coef * (v * eta)
    law, surv = conditioned_law(chain, mu0, t)
    assert np.abs(law * surv - expansion).max() <= 1e-10
    assert np.abs(A @ modes[0] + lams[0] * modes[0]).max() <= 1e-12


def test_expm_and_spectral_paths_agree():
    for chain in (models.bd_uniform(6), models.bd_biased(5, 2.0)):
        A = chain.sub_generator()
        from qscert.spectral import invariant_measure

        sym = Propagator(A, weight=invariant_measure(chain))
        general = Propagator(A)
        mu0 = np.zeros(chain.n)
        mu0[-1] = 1.0
        for t in (0.3, 2.0, 15.0):
            a = sym.act(mu0, t)
            b = general.act(mu0, t)
            assert np.abs(a - b).max() <= 1e-10 * max(a.max(), 1e-30)


def test_negative_time_rejected():
    chain = models.bd_uniform(3)
    with pytest.raises(NegativeTime):
        conditioned_law(chain, np.array([1.0, 0, 0]), -1.0)


def test_underflow_detected():
    chain = models.bd_uniform(3)
    mu0 = np.array([1.0, 0.0, 0.0])
    with pytest.raises(TotalMassUnderflow):
        conditioned_law(chain, mu0, 6000.0)


def test_discrete_times_are_integers():
    chain = models.intro_walk(3)
    mu0 = np.array([0.0, 0.0, 1.0])
    law, surv = conditioned_law(chain, mu0, 3)
    assert surv < 1.0
    with pytest.raises(ValueError):
        conditioned_law(chain, mu0, 2.5)


def test_doob_law_identity_and_convergence():
    chain = models.bd_uniform(4)
    p = perron(chain)
    d = doob_transform(chain, p)
    mu0 = np.zeros(4)
    mu0[3] = 1.0
    mu_tilde0 = p.phi * mu0
    mu_tilde0 /= mu_tilde0.sum()
    assert np.allclose(doob_law(d, mu_tilde0, 0.0), mu_tilde0, atol=1e-14)
    late = doob_law(d, mu_tilde0, 50.0 * 16)
    assert np.abs(late - d.invariant).sum() <= 1e-8


def test_transfer_identity_on_cycle():
    # the conditioned mean of f can be read off the transformed flow applied
    # to f / phi; checked on indicator functions
    chain = models.cycle_chain(5)
    p = perron(chain)
    d = doob_transform(chain, p)
    mu0 = np.zeros(5)
    mu0[2] = 1.0
    mu_tilde0 = p.phi * mu0
    mu_tilde0 /= mu_tilde0.sum()
    for t in (0.5, 2.0):
        law, _ = conditioned_law(chain, mu0, t)
        prop = Propagator(d.generator, weight=d.invariant)
        flow = prop.act(mu_tilde0, t)
        for x in range(5):
            f = np.zeros(5)
            f[x] = 1.0
            lhs = law @ f
            rhs = (flow @ (f / p.phi)) / (flow @ (1.0 / p.phi))
            assert lhs == pytest.approx(rhs, abs=1e-9)


def test_distances_basics():
    ref = np.array([0.5, 0.5])
    assert distances(ref, ref) == (0.0, 0.0, 0.0)
    tv, chi2, kl = distances(np.array([1.0, 0.0]), ref)
    assert tv == pytest.approx(1.0)
    assert chi2 == pytest.approx(1.0)
    assert kl == pytest.approx(np.log(2.0))
    with pytest.raises(ReferenceZero):
        distances(ref, np.array([1.0, 0.0]))


def test_distance_inequalities_random():
    rng = np.random.default_rng(17)
    for _ in range(1000):
        n = int(rng.integers(2, 7))
        ref = rng.random(n) + 1e-3
        ref /= ref.sum()
        mu = rng.random(n) ** 3
        mu /= mu.sum()
        tv, chi2, kl = distances(mu, ref)
        assert tv <= np.sqrt(chi2) + 1e-12
        assert tv <= np.sqrt(2.0 * kl) + 1e-12
        assert kl >= 0.0 and chi2 >= 0.0 and tv <= 2.0


def test_worst_case_at_time_zero():
    chain = models.bd_uniform(5)
    p = perron(chain)
    tv, label = worst_case_tv(chain, p, 0.0)
    assert tv == pytest.approx(2.0 - 2.0 * p.nu.min(), abs=1e-12)
    assert label == chain.states.labels[int(np.argmin(p.nu))]


def test_point_mass_starts_dominate_random_ones():
    chain = models.cycle_chain(5)
    p = perron(chain)
    t = 1.0
    worst, _ = worst_case_tv(chain, p, t)
    rng = np.random.default_rng(23)
    for _ in range(200):
        mu0 = rng.random(5) ** 2
        mu0 /= mu0.sum()
        law, _ = conditioned_law(chain, mu0, t)
        assert np.abs(law - p.nu).sum() <= worst + 1e-12


def test_survival_curve_and_tail_slope():
    chain = models.bd_uniform(5)
    p = perron(chain)
    times = np.array([0.0, 1.0, 5.0, 20.0])
    surv = survival_curve(chain, p.nu, times)
    assert surv[0] == pytest.approx(1.0, abs=1e-14)
    assert np.abs(surv - np.exp(-p.lambda1 * times)).max() <= 1e-10
    # from a point mass the tail log-slope converges to -lambda1
    mu0 = np.zeros(5)
    mu0[4] = 1.0
    tail = np.linspace(100.0, 300.0, 30)
    vals = survival_curve(chain, mu0, tail)
    slope = np.polyfit(tail, np.log(vals), 1)[0]
    assert abs(-slope - p.lambda1) <= 1e-4


def test_report_sandwiches_and_monotonicity():
    chain = models.bd_uniform(6)
    p = perron(chain)
    d = doob_transform(chain, p)
    spec = dirichlet_spectrum(chain)
    times = np.geomspace(0.05, 20.0 / (spec.lambda2 - p.lambda1), 25)
    mu0 = np.zeros(6)
    mu0[0] = 1.0
    rep = evolution_report(chain, p, d, mu0, times)
    r2 = p.ratio**2
    assert np.all(rep.chi2 <= r2 * rep.chi2_doob * (1 + 1e-6) + 1e-22)
    assert np.all(rep.chi2 >= rep.chi2_doob / r2 * (1 - 1e-6) - 1e-22)
    assert np.all(rep.kl <= p.ratio * rep.kl_doob * (1 + 1e-6) + 1e-22)
    assert np.all(rep.kl >= rep.kl_doob / p.ratio * (1 - 1e-6) - 1e-22)
    assert np.all(np.diff(rep.chi2_doob) <= 1e-12)
    assert np.all(np.diff(rep.kl_doob) <= 1e-12)
    assert np.all(np.diff(rep.survival) <= 1e-12)
    rows = list(rep.rows())
    assert rows[0]["t"] == pytest.approx(times[0])
    assert set(rows[0]) == {"t", "survival", "tv_actual", "I_t", "I_tilde_t", "J_t", "J_tilde_t"}


def test_unkilled_chain_survival_is_one():
    chain = build_continuous(["a", "b"], [[-1, 1], [1, -1]], [0.0, 0.0])
    mu0 = np.array([1.0, 0.0])
    law, surv = conditioned_law(chain, mu0, 10.0)
    assert surv == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(law, [0.5, 0.5], atol=1e-8)

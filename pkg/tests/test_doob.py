import numpy as np
import pytest
import scipy.linalg as sla

from qscert import models
from qscert.core import build_continuous, build_discrete
from qscert.doob import doob_continuous, doob_discrete, doob_invariant, doob_transform, symmetrize
from qscert.errors import NonStochastic, PerronMismatch
from qscert.spectral import perron


def test_unkilled_chain_is_fixed():
    chain = build_continuous(["a", "b", "c"],
                             [[-1, 1, 0], [0.5, -1, 0.5], [0, 1, -1]],
                             [0.0, 0.0, 0.0])
    p = perron(chain)
    d = doob_continuous(chain, p)
    assert np.allclose(d.generator, chain.rates, atol=1e-12)
    assert np.allclose(d.invariant, p.eta, atol=1e-12)


def test_symmetric_walk_n2_rates():
    # phi proportional to (sin pi/4, sin pi/2) makes both transformed rates sqrt(2)
    chain = models.bd_uniform(2)
    d = doob_transform(chain)
    assert d.generator[0, 1] == pytest.approx(np.sqrt(2.0), rel=1e-12)
    assert d.generator[1, 0] == pytest.approx(np.sqrt(2.0), rel=1e-12)
    assert np.abs(d.invariant @ d.generator).max() <= 1e-12


def test_cycle_transform_rates():
    N = 6
    chain = models.cycle_chain(N)
    p = perron(chain)
    d = doob_continuous(chain, p)
    c = 1.0 - p.lambda1
    for x in range(1, N):
        assert d.generator[x, (x + 1) % N] == pytest.approx(c, rel=1e-10)
    assert d.generator[0, 1] == pytest.approx(c ** (1 - N), rel=1e-10)


def test_cycle_left_profile_is_reflected_right_profile():
    # reversing the cycle is conjugation by x -> -x, so the left profile is
    # the reflected right profile
    N = 6
    chain = models.cycle_chain(N)
    p = perron(chain)
    iota = [(-x) % N for x in range(N)]
    reflected = p.phi[iota]
    a = p.phi_star / p.phi_star.sum()
    b = reflected / reflected.sum()
    assert np.allclose(a, b, atol=1e-10)
    # the pointwise product is constant away from the killing site and drops
    # by (1 - lambda1)^N exactly there
    prod = p.phi * p.phi_star
    assert np.allclose(prod[1:], prod[1], rtol=1e-9)
    assert prod[0] / prod[1] == pytest.approx((1 - p.lambda1) ** N, rel=1e-9)


def test_cycle_transform_invariant_profile():
    # the transformed invariant law loads every state equally except the
    # killing site, which carries the factor (1 - lambda1)^N; it solves
    # eta_tilde Lt = 0 exactly, which uniform does not
    N = 7
    chain = models.cycle_chain(N)
    p = perron(chain)
    d = doob_continuous(chain, p)
    c = 1.0 - p.lambda1
    profile = np.full(N, c ** (-N))
    profile[0] = 1.0
    profile /= profile.sum()
    assert np.allclose(d.invariant, profile, rtol=1e-9)
    assert np.abs(d.invariant @ d.generator).max() <= 1e-12
    uniform_resid = np.abs((np.ones(N) / N) @ d.generator).max()
    assert uniform_resid > 1e-3


def test_invariant_formula_vs_direct_solve():
    chain = models.bd_uniform(4)
    p = perron(chain)
    d = doob_continuous(chain, p)
    inv = doob_invariant(p)
    null = sla.null_space(d.generator.T)
    direct = null[:, 0] / null[:, 0].sum()
    assert np.allclose(inv, direct, atol=1e-10)
    # profile carried by the squared eigenvector against the invariant law
    w = p.phi**2 * p.eta
    assert np.allclose(inv, w / w.sum(), atol=1e-12)


def test_symmetrize_fixed_point_and_idempotence():
    chain = models.bd_biased(5, 2.0)
    p = perron(chain)
    d = doob_continuous(chain, p)
    # reversible transform: symmetrization changes nothing
    assert np.allclose(symmetrize(d.generator, d.invariant), d.generator, atol=1e-10)
    rng = np.random.default_rng(3)
    G = rng.random((4, 4))
    np.fill_diagonal(G, 0.0)
    np.fill_diagonal(G, -G.sum(axis=1))
    m = rng.random(4) + 0.1
    m /= m.sum()
    S1 = symmetrize(G, m)
    S2 = symmetrize(S1, m)
    assert np.allclose(S1, S2, atol=1e-12)
    flows = m[:, None] * S1
    assert np.abs(flows - flows.T).max() <= 1e-12


def test_cycle_symmetrization_structure():
    # all undirected edges of the symmetrized transform carry the same
    # conductance; the jump rates out of the killing site are c^{1-N}/2 and
    # all others c/2
    N = 5
    chain = models.cycle_chain(N)
    p = perron(chain)
    d = doob_continuous(chain, p)
    c = 1.0 - p.lambda1
    S = d.symmetrized
    cond = d.invariant[:, None] * S
    edges = [(x, (x + 1) % N) for x in range(N)]
    values = [cond[x, y] for x, y in edges] + [cond[y, x] for x, y in edges]
    assert np.allclose(values, values[0], rtol=1e-10)
    assert S[0, 1] == pytest.approx(0.5 * c ** (1 - N), rel=1e-10)
    assert S[0, N - 1] == pytest.approx(0.5 * c ** (1 - N), rel=1e-10)
    assert S[1, 2] == pytest.approx(0.5 * c, rel=1e-10)


def test_conjugation_mismatch_detected():
    chain = models.bd_uniform(4)
    p = perron(chain)
    bad = type(p)(
        lambda1=p.lambda1 + 0.05,
        phi=p.phi,
        nu=p.nu,
        ratio=p.ratio,
        residual=p.residual,
        eta=p.eta,
        phi_star=p.phi_star,
    )
    with pytest.raises(PerronMismatch):
        doob_continuous(chain, bad)


def test_spectrum_shift_on_continuous_models():
    for chain in (models.bd_uniform(6), models.bd_biased(5, 0.5), models.cycle_chain(6)):
        p = perron(chain)
        d = doob_continuous(chain, p)
        w_t = np.sort_complex(np.linalg.eigvals(-d.generator))
        A = np.diag(chain.killing) - chain.rates
        w_a = np.sort_complex(np.linalg.eigvals(A) - p.lambda1)
        assert np.abs(w_t - w_a).max() <= 1e-8


def test_semigroup_conjugation_identity():
    for chain in (models.bd_uniform(5), models.cycle_chain(5)):
        p = perron(chain)
        d = doob_continuous(chain, p)
        Phi = np.diag(p.phi)
        Phi_inv = np.diag(1.0 / p.phi)
        A = chain.sub_generator()
        for t in (0.1, 1.0, 10.0):
            lhs = np.exp(-p.lambda1 * t) * (Phi @ sla.expm(t * d.generator) @ Phi_inv)
            rhs = sla.expm(t * A)
            assert np.abs(lhs - rhs).max() <= 1e-8


def test_rock_breaking_transformed_kernel_exact():
    chain = models.rock_breaking(4)
    d = doob_discrete(chain, 0.5, np.array([1.0, 2.0, 3.0, 6.0]),
                      np.array([1.0, 0.0, 0.0, 0.0]))
    printed = np.array(
        [[1.0, 0.0, 0.0, 0.0],
         [0.5, 0.5, 0.0, 0.0],
         [0.5, 0.0, 0.5, 0.0],
         [0.0, 0.25, 0.5, 0.25]]
    )
    assert np.array_equal(d.generator, printed)
    assert np.array_equal(d.invariant, [1.0, 0.0, 0.0, 0.0])


def test_constant_profile_recovers_kernel():
    P = np.array([[0.3, 0.7], [0.6, 0.4]])
    beta = 0.5
    chain = build_discrete(["a", "b"], beta * P, (1 - beta) * np.ones(2))
    p = perron(chain)
    d = doob_discrete(chain, p.beta, p.phi, p.psi)
    assert np.allclose(d.generator, P, atol=1e-10)


def test_intro_walk_transform():
    chain = models.intro_walk(2)
    p = perron(chain)
    assert p.beta == pytest.approx(np.cos(np.pi / 5.0), abs=1e-12)
    d = doob_discrete(chain, p.beta, p.phi, p.psi)
    assert np.abs(d.generator.sum(axis=1) - 1.0).max() <= 1e-12
    assert np.abs(d.invariant @ d.generator - d.invariant).max() <= 1e-12


def test_nonstochastic_rejected():
    chain = models.intro_walk(3)
    p = perron(chain)
    with pytest.raises(NonStochastic):
        doob_discrete(chain, p.beta * 1.01, p.phi, p.psi)


def test_discrete_ratio_bounds():
    # the stationary law of the transformed kernel is squeezed between
    # nu / ratio and nu * ratio
    rng = np.random.default_rng(5)
    chains = [models.intro_walk(5), models.zhou_bd(5), models.rock_breaking(5)]
    for _ in range(5):
        n = int(rng.integers(2, 6))
        Q = rng.random((n, n)) + 0.05
        a = rng.random(n) * 0.3
        scale = (Q.sum(axis=1) + a) * 1.0
        Q /= scale[:, None]
        a = 1.0 - Q.sum(axis=1)
        chains.append(build_discrete([str(i) for i in range(n)], Q, a))
    for chain in chains:
        p = perron(chain)
        d = doob_discrete(chain, p.beta, p.phi, p.psi)
        r = p.ratio
        assert np.all(d.invariant <= r * p.nu + 1e-12)
        assert np.all(d.invariant >= p.nu / r - 1e-12)

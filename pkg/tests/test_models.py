import math
from fractions import Fraction

import numpy as np
import pytest

from qscert import models
from qscert.doob import doob_transform
from qscert.errors import BoundaryDefect, CertificationFailure, SchemaError, SizeGuard
from qscert.evolution import conditioned_law
from qscert.funineq import spectral_gap
from qscert.spectral import dirichlet_spectrum, perron


def test_symmetric_walk_meta_matches_solver():
    for N in (3, 8):
        chain = models.bd_uniform(N)
        spec = dirichlet_spectrum(chain)
        assert np.allclose(np.sort(spec.eigenvalues.real),
                           chain.meta["spectrum_closed"], atol=1e-10)
        p = perron(chain)
        assert p.ratio == pytest.approx(chain.meta["phi_ratio_closed"], rel=1e-10)


def test_biased_asymptote_and_ratio_behavior():
    N, r = 10, 2.0
    chain = models.bd_biased(N, r)
    p = perron(chain)
    asym = chain.meta["lambda1_asymptote"]
    assert p.lambda1 == pytest.approx(asym, rel=0.05)
    # the exact finite-N deviation of the eigenvector ratio from r/(r-1) is
    # of size ~6.3 r^{-N} here (dominant term N (r - 1/r) r^{-N} / 2)
    rel_dev = abs(p.ratio - r / (r - 1.0)) / (r / (r - 1.0))
    assert rel_dev <= 8.0 * r ** (-N)
    assert rel_dev >= 5.0 * r ** (-N)


def test_biased_root_certificates():
    N, r = 5, 2.0
    spec = dirichlet_spectrum(models.bd_biased(N, r))
    certs = models.lemma11_certify(N, r, spec.eigenvalues.real)
    assert len(certs) == N
    for c in certs:
        assert c.residual < 1e-8
        assert c.poly_residual < 1e-8
        assert abs(c.rho_plus * c.rho_minus - 1.0 / r) <= 1e-10
        assert abs(c.psi_image - c.lam) <= 1e-9 * max(1.0, abs(c.lam))


def test_biased_root_pairing_and_sign_structure():
    N, r = 6, 2.0
    roots = models.biased_char_roots(N, r)
    assert roots.size == 2 * N
    # the involution rho -> 1/(r rho) permutes the root set
    mapped = 1.0 / (r * roots)
    for z in mapped:
        assert np.min(np.abs(roots - z)) <= 1e-7
    spec = dirichlet_spectrum(models.bd_biased(N, r))
    certs = models.lemma11_certify(N, r, spec.eigenvalues.real)
    positive = [c for c in certs
                if abs(c.rho_minus.imag) < 1e-9 and c.rho_minus.real > 0]
    assert len(positive) == 1
    assert positive[0].lam == pytest.approx(spec.lambda1, abs=1e-9)
    lam_sorted = np.sort([c.lam for c in certs])
    for lam in lam_sorted[1:-1]:
        assert (lam - 1.0 - r) ** 2 < 4.0 * r


def test_certification_failure_on_wrong_value():
    with pytest.raises(CertificationFailure):
        models.lemma11_certify(5, 2.0, [0.123])


def test_downward_biased_gap_floor():
    N, r = 50, 0.5
    spec = dirichlet_spectrum(models.bd_biased(N, r))
    gap = spec.lambda2 - spec.lambda1
    floor = (1 - r) ** 2 * math.sqrt(r) / (2 * N**2)
    assert gap >= 0.8 * floor


def test_cycle_eigenvector_identity():
    N = 7
    chain = models.cycle_chain(N)
    A = chain.sub_generator()
    for re, im in chain.meta["char_roots"]:
        c = complex(re, im)
        phi = np.array([1.0 + 0j] + [c ** (x - N) for x in range(1, N)])
        assert np.abs(A @ phi - (c - 1.0) * phi).max() <= 1e-8


def test_cycle_large_n_asymptotics():
    chain = models.cycle_chain(50)
    p = perron(chain)
    assert 0.9 <= p.lambda1 * 50 / math.log(2.0) <= 1.1
    assert 1.9 <= p.ratio <= 2.1


def test_cycle_small_case_algebra():
    chain = models.cycle_chain(3)
    p = perron(chain)
    c = 1.0 - p.lambda1
    assert c**3 + c**2 == pytest.approx(1.0, abs=1e-12)
    # c^{-2} = 1 + c from the defining cubic
    assert p.ratio == pytest.approx(1.0 + c, rel=1e-10)
    assert p.ratio == pytest.approx(c**-2, rel=1e-10)


def test_product_chain_eigenstructure():
    base = models.two_point()
    p = perron(base)
    for d in (1, 3):
        prod = models.product_chain(base, p, d)
        pp = perron(prod)
        assert pp.lambda1 == pytest.approx(p.lambda1, abs=1e-10)
        nu_t = np.array(prod.meta["nu_tensor"])
        law, _ = conditioned_law(prod, nu_t, 1.0)
        assert np.abs(law - nu_t).sum() <= 1e-10
    prod1 = models.product_chain(base, p, 1)
    assert prod1 == base


def test_product_gap_scales_with_dimension():
    # the averaged generator slows each factor by 1/d, so the transform's
    # gap is the single-factor gap divided by d
    base = models.two_point()
    p = perron(base)
    single = spectral_gap(doob_transform(base, p).symmetrized,
                          doob_transform(base, p).invariant)
    for d in (2, 3):
        prod = models.product_chain(base, p, d)
        dd = doob_transform(prod)
        gap = spectral_gap(dd.symmetrized, dd.invariant)
        assert d * gap == pytest.approx(single, rel=1e-9)


def test_product_size_guard():
    base = models.bd_uniform(9)
    p = perron(base)
    with pytest.raises(SizeGuard):
        models.product_chain(base, p, 5)


def test_rock_breaking_tables():
    chain = models.rock_breaking(4)
    assert chain.states.labels == ("2.1.1", "2.2", "3.1", "4")
    expected = np.array(
        [
            [Fraction(1, 2), 0, 0, 0],
            [Fraction(1, 2), Fraction(1, 4), 0, 0],
            [Fraction(3, 4), 0, Fraction(1, 4), 0],
            [0, Fraction(3, 8), Fraction(1, 2), Fraction(1, 8)],
        ],
        dtype=float,
    )
    assert np.array_equal(chain.sub, expected)
    assert np.array_equal(chain.absorb, [0.5, 0.25, 0.0, 0.0])
    assert chain.meta["phi_ratio_closed"] == 6.0


def test_rock_breaking_spectrum_multiplicities():
    for n in (4, 5, 6):
        labels, full = models.rock_breaking_full(n)
        parts = models.partitions_of(n)
        w = np.sort(np.linalg.eigvals(full).real)
        expected = np.sort([0.5 ** (n - len(pt)) for pt in parts])
        assert np.abs(w - expected).max() <= 1e-7


def test_rock_breaking_guard():
    with pytest.raises(SizeGuard):
        models.rock_breaking(13)


def test_zhou_family_closed_spectrum():
    for N in (2, 4, 8):
        chain = models.zhou_bd(N)
        w = np.sort(np.linalg.eigvals(chain.sub).real)
        closed = np.sort(chain.meta["beta_family_closed"])
        assert np.abs(w - closed).max() <= 1e-10
        p = perron(chain)
        assert p.beta == pytest.approx(math.cos(math.pi / (2 * N + 1)), abs=1e-12)
        assert np.allclose(p.nu, chain.meta["nu_closed"], atol=1e-9)


def test_zhou_certificates():
    N = 5
    chain = models.zhou_bd(N)
    for theta, c in zip(chain.meta["theta_closed"], chain.meta["c_closed"]):
        cert = models.zhou_certify(chain, theta, c)
        assert max(cert.boundary_defects) <= 1e-9
        assert cert.beta == pytest.approx(math.cos(theta), abs=1e-12)
    with pytest.raises(BoundaryDefect):
        models.zhou_certify(chain, 0.3, 0.1)


def test_zhou_interior_identity():
    # the three-term recursion holds for every (theta, c) by the product
    # formula for cosines; spot-check on random triples
    rng = np.random.default_rng(2)
    p = 0.3
    q = 1.0 - p
    for _ in range(50):
        theta = rng.uniform(0.05, 3.0)
        c = rng.uniform(-1.0, 1.0)
        x = int(rng.integers(1, 20))
        beta = 2.0 * math.sqrt(p * q) * math.cos(theta)
        phi = lambda y: (p / q) ** (y / 2.0) * math.cos(theta * y + c)
        lhs = q * phi(x + 1) + p * phi(x - 1)
        assert lhs == pytest.approx(beta * phi(x), abs=1e-10 * max(1.0, abs(phi(x))))


def test_zhou_trap_handling():
    chain = models.zhou_bd(4, p=0.5, r=1.0, s=1.0)
    # both endpoints are traps: interior states absorb from either side
    assert chain.n == 3
    assert chain.absorb[0] > 0 and chain.absorb[-1] > 0


def test_intro_walk_mirrors_zhou():
    intro = models.intro_walk(4)
    zhou = models.zhou_bd(4)
    wi = np.sort(np.linalg.eigvals(intro.sub).real)
    wz = np.sort(np.linalg.eigvals(zhou.sub).real)
    assert np.abs(wi - wz).max() <= 1e-12


def test_builtin_registry():
    assert models.make_builtin_ref("bd_uniform:N=4") == models.bd_uniform(4)
    assert models.make_builtin_ref("builtin:cycle?N=5") == models.cycle_chain(5)
    assert models.make_builtin_ref("bd_biased:N=6,r=0.5") == models.bd_biased(6, 0.5)
    assert models.make_builtin_ref("zhou_bd?N=4&p=0.5") == models.zhou_bd(4, p=0.5)
    assert models.make_builtin_ref("product?d=2").n == 4
    with pytest.raises(SchemaError):
        models.make_builtin_ref("unknown:N=2")
    with pytest.raises(SchemaError):
        models.make_builtin_ref("bd_uniform:M=4")
    with pytest.raises(SchemaError):
        models.make_builtin_ref("bd_uniform:N=x")
    with pytest.raises(SchemaError):
        models.make_builtin_ref("bd_uniform")   # missing required N

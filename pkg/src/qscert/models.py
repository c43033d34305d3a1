"""Built-in model families with closed-form reference data attached in meta.

Families (addressable as ``builtin:name?param=value`` from the CLI and as
``"name:param=value"`` inside model files):

* ``bd_uniform``   symmetric birth-death walk on 1..N, killed at 1, reflected
                   at N by a doubled down-jump;
* ``bd_biased``    biased walk (up-rate r, down-rate 1), killed at 1,
                   reflected at N by down-rate 1+r;
* ``cycle``        one-directional walk on Z_N, killed at 0 (non-reversible);
* ``product``      d-fold average-generator product of the symmetric
                   two-state chain with unit killing;
* ``rock_breaking`` binomial-splitting chain on integer partitions of n,
                   absorbing at the all-ones partition;
* ``zhou_bd``      discrete birth-death kernel on 0..N with boundary
                   parameters (r, s), absorbing traps dropped into the
                   absorb vector;
* ``intro_walk``   lazy-at-top simple random walk on 1..N absorbed at 0.

Attached meta values are exact or closed-form reference quantities
(spectra, eigenvector ratios, kernels); validation against the generic
eigensolver lives in the test-suite and the verification command.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import comb, cos, pi, sin, sqrt

import numpy as np

from .core import build_continuous, build_discrete
from .errors import BoundaryDefect, CertificationFailure, SchemaError, SizeGuard


# -- continuous birth-death families ------------------------------------------

def bd_uniform(N):
    """Symmetric walk on 1..N: unit edge rates, down-rate 2 at N, killed at 1."""
    if N < 2:
        raise SizeGuard("bd_uniform needs N >= 2")
    L = np.zeros((N, N))
    for x in range(N - 1):
        L[x, x + 1] = 1.0
        L[x + 1, x] = 1.0
    L[N - 1, N - 2] = 2.0
    V = np.zeros(N)
    V[0] = 1.0
    spectrum = sorted(2.0 * (1.0 - cos((2 * k + 1) * pi / (2 * N))) for k in range(N))
    meta = {
        "family": "bd_uniform",
        "params": {"N": N},
        "lambda1_closed": 2.0 * (1.0 - cos(pi / (2 * N))),
        "spectrum_closed": spectrum,
        "phi_ratio_closed": 1.0 / sin(pi / (2 * N)),
        "phi_profile": [sin(pi * x / (2 * N)) for x in range(1, N + 1)],
    }
    return build_continuous([str(x) for x in range(1, N + 1)], L, V, meta=meta)


def bd_biased(N, r):
    """Biased walk on 1..N: up-rate r, down-rate 1, down-rate 1+r at N, killed at 1.

    The geometric profile ``(r-1) r^{x-1} / (r^N - 1)`` attached under
    ``eta_reference`` solves detailed balance on every interior edge; the
    exact invariant law differs from it only through the reflected top state
    (whose down-rate is 1+r rather than 1).
    """
    if N < 2:
        raise SizeGuard("bd_biased needs N >= 2")
    if r <= 0 or r == 1:
        raise SizeGuard("bd_biased needs r > 0, r != 1")
    L = np.zeros((N, N))
    for x in range(N - 1):
        L[x, x + 1] = r
        L[x + 1, x] = 1.0
    L[N - 1, N - 2] = 1.0 + r
    V = np.zeros(N)
    V[0] = 1.0
    eta_ref = [(r - 1.0) * r ** (x - 1) / (r**N - 1.0) for x in range(1, N + 1)]
    meta = {
        "family": "bd_biased",
        "params": {"N": N, "r": r},
        "eta_reference": eta_ref,
    }
    if r > 1:
        meta["lambda1_asymptote"] = 0.5 * (r + 1.0) * (r - 1.0) ** 2 / r ** (N + 1)
        meta["phi_ratio_limit"] = r / (r - 1.0)
    else:
        sr = sqrt(r)
        meta["lambda1_window"] = [
            (1 - sr) ** 2 + 4 * sr * sin((1 - r) / (2 * N + 4)) ** 2,
            (1 - sr) ** 2 + 4 * sr * sin(pi / (2 * N)) ** 2,
        ]
        meta["lambda2_window"] = [
            (1 - sr) ** 2 + 4 * sr * sin(pi / (2 * N)) ** 2,
            (1 - sr) ** 2 + 4 * sr * sin(pi / N) ** 2,
        ]
    return build_continuous([str(x) for x in range(1, N + 1)], L, V, meta=meta)


# -- biased-chain eigenvalue certificates --------------------------------------

@dataclass(frozen=True)
class BiasedEigenCertificate:
    """Certifies one eigenvalue of the biased chain against its root pair.

    ``rho_plus``/``rho_minus`` solve ``r X^2 + (lam - 1 - r) X + 1 = 0`` (so
    their product is 1/r); ``psi_image`` maps rho_plus back through
    ``((1+r) rho - 1 - r rho^2)/rho`` and must reproduce the eigenvalue;
    ``poly_residual`` is the relative defect of rho_plus in the degree-2N
    characteristic polynomial; ``residual`` is the eigen-equation defect of
    the profile ``x -> rho_plus^x - rho_minus^x``.
    """

    lam: float
    rho_plus: complex
    rho_minus: complex
    psi_image: complex
    residual: float
    poly_residual: float
    pair_defect: float


def biased_char_roots(N, r):
    """The 2N roots of X^{2(N+1)} - X^{2N} + r^{1-N} X^2 - r^{-N-1}, with the
    two removable roots +-1/sqrt(r) taken out."""
    coeffs = np.zeros(2 * N + 3)
    coeffs[0] = 1.0
    coeffs[2] = -1.0
    coeffs[2 * N] = r ** (1.0 - N)
    coeffs[2 * N + 2] = -(r ** (-N - 1.0))
    roots = np.roots(coeffs)
    for s in (1.0 / sqrt(r), -1.0 / sqrt(r)):
        k = int(np.argmin(np.abs(roots - s)))
        roots = np.delete(roots, k)
    return roots


def _poly_value_and_scale(rho, N, r):
    terms = np.array(
        [rho ** (2 * N + 2), -(rho ** (2 * N)), r ** (1.0 - N) * rho**2, -(r ** (-N - 1.0))]
    )
    return terms.sum(), max(float(np.abs(terms).max()), 1e-300)


def lemma11_certify(N, r, spectrum, tol=1e-8):
    """Certify every supplied eigenvalue of the biased chain; see
    :class:`BiasedEigenCertificate`.  Raises on any residual above ``tol``."""
    eigenvalues = np.asarray(spectrum, dtype=complex)
    chain = bd_biased(N, r)
    A = np.diag(chain.killing) - chain.rates
    certs = []
    for lam in eigenvalues:
        disc = np.sqrt(complex((lam - 1.0 - r) ** 2 - 4.0 * r))
        rho_p = (r + 1.0 - lam + disc) / (2.0 * r)
        rho_m = (r + 1.0 - lam - disc) / (2.0 * r)
        psi_image = ((1.0 + r) * rho_p - 1.0 - r * rho_p**2) / rho_p
        pair_defect = abs(rho_p * rho_m - 1.0 / r)
        x = np.arange(1, N + 1)
        profile = rho_p**x - rho_m**x
        if np.abs(profile).max() < 1e-200:
            raise CertificationFailure(f"degenerate eigenprofile at lam={lam!r}")
        defect = np.abs(A @ profile - lam * profile).max() / np.abs(profile).max()
        residual = float(defect / max(1.0, float(np.abs(A).max())))
        value, scale = _poly_value_and_scale(rho_p, N, r)
        poly_residual = float(abs(value) / scale)
        cert = BiasedEigenCertificate(
            lam=float(lam.real),
            rho_plus=complex(rho_p),
            rho_minus=complex(rho_m),
            psi_image=complex(psi_image),
            residual=residual,
            poly_residual=poly_residual,
            pair_defect=float(pair_defect),
        )
        if residual > tol or poly_residual > tol or pair_defect > 1e-10:
            raise CertificationFailure(
                f"certificate failed at lam={lam!r}: eig {residual:g}, "
                f"poly {poly_residual:g}, pair {pair_defect:g}"
            )
        if abs(psi_image - lam) > 1e-9 * max(1.0, abs(lam)):
            raise CertificationFailure(f"root does not map back to {lam!r}")
        certs.append(cert)
    return certs


# -- non-reversible cycle -------------------------------------------------------

def cycle_chain(N):
    """One-directional walk on Z_N with unit rate, killed at state 0."""
    if N < 3:
        raise SizeGuard("cycle needs N >= 3")
    L = np.zeros((N, N))
    for x in range(N):
        L[x, (x + 1) % N] = 1.0
    V = np.zeros(N)
    V[0] = 1.0
    roots = np.roots([1.0, 1.0] + [0.0] * (N - 2) + [-1.0])   # X^N + X^{N-1} - 1
    spectrum = sorted((1.0 - roots).tolist(), key=lambda z: (z.real, z.imag))
    c = max(z.real for z in roots if abs(z.imag) < 1e-12)
    meta = {
        "family": "cycle",
        "params": {"N": N},
        "char_roots": [[z.real, z.imag] for z in roots],
        "spectrum_closed": [[z.real, z.imag] for z in spectrum],
        "lambda1_closed": 1.0 - c,
        "phi_ratio_closed": c ** (1 - N),
    }
    return build_continuous([str(x) for x in range(N)], L, V, meta=meta)


# -- product family --------------------------------------------------------------

def two_point():
    """Symmetric two-state chain with unit killing everywhere."""
    L = np.array([[-1.0, 1.0], [1.0, -1.0]])
    V = np.array([1.0, 1.0])
    return build_continuous(["1", "2"], L, V, meta={"family": "two_point", "params": {}})


def product_chain(chain, p, d):
    """Average of d independent copies, killed at the mean single-site rate.

    The generator is ``(1/d) sum_k L_k`` on the d-fold product space with
    killing ``(1/d) sum_k V(x_k)``.  Its bottom eigenvalue equals the
    single-factor one and the quasi-stationary law is the d-fold tensor
    power of nu; higher eigenvalue gaps contract by the 1/d time change.
    """
    if d < 1:
        raise SizeGuard("product dimension d must be >= 1")
    n = chain.n
    if n**d > 20000:
        raise SizeGuard(f"product space size {n**d} exceeds the desk-scale guard")
    L1 = np.asarray(chain.rates)
    eye = np.eye(n)
    Ld = np.zeros((n**d, n**d))
    for k in range(d):
        term = np.ones((1, 1))
        for j in range(d):
            term = np.kron(term, L1 if j == k else eye)
        Ld += term / d
    V1 = np.asarray(chain.killing)
    Vd = np.zeros(n**d)
    for k in range(d):
        tile = np.ones((1,))
        for j in range(d):
            tile = np.kron(tile, V1 if j == k else np.ones(n))
        Vd += tile / d
    labels = ["|".join(tup) for tup in itertools.product(chain.states.labels, repeat=d)]
    phi_t = np.ones(1)
    nu_t = np.ones(1)
    for _ in range(d):
        phi_t = np.kron(phi_t, p.phi)
        nu_t = np.kron(nu_t, p.nu)
    meta = {
        "family": "product",
        "params": {"d": d, "base": chain.meta.get("family", "?")},
        "lambda1_closed": p.lambda1,
        "phi_tensor": phi_t.tolist(),
        "nu_tensor": (nu_t / nu_t.sum()).tolist(),
    }
    return build_continuous(labels, Ld, Vd, meta=meta)


# -- rock breaking -----------------------------------------------------------------

def partitions_of(n):
    """All partitions of n as descending tuples, in ascending lexicographic
    order of those tuples: (1,...,1) first, (n,) last (the display order of
    the splitting tables)."""

    def gen(total, maxpart):
        if total == 0:
            yield ()
            return
        for first in range(min(total, maxpart), 0, -1):
            for rest in gen(total - first, first):
                yield (first,) + rest

    return sorted(gen(n, n))


def _partition_label(part):
    return ".".join(str(x) for x in part)


def rock_breaking_full(n):
    """Exact splitting kernel on all partitions of n (absorbing row included).

    Each part splits by an independent symmetric binomial into two pieces,
    zeros are discarded, pieces are reordered.  Entries are exact dyadic
    rationals (Fraction arithmetic), returned as floats.
    """
    parts = partitions_of(n)
    index = {part: i for i, part in enumerate(parts)}
    P = [[Fraction(0)] * len(parts) for _ in parts]
    for part in parts:
        combo = {(): Fraction(1)}
        for lam in part:
            split = {}
            for k in range(lam + 1):
                pieces = tuple(x for x in (k, lam - k) if x > 0)
                split[pieces] = split.get(pieces, Fraction(0)) + Fraction(comb(lam, k), 2**lam)
            new = {}
            for acc, pa in combo.items():
                for pieces, pb in split.items():
                    key = tuple(sorted(acc + pieces, reverse=True))
                    new[key] = new.get(key, Fraction(0)) + pa * pb
            combo = new
        i = index[part]
        for target, prob in combo.items():
            P[i][index[target]] += prob
    labels = [_partition_label(part) for part in parts]
    return labels, np.array([[float(x) for x in row] for row in P])


def rock_breaking(n):
    """Splitting chain on partitions of n, absorbing at the all-ones partition."""
    if not 2 <= n <= 12:
        raise SizeGuard("rock_breaking supports 2 <= n <= 12")
    labels, full = rock_breaking_full(n)
    parts = partitions_of(n)
    # the all-ones partition is first in this ordering; drop it into absorption
    assert parts[0] == tuple([1] * n)
    Q = full[1:, 1:]
    a = full[1:, 0]
    surv = parts[1:]
    phi = [float(sum(comb(x, 2) for x in part)) for part in surv]
    psi = [1.0 if part == tuple([2] + [1] * (n - 2)) else 0.0 for part in surv]
    meta = {
        "family": "rock_breaking",
        "params": {"n": n},
        "beta_closed": 0.5,
        "phi_closed": phi,
        "psi_closed": psi,
        "phi_ratio_closed": float(comb(n, 2)),
        "full_labels": labels,
        "full_kernel": full.tolist(),
    }
    return build_discrete(labels[1:], Q, a, meta=meta)


# -- discrete birth-death (boundary-parameterized) ----------------------------------

def zhou_bd(N, p=0.5, r=0.5, s=1.0):
    """Discrete birth-death kernel on 0..N with boundary weights r (at 0) and
    s (at N); interior rows move down with probability p, up with q = 1 - p.

    Rows that are traps (r = 1 or s = 1) are removed from the surviving
    space and feed the absorb vector.  The canonical instance
    p = q = r = 1/2, s = 1 is the simple walk absorbed at N with holding at
    0; its eigenvalues are ``cos(j pi / (2N+1))`` for odd j with eigenprofile
    ``cos((2x+1) j pi / (2(2N+1)))``.
    """
    if not (0 < p < 1) or not (0 <= r <= 1) or not (0 <= s <= 1):
        raise SizeGuard("need p in (0,1) and r, s in [0,1]")
    if N < 2:
        raise SizeGuard("zhou_bd needs N >= 2")
    q = 1.0 - p
    m = N + 1
    full = np.zeros((m, m))
    full[0, 0] = r
    full[0, 1] = 1.0 - r
    for x in range(1, N):
        full[x, x - 1] = p
        full[x, x + 1] = q
    full[N, N - 1] = 1.0 - s
    full[N, N] = s
    traps = [x for x in range(m) if full[x, x] == 1.0]
    keep = [x for x in range(m) if x not in traps]
    Q = full[np.ix_(keep, keep)]
    a = full[np.ix_(keep, traps)].sum(axis=1) if traps else np.zeros(len(keep))
    meta = {"family": "zhou_bd", "params": {"N": N, "p": p, "r": r, "s": s}}
    if p == 0.5 and r == 0.5 and s == 1.0:
        thetas = [j * pi / (2 * N + 1) for j in range(1, 2 * N, 2)]
        meta["theta_closed"] = thetas
        meta["c_closed"] = [th / 2 for th in thetas]
        meta["beta_family_closed"] = [cos(th) for th in thetas]
        nu = np.cos((2 * np.arange(N) + 1) * pi / (2 * (2 * N + 1)))
        meta["nu_closed"] = (nu / nu.sum()).tolist()
    return build_discrete([str(x) for x in keep], Q, a, meta=meta)


@dataclass(frozen=True)
class BoundaryEigenCertificate:
    """Validates a proposed (theta, c) pair for the discrete birth-death kernel.

    ``beta = 2 sqrt(pq) cos(theta)`` with profile
    ``phi(x) = (p/q)^{x/2} cos(theta x + c)`` on 0..N; the two boundary
    defects are the residuals of the first and last row equations."""

    theta: float
    c: float
    beta: float
    boundary_defects: tuple


def zhou_certify(chain, theta, c, tol=1e-9):
    """Check a proposed (theta, c) eigen-pair against both boundary rows."""
    params = chain.meta.get("params", {})
    if chain.meta.get("family") != "zhou_bd":
        raise SchemaError("zhou_certify expects a zhou_bd chain")
    N, p, r, s = params["N"], params["p"], params["r"], params["s"]
    q = 1.0 - p
    beta = 2.0 * sqrt(p * q) * cos(theta)
    x = np.arange(N + 1)
    phi = (p / q) ** (x / 2.0) * np.cos(theta * x + c)
    d0 = abs(r * phi[0] + (1 - r) * phi[1] - beta * phi[0])
    dN = abs((1 - s) * phi[N - 1] + s * phi[N] - beta * phi[N])
    scale = max(1.0, float(np.abs(phi).max()))
    if d0 > tol * scale or dN > tol * scale:
        raise BoundaryDefect(
            f"boundary residuals ({d0:g}, {dN:g}) exceed {tol:g} for theta={theta!r}, c={c!r}"
        )
    return BoundaryEigenCertificate(
        theta=float(theta), c=float(c), beta=float(beta), boundary_defects=(float(d0), float(dN))
    )


def intro_walk(N):
    """Simple walk on 1..N, absorbed at 0, holding 1/2 at N (mirror of the
    canonical zhou_bd instance)."""
    if N < 2:
        raise SizeGuard("intro_walk needs N >= 2")
    Q = np.zeros((N, N))
    a = np.zeros(N)
    for i, x in enumerate(range(1, N + 1)):
        if x - 1 >= 1:
            Q[i, i - 1] = 0.5
        else:
            a[i] = 0.5
        if x + 1 <= N:
            Q[i, i + 1] = 0.5
        else:
            Q[i, i] += 0.5
    xs = np.arange(1, N + 1)
    nu = np.cos((2 * N + 1 - 2 * xs) * pi / (2 * (2 * N + 1)))
    meta = {
        "family": "intro_walk",
        "params": {"N": N},
        "beta_closed": cos(pi / (2 * N + 1)),
        "nu_closed": (nu / nu.sum()).tolist(),
    }
    return build_discrete([str(x) for x in range(1, N + 1)], Q, a, meta=meta)


# -- registry -----------------------------------------------------------------------

def _product_builtin(d=1):
    from .spectral import perron

    base = two_point()
    return product_chain(base, perron(base), int(d))


BUILTIN_PARAMS = {
    "bd_uniform": (bd_uniform, {"N": int}),
    "bd_biased": (bd_biased, {"N": int, "r": float}),
    "cycle": (cycle_chain, {"N": int}),
    "product": (_product_builtin, {"d": int}),
    "rock_breaking": (rock_breaking, {"n": int}),
    "zhou_bd": (zhou_bd, {"N": int, "p": float, "r": float, "s": float}),
    "intro_walk": (intro_walk, {"N": int}),
}


def make_builtin(name, params=None):
    """Instantiate a builtin by name with keyword parameters."""
    if name not in BUILTIN_PARAMS:
        raise SchemaError(f"unknown builtin {name!r}; known: {sorted(BUILTIN_PARAMS)}")
    fn, sig = BUILTIN_PARAMS[name]
    kwargs = {}
    for key, value in (params or {}).items():
        if key not in sig:
            raise SchemaError(f"builtin {name!r} has no parameter {key!r}")
        try:
            kwargs[key] = sig[key](value)
        except (TypeError, ValueError):
            raise SchemaError(f"parameter {key}={value!r} is not a {sig[key].__name__}") from None
    try:
        return fn(**kwargs)
    except TypeError as e:
        raise SchemaError(f"builtin {name!r}: {e}") from None


def make_builtin_ref(ref):
    """Parse references like ``bd_uniform:N=4``, ``builtin:cycle?N=7`` or
    ``zhou_bd?N=5&p=0.5`` and build the model."""
    text = ref.strip()
    if text.startswith("builtin:"):
        text = text[len("builtin:"):]
    name = text
    params = {}
    for sep in (":", "?"):
        if sep in text:
            name, _, tail = text.partition(sep)
            for item in tail.replace("&", ",").split(","):
                if not item:
                    continue
                if "=" not in item:
                    raise SchemaError(f"malformed builtin parameter {item!r} in {ref!r}")
                key, _, value = item.partition("=")
                params[key.strip()] = value.strip()
            break
    return make_builtin(name.strip(), params)

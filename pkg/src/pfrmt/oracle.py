"""Brute-force reference values, independent of the Pfaffian machinery.

* :func:`z_eigenvalue_quadrature`: tensor quadrature over the eigenvalues.
  For beta=1 the integral is taken over the ordered region in gap
  coordinates ``E_1 = u, E_{a+1} = E_a + s_a`` where ``|Delta|`` becomes a
  smooth polynomial, then multiplied by ``Ndim!``.
* :func:`z_matrix_montecarlo`: sampling of Gaussian real symmetric or
  quaternion self-dual matrices.
* :func:`epsilon_confluent_pair`: the beta=4 pair weight realized at finite
  separation ``epsilon``, plus :func:`richardson`.
* :class:`DiscretePairMeasure` and :func:`z_discrete_bruteforce`: an atomic
  pair measure for which every integral is a finite sum.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
import itertools
import math
import os
import warnings

import numpy as np
from numpy.polynomial import hermite_e, legendre
from scipy import integrate, special

from .ensembles import MomentMatrix
from .errors import BudgetError, NumericError, OnSupportError, UnsupportedOracleError
from .skew_linalg import vandermonde

NODE_CAP = 10**8

# truncation of the Gaussian eigenvalue range and of the gaps between ordered eigenvalues
GAUSS_HALF_WIDTH = 8.0
GAUSS_GAP_SPAN = 12.0
LAGUERRE_Y_MAX = 7.5

SCHEMES = ("gauss-legendre", "gauss-hermite", "gauss-laguerre")


@dataclass(frozen=True)
class QuadratureSpec:
    """Nodes per dimension and the 1D rule.

    ``gauss-legendre`` is a composite rule on a truncated range (panels of
    ``panel_nodes`` points); ``gauss-hermite`` / ``gauss-laguerre`` use the
    classical weight-adapted rules (beta=4 only); ``ordering`` selects the
    ordered-gap coordinates for beta=1.
    """

    nodes_per_dim: int = 80
    scheme: str = "gauss-legendre"
    ordering: bool = True
    panel_nodes: int = 10

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown quadrature scheme {self.scheme!r}")
        if self.nodes_per_dim < 2:
            raise ValueError("nodes_per_dim must be at least 2")


@dataclass(frozen=True)
class MCSpec:
    samples: int = 100_000
    seed: int = 0
    block: int = 4096

    def __post_init__(self):
        if self.samples < 2:
            raise ValueError("need at least two samples")


@dataclass
class OracleResult:
    value: complex
    error: float
    evaluations: int = 0
    method: str = ""


def default_threads():
    env = os.environ.get("PFRMT_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


# ---------------------------------------------------------------------------
# eigenvalue quadrature
# ---------------------------------------------------------------------------


def _composite(lo, hi, n, panel_nodes):
    panels = max(1, round(n / panel_nodes))
    per = max(2, n // panels)
    t, w = legendre.leggauss(per)
    bp = np.linspace(lo, hi, panels + 1)
    half = 0.5 * np.diff(bp)
    mid = 0.5 * (bp[1:] + bp[:-1])
    x = (mid[:, None] + half[:, None] * t).ravel()
    wt = (half[:, None] * w).ravel()
    return x, wt


def _ratio(e, params, gamma):
    """``prod_a prod_j (E_a - kappa2_j)^gamma / (E_a - kappa1_j)^gamma`` along the last axis."""
    out = np.ones(e.shape[:-1], dtype=complex)
    for k in params.kappa2:
        out = out * np.prod(e - k, axis=-1) ** gamma
    for k in params.kappa1:
        out = out / np.prod(e - k, axis=-1) ** gamma
    return out


def _abs_vandermonde_ordered(e):
    out = np.ones(e.shape[:-1])
    n = e.shape[-1]
    for a in range(n):
        for b in range(a + 1, n):
            out = out * (e[..., b] - e[..., a])
    return out


def _vandermonde_power(e, power):
    out = np.ones(e.shape[:-1])
    n = e.shape[-1]
    for a in range(n):
        for b in range(a + 1, n):
            out = out * (e[..., a] - e[..., b]) ** power
    return out


def _gauss_ranges(ens):
    if ens.id.startswith("gauss"):
        return "gauss"
    return "laguerre"


def _ordered_map(ens):
    """Smooth variable ``y``, its range, gap span and ``x(y)``, ``dx/dy``."""
    if _gauss_ranges(ens) == "gauss":
        return (-GAUSS_HALF_WIDTH, GAUSS_HALF_WIDTH), GAUSS_GAP_SPAN, (lambda y: y), (lambda y: np.ones_like(y))
    # x = y^2: P(x) dx = 2 y^nu exp(-y^2) dy and |Delta(x)| = prod (y_b - y_a)(y_b + y_a) are polynomial-Gaussian
    return (0.0, LAGUERRE_Y_MAX), LAGUERRE_Y_MAX, (lambda y: y * y), (lambda y: 2 * y)


def _ordered_beta1(ens, ndim, params, n, spec):
    """``ndim! * int_{E_1 <= ... <= E_ndim} prod P |Delta| prod ratio`` in gap coordinates."""
    (lo, hi), span, xmap, jac = _ordered_map(ens)
    u, wu = _composite(lo, hi, n, spec.panel_nodes)
    if ndim == 1:
        x = xmap(u)
        return complex(np.sum(wu * jac(u) * ens.weight(x) * _ratio(x[:, None], params, 1))), u.size
    s, ws = _composite(0.0, span, n, spec.panel_nodes)
    gaps = np.stack([g.ravel() for g in np.meshgrid(*([s] * (ndim - 1)), indexing="ij")], axis=-1)
    wgap = np.prod(np.stack([g.ravel() for g in np.meshgrid(*([ws] * (ndim - 1)), indexing="ij")], axis=-1), axis=1)
    offsets = np.concatenate([np.zeros((gaps.shape[0], 1)), np.cumsum(gaps, axis=1)], axis=1)
    total = 0j
    for ui, wi in zip(u, wu):
        y = ui + offsets
        keep = y[:, -1] <= hi
        y = y[keep]
        x = xmap(y)
        dens = np.prod(ens.weight(x) * jac(y), axis=1)
        total += wi * np.sum(wgap[keep] * dens * _abs_vandermonde_ordered(x) * _ratio(x, params, 1))
    return math.factorial(ndim) * complex(total), u.size * gaps.shape[0]


def _tensor_rule(ens, n, spec):
    """1D nodes and weights that already include the weight ``P``."""
    if spec.scheme == "gauss-hermite":
        if _gauss_ranges(ens) != "gauss":
            raise UnsupportedOracleError("gauss-hermite nodes need a Gaussian weight")
        x, w = hermite_e.hermegauss(n)
        return x, w
    if spec.scheme == "gauss-laguerre":
        if _gauss_ranges(ens) != "laguerre":
            raise UnsupportedOracleError("gauss-laguerre nodes need a Laguerre weight")
        x, w = special.roots_genlaguerre(n, float(ens._exponent()))
        return x, w
    if _gauss_ranges(ens) == "gauss":
        x, w = _composite(-10.0, 10.0, n, spec.panel_nodes)
        return x, w * ens.weight(x)
    y, w = _composite(0.0, math.sqrt(70.0), n, spec.panel_nodes)
    x = y * y
    return x, 2 * y * w * ens.weight(x)


def _full_space(ens, ndim, params, n, spec, power, gamma):
    x, w = _tensor_rule(ens, n, spec)
    if ndim == 1:
        return complex(np.sum(w * _ratio(x[:, None], params, gamma))), x.size
    rest = np.meshgrid(*([x] * (ndim - 1)), indexing="ij")
    rest = np.stack([r.ravel() for r in rest], axis=-1)
    wrest = np.ones(rest.shape[0])
    for wg in np.meshgrid(*([w] * (ndim - 1)), indexing="ij"):
        wrest = wrest * wg.ravel()
    total = 0j
    for xi, wi in zip(x, w):
        e = np.concatenate([np.full((rest.shape[0], 1), xi), rest], axis=1)
        total += wi * np.sum(wrest * _vandermonde_power(e, power) * _ratio(e, params, gamma))
    return complex(total), x.size**ndim


def _check_oracle_params(ens, params):
    for i, k in enumerate(params.kappa1):
        ens.check_off_support(k, f"kappa1[{i}]")


def z_eigenvalue_quadrature(ens, ndim, params, spec=None):
    """Unnormalized eigenvalue integral over the full space.

    beta=1: ``int prod P(E_a) |Delta(E)| prod det-ratio`` over ``R^ndim``
    (``[0, inf)^ndim`` for Laguerre), one factor per eigenvalue.
    beta=4: ``ndim`` distinct eigenvalues with ``Delta^4`` and squared
    ratios (each eigenvalue is doubly degenerate).
    The error estimate is the change from halving the node count.
    """
    spec = spec or QuadratureSpec()
    _check_oracle_params(ens, params)
    if ndim < 1:
        raise ValueError("ndim must be positive")
    if ens.beta == 1 and ndim > 4 or ens.beta == 4 and ndim > 3:
        raise BudgetError(f"quadrature oracle limited to desk scale (beta={ens.beta}, ndim={ndim})")
    n = spec.nodes_per_dim
    if float(n) ** ndim > NODE_CAP:
        raise BudgetError(f"{n}^{ndim} nodes exceed the cap of {NODE_CAP:.0e}")

    def run(nodes):
        if ens.beta == 1:
            if spec.ordering:
                return _ordered_beta1(ens, ndim, params, nodes, spec)
            return _full_space(ens, ndim, params, nodes, spec, 1, 1)
        return _full_space(ens, ndim, params, nodes, spec, 4, 2)

    value, count = run(n)
    coarse, count2 = run(max(2, n // 2))
    if not np.isfinite(value):
        raise NumericError("quadrature produced a non-finite value")
    return OracleResult(value, abs(value - coarse), count + count2, f"quadrature/{spec.scheme}")


# ---------------------------------------------------------------------------
# matrix Monte Carlo
# ---------------------------------------------------------------------------


def _sample_goe(rng, count, ndim):
    """Real symmetric matrices with density proportional to ``exp(-tr H^2 / 2)``."""
    a = rng.standard_normal((count, ndim, ndim))
    h = (a + np.swapaxes(a, 1, 2)) / 2.0
    idx = np.arange(ndim)
    h[:, idx, idx] = a[:, idx, idx]
    return h


def _sample_gse(rng, count, n):
    """``2n x 2n`` complex form of quaternion self-dual matrices, eigenvalue weight ``exp(-E^2/2)``."""
    q = rng.standard_normal((4, count, n, n)) / math.sqrt(2.0)
    # self-dual: q0 symmetric, q1..q3 antisymmetric
    q0 = (q[0] + np.swapaxes(q[0], 1, 2)) / math.sqrt(2.0)
    idx = np.arange(n)
    q0[:, idx, idx] = rng.standard_normal((count, n))
    qs = [(q[m] - np.swapaxes(q[m], 1, 2)) / math.sqrt(2.0) for m in (1, 2, 3)]
    h = np.empty((count, 2 * n, 2 * n), dtype=complex)
    h[:, 0::2, 0::2] = q0 + 1j * qs[0]
    h[:, 0::2, 1::2] = qs[1] + 1j * qs[2]
    h[:, 1::2, 0::2] = -qs[1] + 1j * qs[2]
    h[:, 1::2, 1::2] = q0 - 1j * qs[0]
    return h


def _mc_block(ens, ndim, params, seed, index, count):
    # block ``index`` owns the counter range starting at index * 2^128, so blocks never overlap
    rng = np.random.Generator(np.random.Philox(key=seed, counter=index << 128))
    if ens.beta == 1:
        h = _sample_goe(rng, count, ndim)
    else:
        h = _sample_gse(rng, count, ndim)
    dim = h.shape[-1]
    eye = np.eye(dim)
    f = np.ones(count, dtype=complex)
    for shifts, power in ((params.kappa2, 1), (params.kappa1, -1)):
        for k in shifts:
            det = np.linalg.det(h - k * eye)
            if ens.beta == 4 and k.imag == 0:
                # Hermitian self-dual: the determinant at a real shift is real
                if np.any(np.abs(det.imag) > 1e-10 * np.maximum(np.abs(det), 1.0)):
                    raise NumericError("quaternion determinant has an imaginary residue above 1e-10")
                det = det.real.astype(complex)
            f = f * det if power > 0 else f / det
    return np.array([f.real.sum(), f.imag.sum(), (f.real**2).sum(), (f.imag**2).sum()])


def z_matrix_montecarlo(ens, ndim, params, spec=None, threads=None):
    """Average of ``prod det(H - kappa2) / prod det(H - kappa1)`` over sampled matrices.

    ``ndim`` is the matrix dimension for beta=1 and the quaternion dimension
    for beta=4.  Blocks of ``spec.block`` samples use independent Philox
    counters, so the result is identical for any thread count.
    """
    spec = spec or MCSpec()
    if not ens.id.startswith("gauss"):
        raise UnsupportedOracleError(f"Monte Carlo sampling is only available for Gaussian ensembles, not {ens.id}")
    _check_oracle_params(ens, params)
    gamma = 2 if ens.beta == 4 else 1
    if ndim * gamma > 16:
        raise BudgetError("Monte Carlo oracle limited to matrices of size 16")
    blocks = [(i, min(spec.block, spec.samples - i * spec.block)) for i in range(-(-spec.samples // spec.block))]
    threads = threads or default_threads()
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(lambda b: _mc_block(ens, ndim, params, spec.seed, *b), blocks))
    else:
        parts = [_mc_block(ens, ndim, params, spec.seed, *b) for b in blocks]
    sums = np.sum(np.stack(parts), axis=0)
    n = spec.samples
    mean = complex(sums[0] / n, sums[1] / n)
    var_re = max(sums[2] / n - mean.real**2, 0.0)
    var_im = max(sums[3] / n - mean.imag**2, 0.0)
    err = math.sqrt((var_re + var_im) * n / (n - 1) / n)
    return OracleResult(mean, err, n, "montecarlo")


# ---------------------------------------------------------------------------
# confluent pair limit (beta=4)
# ---------------------------------------------------------------------------

INTEGRANDS = ("moment_pair", "cauchy_pair", "f_kernel")


def _row_functions(integrand, params):
    if integrand == "moment_pair":
        a, b = params
        return (lambda x: x ** (a - 1)), (lambda x: x ** (b - 1)), ()
    if integrand == "cauchy_pair":
        kappa, b = params
        return (lambda x: 1.0 / (kappa - x)), (lambda x: x ** (b - 1)), (kappa,)
    if integrand == "f_kernel":
        ka, kb = params
        return (lambda x: 1.0 / (ka - x)), (lambda x: 1.0 / (kb - x)), (ka, kb)
    raise ValueError(f"integrand must be one of {INTEGRANDS}")


def epsilon_confluent_pair(ens, integrand, params, eps):
    """``-(1/eps) int P(E) [f(E) g(E+eps) - g(E) f(E+eps)] dE``.

    Tends to the confluent pairing ``int P (f' g - f g')`` with an ``O(eps)`` error.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    f, g, poles = _row_functions(integrand, params)
    for k in poles:
        ens.check_off_support(k)

    def integrand_fn(x):
        return -ens.weight(x) * (f(x) * g(x + eps) - g(x) * f(x + eps)) / eps

    lo, hi = ens.support
    lo = max(lo, -40.0)
    hi = min(hi, 200.0)
    pts = sorted({p.real for p in poles if lo < p.real < hi})
    opts = dict(limit=400, epsabs=1e-14, epsrel=1e-12, points=pts or None)
    with warnings.catch_warnings():
        # tolerances sit at the roundoff floor on purpose
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        re = integrate.quad(lambda x: complex(integrand_fn(x)).real, lo, hi, **opts)[0]
        im = integrate.quad(lambda x: complex(integrand_fn(x)).imag, lo, hi, **opts)[0]
    return complex(re, im)


def richardson(values, ratio=2.0):
    """Eliminate successive powers ``eps, eps^2, ...`` from values at ``eps, eps/ratio, ...``."""
    table = [complex(v) for v in values]
    power = 1
    while len(table) > 1:
        fac = ratio**power
        table = [(fac * table[i + 1] - table[i]) / (fac - 1) for i in range(len(table) - 1)]
        power += 1
    return table[0]


def confluent_extrapolated(ens, integrand, params, eps=(1e-2, 5e-3, 2.5e-3)):
    return richardson([epsilon_confluent_pair(ens, integrand, params, e) for e in eps])


# ---------------------------------------------------------------------------
# atomic measure
# ---------------------------------------------------------------------------


class DiscretePairMeasure:
    """Pair density ``g = sum_ij c_ij delta(x - a_i) delta(y - a_j)`` and single density
    ``h = sum_i h_i delta(x - a_i)``; every reduction is a finite sum.

    Quacks like an :class:`~pfrmt.ensembles.Ensemble` for the kernel routines.
    """

    id = "discrete"
    beta = 1
    support = (-np.inf, np.inf)

    def __init__(self, atoms, pair_weights, single_weights=None):
        self.atoms = np.asarray(atoms, dtype=float)
        self.c = np.asarray(pair_weights, dtype=float)
        if self.c.shape != (self.atoms.size,) * 2:
            raise ValueError("pair weights must be a square matrix over the atoms")
        self.h = None if single_weights is None else np.asarray(single_weights, dtype=float)

    @classmethod
    def random(cls, size, seed=0):
        rng = np.random.default_rng(seed)
        return cls(rng.normal(size=size), rng.normal(size=(size, size)), rng.normal(size=size))

    def __hash__(self):
        return hash((self.atoms.tobytes(), self.c.tobytes(), None if self.h is None else self.h.tobytes()))

    def __eq__(self, other):
        return isinstance(other, DiscretePairMeasure) and hash(self) == hash(other)

    def check_off_support(self, kappa, field="kappa"):
        kappa = complex(kappa)
        if kappa.imag == 0 and np.any(self.atoms == kappa.real):
            raise OnSupportError(f"{field} = {kappa} coincides with an atom", field=field)
        return kappa

    def _pair(self, fv, gv):
        return complex(fv @ self.c @ gv - gv @ self.c @ fv)

    def _single(self, fv):
        if self.h is None:
            raise UnsupportedOracleError("measure has no single-variable density")
        return complex(np.sum(self.h * fv))

    def moment_single(self, a):
        return self._single(self.atoms ** (a - 1)).real

    def moment_pair(self, a, b):
        return self._pair(self.atoms ** (a - 1), self.atoms ** (b - 1)).real

    def cauchy_single(self, kappa):
        return self._single(1.0 / (self.check_off_support(kappa) - self.atoms))

    def cauchy_pair(self, kappa, b):
        return self._pair(1.0 / (self.check_off_support(kappa) - self.atoms), self.atoms ** (b - 1))

    def cauchy_pair_row(self, kappa, d):
        return np.array([self.cauchy_pair(kappa, b) for b in range(1, d + 1)], dtype=complex)

    def f_kernel(self, ka, kb):
        if complex(ka) == complex(kb):
            return 0j
        return self._pair(1.0 / (complex(ka) - self.atoms), 1.0 / (complex(kb) - self.atoms))

    def build_moment_matrix(self, d, precision="double", bordered=None):
        if bordered is None:
            bordered = d % 2 == 1
        size = d + (1 if bordered else 0)
        m = np.zeros((size, size), dtype=complex)
        for a in range(1, d + 1):
            for b in range(a + 1, d + 1):
                m[a - 1, b - 1] = self.moment_pair(a, b)
                m[b - 1, a - 1] = -m[a - 1, b - 1]
        if bordered:
            for a in range(1, d + 1):
                m[a - 1, d] = -self.moment_single(a)
                m[d, a - 1] = self.moment_single(a)
        if precision == "extended":
            from .precision import as_array

            m = as_array(m, "extended")
        return MomentMatrix(d, m, bordered, precision)


def z_discrete_bruteforce(measure, n, params):
    """Direct sum of the general ``n``-variable integral over all atom assignments.

    ``int h(z_n) prod_j g(z_{2j-1}, z_{2j}) prod_a [prod (z_a - kappa2) / prod (kappa1 - z_a)] Delta_n(z)``
    """
    atoms = measure.atoms
    na = atoms.size
    if float(na) ** n > 5e6:
        raise BudgetError("brute-force sum too large")
    total = 0j
    for idx in itertools.product(range(na), repeat=n):
        w = 1.0
        for j in range(n // 2):
            w *= measure.c[idx[2 * j], idx[2 * j + 1]]
        if n % 2:
            w *= measure.h[idx[-1]]
        if w == 0.0:
            continue
        z = atoms[list(idx)]
        r = 1.0 + 0j
        for x in z:
            for k in params.kappa2:
                r *= x - k
            for k in params.kappa1:
                r /= k - x
        total += w * r * vandermonde(z)
    return total

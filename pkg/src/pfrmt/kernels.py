"""Pfaffian evaluation of characteristic-polynomial ratio averages.

The basic object is the ``n``-fold integral

    Z^{(n)}_{(k1/k2)} = int h(z_n) prod_j g(z_{2j-1}, z_{2j})
                        prod_a [prod_b (z_a - kappa2_b) / prod_b (kappa1_b - z_a)]
                        Delta_n(z) d[z]

with a single weight ``h`` present only for odd ``n``.  Every route here
reduces it to Pfaffians built from the ensemble's pair reductions:

``z_assembled``
    one Pfaffian of the full antisymmetric matrix (moments, Cauchy pairs,
    fixed shift columns and the single-weight border).
``z_kernel_form``
    the moment block is eliminated by the Schur-complement identity,
    leaving a ``(k1+k2)``-dimensional Pfaffian of kernels K11/K12/K22.
``z_pfaffian``
    dispatch on ``d = k2 - k1 + n``: two-point functions only when ``d > 0``
    and ``k1 + k2`` is even, a one-point border when ``k1 + k2`` is odd,
    and the sparse layout when ``d <= 0``.

Sign bookkeeping for all routes comes from one derivation: the
Cauchy-Vandermonde determinant sign (:func:`berezinian_sign`), the sign of
the generalized de Bruijn integration and the permutation into each
layout.
"""

from contextlib import contextmanager
from dataclasses import dataclass, field
from functools import lru_cache
import math
import time

import numpy as np
from scipy import special

from .errors import DimensionError, RegimeError
from .precision import as_array, check_precision, working_precision
from .skew_linalg import SpectralParams, berezinian_sign, pfaffian, skew_inverse, sqrt_berezinian_kk

REGIMES = ("even-sum", "odd-sum", "sparse")

_FAULTS = set()


@contextmanager
def inject_fault(name):
    """Test hook: deliberately corrupt one route.

    ``"even-sum-sign"`` flips the even-sum prefactor whenever shifts are present.
    """
    _FAULTS.add(name)
    try:
        yield
    finally:
        _FAULTS.discard(name)


def eigen_count(N, parity):
    if parity not in ("odd", "even"):
        raise ValueError("parity must be 'odd' or 'even'")
    return 2 * N + 1 if parity == "odd" else 2 * N


def select_regime(k1, k2, n):
    d = k2 - k1 + n
    if d <= 0:
        return "sparse"
    return "even-sum" if (k1 + k2) % 2 == 0 else "odd-sum"


# ---------------------------------------------------------------------------
# signs
# ---------------------------------------------------------------------------


def debruijn_sign(k1, k2, n):
    """``Z = debruijn_sign * (n//2)! * Pf(W) / sqrtBer`` for the assembled matrix ``W``."""
    m = k2 + n
    d = m - k1
    q = k2 + n % 2 + max(0, -d)
    return (-1) ** ((n * k2) % 2) * berezinian_sign(k1, m) * (-1) ** ((q * (q - 1) // 2) % 2)


def kernel_sign(k1, k2, n):
    """``Z = kernel_sign * (n//2)! * Pf(M) * Pf(kernels) / sqrtBer`` (``k1 + k2`` even, ``d >= 0``)."""
    d = k2 - k1 + n
    chi = n % 2
    return debruijn_sign(k1, k2, n) * (-1) ** ((k2 * (k1 + d) + k2 + chi) % 2)


def sparse_sign(k1, k2, n):
    """Sign for the sparse layout ``[kappa2 | h | monomials | kappa1]`` (``d <= 0``)."""
    d = k2 - k1 + n
    q = k2 + n % 2 + max(0, -d)
    return debruijn_sign(k1, k2, n) * (-1) ** ((q * (1 + k1)) % 2)


# ---------------------------------------------------------------------------
# building blocks
# ---------------------------------------------------------------------------


@lru_cache(maxsize=256)
def _moment_matrix_cached(ens, d, bordered, precision):
    mm = ens.build_moment_matrix(d, precision=precision, bordered=bordered)
    mm.matrix.setflags(write=False)
    return mm


def moment_matrix(ens, d, bordered, precision="double"):
    return _moment_matrix_cached(ens, int(d), bool(bordered), precision)


def clear_caches():
    """Drop cached moment matrices (used before timing runs)."""
    _moment_matrix_cached.cache_clear()


def build_K_row(d, kappa, bordered=None):
    """Monomial row ``(1, kappa, ..., kappa^(d-1))``, plus a trailing zero when bordered."""
    if d < 0:
        raise DimensionError("d must be nonnegative")
    if bordered is None:
        bordered = d % 2 == 1
    row = complex(kappa) ** np.arange(d)
    if d == 0:
        row = np.zeros(0, dtype=complex)
    if bordered:
        row = np.append(row, 0j)
    return row.astype(complex)


def build_G(ens, d, kappa, bordered=None):
    """Cauchy-pair row ``G_b(kappa)``, ``b = 1..d``; bordered rows end with ``-int P/(kappa-E)``."""
    if bordered is None:
        bordered = ens.beta == 1 and d % 2 == 1
    row = ens.cauchy_pair_row(kappa, d)
    if bordered:
        row = np.append(row, -ens.cauchy_single(kappa))
    return np.asarray(row, dtype=complex)


def _bilinear(u, minv, v, precision):
    if precision == "double":
        return complex(u @ minv @ v)
    with working_precision(precision):
        return complex(as_array(u, precision) @ minv @ as_array(v, precision))


class KernelSet:
    """Moment matrix of order ``d``, its inverse and the three kernels.

    Built once and shared read-only; kernel evaluations are pure.
    """

    def __init__(self, ens, d, bordered=None, precision="double"):
        check_precision(precision)
        if bordered is None:
            bordered = ens.beta == 1 and d % 2 == 1
        self.ensemble = ens
        self.d = int(d)
        self.bordered = bool(bordered)
        self.precision = precision
        self.moment = moment_matrix(ens, d, bordered, precision)
        if self.moment.dim % 2:
            raise RegimeError(f"moment matrix of dimension {self.moment.dim} is odd and cannot be inverted")
        self.minv, info = skew_inverse(self.moment.matrix, full_output=True)
        self.rcond = info["rcond"]
        self.residual = info["residual"]
        with working_precision(precision):
            self.pf_moment = complex(pfaffian(self.moment.matrix))

    def k_row(self, kappa):
        return build_K_row(self.d, kappa, self.bordered)

    def g_row(self, kappa):
        return build_G(self.ensemble, self.d, kappa, self.bordered)

    def K11(self, ka, kb):
        if complex(ka) == complex(kb):
            return 0j
        return _bilinear(self.k_row(ka), self.minv, self.k_row(kb), self.precision)

    def K12(self, kb1, ka2):
        kb1, ka2 = complex(kb1), complex(ka2)
        if kb1 == ka2:
            from .errors import DegenerateShiftError

            raise DegenerateShiftError("K12 has a pole at coincident arguments")
        return 1.0 / (kb1 - ka2) + _bilinear(self.k_row(ka2), self.minv, self.g_row(kb1), self.precision)

    def K22(self, ka1, kb1):
        if complex(ka1) == complex(kb1):
            self.ensemble.check_off_support(ka1, "ka1")
            return 0j
        return self.ensemble.f_kernel(ka1, kb1) + _bilinear(self.g_row(ka1), self.minv, self.g_row(kb1), self.precision)

    def kernel_block(self, kappa1, kappa2):
        """``[[K11(k2a, k2b), K12(k1b, k2a)], [-K12(k1a, k2b), K22(k1a, k1b)]]``."""
        k1, k2 = len(kappa1), len(kappa2)
        size = k1 + k2
        out = np.zeros((size, size), dtype=complex)
        for a in range(k2):
            for b in range(a + 1, k2):
                out[a, b] = self.K11(kappa2[a], kappa2[b])
        for a in range(k2):
            for b in range(k1):
                out[a, k2 + b] = self.K12(kappa1[b], kappa2[a])
        for a in range(k1):
            for b in range(a + 1, k1):
                out[k2 + a, k2 + b] = self.K22(kappa1[a], kappa1[b])
        return out - out.T


# ---------------------------------------------------------------------------
# assembled Pfaffian
# ---------------------------------------------------------------------------


def _pairing_block(ens, kappa1, d, precision):
    """Antisymmetric pairings of the rows ``[cauchy(kappa1) | monomials 1..d]``."""
    k1 = len(kappa1)
    size = k1 + d
    a = np.zeros((size, size), dtype=complex)
    for i in range(k1):
        for j in range(i + 1, k1):
            a[i, j] = ens.f_kernel(kappa1[i], kappa1[j])
        a[i, k1:] = ens.cauchy_pair_row(kappa1[i], d)
    a[:k1, :k1] -= a[:k1, :k1].T
    a[k1:, :k1] = -a[:k1, k1:].T
    if precision == "extended":
        with working_precision(precision):
            big = as_array(a, precision)
            if d:
                big[k1:, k1:] = moment_matrix(ens, d, False, precision).matrix
        return big
    if d:
        a[k1:, k1:] = moment_matrix(ens, d, False, precision).matrix
    return a


def assembled_matrix(ens, n, params, precision="double"):
    """Full antisymmetric matrix ``W`` of the generalized de Bruijn integration.

    Index order: Cauchy rows (``kappa1``), monomial rows (``d`` of them when
    ``d >= 0``), then the fixed columns: ``kappa2`` evaluations, the single
    weight integral (odd ``n``) and, when ``d < 0``, monomials in ``kappa1``.
    """
    kappa1, kappa2 = list(params.kappa1), list(params.kappa2)
    k1, k2 = len(kappa1), len(kappa2)
    chi = n % 2
    d = k2 - k1 + n
    nrows = k1 + max(d, 0)
    a = _pairing_block(ens, kappa1, max(d, 0), precision)
    cols = []
    for c in kappa2:
        col = np.concatenate([1.0 / (np.asarray(kappa1) - c), c ** np.arange(max(d, 0))]) if nrows else np.zeros(0)
        cols.append(col)
    if chi:
        col = np.concatenate([[ens.cauchy_single(x) for x in kappa1],
                              [ens.moment_single(j) for j in range(1, max(d, 0) + 1)]])
        cols.append(col)
    for c in range(max(0, -d)):
        cols.append(np.asarray(kappa1, dtype=complex) ** c)
    u = np.array(cols, dtype=complex).T.reshape(nrows, len(cols))
    q = u.shape[1]
    if precision == "extended":
        with working_precision(precision):
            u = as_array(u, precision)
            w = np.empty((nrows + q, nrows + q), dtype=object)
            w[:nrows, :nrows] = a
            w[:nrows, nrows:] = u
            w[nrows:, :nrows] = -u.T
            w[nrows:, nrows:] = as_array(np.zeros((q, q)), precision)
        return w
    w = np.zeros((nrows + q, nrows + q), dtype=complex)
    w[:nrows, :nrows] = a
    w[:nrows, nrows:] = u
    w[nrows:, :nrows] = -u.T
    return w


def _check_shape(ens, n, params):
    if n < 0:
        raise DimensionError("number of eigenvalues must be nonnegative")
    if n % 2 and ens.beta == 4:
        raise RegimeError("beta=4 integrals have an even number of variables (no single weight)")
    for i, k in enumerate(params.kappa1):
        ens.check_off_support(k, f"kappa1[{i}]")


def z_assembled(ens, n, params, precision="double"):
    """Raw integral from one Pfaffian of the assembled matrix."""
    _check_shape(ens, n, params)
    w = assembled_matrix(ens, n, params, precision)
    with working_precision(precision):
        pf = complex(pfaffian(w))
    sign = debruijn_sign(params.k1, params.k2, n)
    return sign * math.factorial(n // 2) * pf / sqrt_berezinian_kk(params)


def z_kernel_form(ens, n, params, precision="double", kernels=None):
    """Raw integral via the Schur complement: ``Pf(M) Pf(kernel block)``."""
    _check_shape(ens, n, params)
    k1, k2 = params.k1, params.k2
    d = k2 - k1 + n
    if (k1 + k2) % 2 or d < 0:
        raise RegimeError("kernel form needs k1 + k2 even and d >= 0")
    ks = kernels or KernelSet(ens, d, bordered=n % 2 == 1, precision=precision)
    block = ks.kernel_block(params.kappa1, params.kappa2)
    sign = kernel_sign(k1, k2, n)
    return sign * math.factorial(n // 2) * ks.pf_moment * complex(pfaffian(block)) / sqrt_berezinian_kk(params)


# ---------------------------------------------------------------------------
# low-order functions
# ---------------------------------------------------------------------------


def two_point(ens, n, kind, ka, kb, precision="double"):
    """``Z^{(n)}`` with two shifts: ``kind`` is ``"0/2"``, ``"1/1"`` (``ka`` in the
    denominator) or ``"2/0"``."""
    if kind == "0/2":
        p = SpectralParams((), (ka, kb), validated=False)
    elif kind == "1/1":
        p = SpectralParams((ka,), (kb,), validated=False)
    elif kind == "2/0":
        p = SpectralParams((ka, kb), (), validated=False)
    else:
        raise ValueError(kind)
    return z_assembled(ens, n, p, precision)


def one_point(ens, n, kind, kappa, precision="double"):
    """``Z^{(n)}_{(0/1)}`` or ``Z^{(n)}_{(1/0)}``."""
    if kind == "0/1":
        p = SpectralParams((), (kappa,), validated=False)
    elif kind == "1/0":
        p = SpectralParams((kappa,), (), validated=False)
    else:
        raise ValueError(kind)
    return z_assembled(ens, n, p, precision)


def scaled_kernel_from_two_point(ens, which, d, ka, kb, chi, precision="double"):
    """``Pf(M_d)`` times a kernel of order ``d``, computed from one two-point integral.

    ``which`` is ``"K11"``, ``"K12"`` (``ka`` = denominator shift) or ``"K22"``.
    """
    if which == "K11":
        n1 = d - 2
        if n1 < 0:
            return 0j
        z = two_point(ens, n1, "0/2", ka, kb, precision)
        return (ka - kb) * z / (kernel_sign(0, 2, n1) * math.factorial(n1 // 2))
    if which == "K12":
        z = two_point(ens, d, "1/1", ka, kb, precision)
        return z / ((ka - kb) * kernel_sign(1, 1, d) * math.factorial(d // 2))
    if which == "K22":
        n3 = d + 2
        z = two_point(ens, n3, "2/0", ka, kb, precision)
        return (ka - kb) * z / (kernel_sign(2, 0, n3) * math.factorial(n3 // 2))
    raise ValueError(which)


# ---------------------------------------------------------------------------
# regime formulas
# ---------------------------------------------------------------------------


@dataclass
class ZResult:
    """Outcome of one Pfaffian evaluation.

    ``value`` is the headline number: the raw integral for
    :func:`z_pfaffian`, the ensemble average normalized by the ``k1 = k2 = 0``
    case for :func:`z_goe` / :func:`z_gse`.
    """

    value: complex
    regime: str
    d: int
    n: int
    raw: complex = None
    normalized: complex = None
    scaled: complex = None
    diagnostics: dict = field(default_factory=dict)


def _even_sum(ens, n, params, precision, diag):
    """All entries from two-point functions; ``Pf(M_d)`` carries the normalization."""
    k1, k2 = params.k1, params.k2
    kappa1, kappa2 = params.kappa1, params.kappa2
    d = k2 - k1 + n
    chi = n % 2
    mm = moment_matrix(ens, d, chi == 1, precision)
    with working_precision(precision):
        pf_m = complex(pfaffian(mm.matrix))
    size = k1 + k2
    e = np.zeros((size, size), dtype=complex)
    for a in range(k2):
        for b in range(a + 1, k2):
            e[a, b] = scaled_kernel_from_two_point(ens, "K11", d, kappa2[a], kappa2[b], chi, precision)
    for a in range(k2):
        for b in range(k1):
            e[a, k2 + b] = scaled_kernel_from_two_point(ens, "K12", d, kappa1[b], kappa2[a], chi, precision)
    for a in range(k1):
        for b in range(a + 1, k1):
            e[k2 + a, k2 + b] = scaled_kernel_from_two_point(ens, "K22", d, kappa1[a], kappa1[b], chi, precision)
    e = e - e.T
    sign = kernel_sign(k1, k2, n)
    if "even-sum-sign" in _FAULTS and size:
        # leave k1 = k2 = 0 intact so the flip survives normalization
        sign = -sign
    diag["pfaffian_dim"] = size
    diag["moment_dim"] = mm.dim
    diag["pf_moment"] = pf_m
    value = sign * math.factorial(n // 2) * pf_m ** (1 - size // 2) * complex(pfaffian(e))
    return value / sqrt_berezinian_kk(params)


def odd_sum_matrix(ens, n, params, precision="double", kernels=None):
    """Bordered kernel matrix of the odd ``k1 + k2`` case and its kernel set.

    Row/column 0 carries ``Pf(M)`` times the leading coefficient of the
    removed numerator shift, expressed through one-point functions.
    """
    k1, k2 = params.k1, params.k2
    kappa1, kappa2 = params.kappa1, params.kappa2
    chi = n % 2
    dt = k2 - k1 + n + 1
    ks = kernels or KernelSet(ens, dt, bordered=chi == 1, precision=precision)
    inner = ks.kernel_block(kappa1, kappa2)
    size = k1 + k2 + 1
    b = np.zeros((size, size), dtype=complex)
    b[1:, 1:] = inner
    sgn_n = (-1) ** (n % 2)
    n1 = dt - 2
    for j, c in enumerate(kappa2):
        if n1 >= 0:
            z = one_point(ens, n1, "0/1", c, precision)
            b[0, 1 + j] = sgn_n * z / (kernel_sign(0, 2, n1) * math.factorial(n1 // 2))
    for j, c in enumerate(kappa1):
        z = one_point(ens, dt, "1/0", c, precision)
        b[0, 1 + k2 + j] = -sgn_n * z / (kernel_sign(1, 1, dt) * math.factorial(dt // 2))
    b[1:, 0] = -b[0, 1:]
    return b, ks


def _odd_sum(ens, n, params, precision, diag):
    b, ks = odd_sum_matrix(ens, n, params, precision)
    k1, k2 = params.k1, params.k2
    sign = (-1) ** ((n + k1) % 2) * kernel_sign(k1, k2 + 1, n)
    diag["pfaffian_dim"] = b.shape[0]
    diag["moment_dim"] = ks.moment.dim
    diag["rcond"] = ks.rcond
    diag["inverse_residual"] = ks.residual
    return sign * math.factorial(n // 2) * complex(pfaffian(b)) / sqrt_berezinian_kk(params)


def sparse_matrix(ens, n, params):
    """Sparse layout ``[kappa2 | h | monomials in kappa1 | kappa1]`` for ``d <= 0``.

    Only the last block row/column and the ``F`` block are occupied.
    """
    kappa1, kappa2 = list(params.kappa1), list(params.kappa2)
    k1, k2 = len(kappa1), len(kappa2)
    chi = n % 2
    d = k2 - k1 + n
    if d > 0:
        raise RegimeError("sparse layout needs d <= 0")
    q = k2 + chi + (-d)
    size = q + k1
    p = np.zeros((size, size), dtype=complex)
    x = np.asarray(kappa1, dtype=complex)
    for a, c in enumerate(kappa2):
        p[a, q:] = 1.0 / (x - c)
    if chi:
        p[k2, q:] = [ens.cauchy_single(c) for c in kappa1]
    for a in range(-d):
        p[k2 + chi + a, q:] = x ** a
    for a in range(k1):
        for b in range(a + 1, k1):
            p[q + a, q + b] = ens.f_kernel(kappa1[a], kappa1[b])
    p = p - p.T
    if np.any(p[:q, :q] != 0):
        raise RegimeError("sparse layout lost its zero block")
    return p, q


def _sparse(ens, n, params, precision, diag):
    p, q = sparse_matrix(ens, n, params)
    diag["pfaffian_dim"] = p.shape[0]
    diag["zero_block_dim"] = q
    sign = sparse_sign(params.k1, params.k2, n)
    return sign * math.factorial(n // 2) * complex(pfaffian(p)) / sqrt_berezinian_kk(params)


_ROUTES = {"even-sum": _even_sum, "odd-sum": _odd_sum, "sparse": _sparse}


def z_pfaffian(ens, N, params, parity="odd", precision="double"):
    """Raw integral with ``N`` variable pairs (plus the single weight when ``parity='odd'``)."""
    check_precision(precision)
    n = eigen_count(N, parity)
    _check_shape(ens, n, params)
    regime = select_regime(params.k1, params.k2, n)
    diag = {}
    t0 = time.perf_counter()
    value = _ROUTES[regime](ens, n, params, precision, diag)
    diag["time_ms"] = 1e3 * (time.perf_counter() - t0)
    d = params.k2 - params.k1 + n
    return ZResult(value=value, regime=regime, d=d, n=n, raw=value, diagnostics=diag)


# ---------------------------------------------------------------------------
# matrix ensembles
# ---------------------------------------------------------------------------


def goe_constant(ndim, k1):
    """``(-1)^(chi k1) prod_j pi^((j-1)/2) / Gamma(j/2)``, ``chi = ndim mod 2``."""
    chi = ndim % 2
    logc = sum(0.5 * (j - 1) * math.log(math.pi) - special.gammaln(j / 2) for j in range(1, ndim + 1))
    return (-1) ** (chi * k1) * math.exp(logc)


def gse_constant(N):
    """``(-1)^(N(N-1)/2) prod_j pi^(2(j-1)) / Gamma(2j)``."""
    logc = sum(2 * (j - 1) * math.log(math.pi) - special.gammaln(2 * j) for j in range(1, N + 1))
    return (-1) ** (N * (N - 1) // 2) * math.exp(logc)


def z_goe(ens, ndim, params, precision="double"):
    """Average of ``prod det(H - kappa2) / prod det(H - kappa1)`` over real symmetric ``H``.

    ``value`` is normalized so that ``k1 = k2 = 0`` gives 1.  ``scaled``
    applies the matrix-measure constants ``C / L!`` to the raw integral.
    """
    if ens.beta != 1:
        raise RegimeError(f"{ens.id} is not a beta=1 ensemble")
    if ndim < 1:
        raise DimensionError("matrix dimension must be positive")
    half, chi = divmod(ndim, 2)
    parity = "odd" if chi else "even"
    res = z_pfaffian(ens, half, params, parity, precision)
    base = z_pfaffian(ens, half, SpectralParams(), parity, precision)
    sign = (-1) ** ((chi * params.k1) % 2)
    res.normalized = sign * res.raw / base.raw
    res.scaled = goe_constant(ndim, params.k1) * res.raw / math.factorial(half)
    res.value = res.normalized
    res.diagnostics["normalization_raw"] = base.raw
    res.diagnostics["constant_sign_chi_k1"] = sign
    return res


def z_gse(ens, N, params, precision="double"):
    """Average over ``N x N`` quaternion self-dual matrices (``2N``-dimensional determinants)."""
    if ens.beta != 4:
        raise RegimeError(f"{ens.id} is not a beta=4 ensemble")
    if N < 1:
        raise DimensionError("matrix dimension must be positive")
    res = z_pfaffian(ens, N, params, "even", precision)
    base = z_pfaffian(ens, N, SpectralParams(), "even", precision)
    res.normalized = res.raw / base.raw
    res.scaled = gse_constant(N) * res.raw / math.factorial(N)
    res.value = res.normalized
    res.diagnostics["normalization_raw"] = base.raw
    return res


# ---------------------------------------------------------------------------
# consistency reports
# ---------------------------------------------------------------------------

DEFAULT_KAPPA_GRID = (1j, 1 + 1j, -0.5 + 2j)


@dataclass
class ConsistencyReport:
    """Worst relative deviation per relation, every evaluated pair, and for
    odd variable counts the derived prefactor sign next to ``(-1)^(N+1)``."""

    max_rel_dev: dict
    checks: list
    derived_vs_printed_sign: dict

    @property
    def worst(self):
        return max(self.max_rel_dev.values(), default=0.0)


def _rel(a, b):
    scale = max(abs(a), abs(b), 1e-300)
    return abs(a - b) / scale


def kernel_consistency(ens, N, parity=None, kappas=DEFAULT_KAPPA_GRID, precision="double"):
    """Kernels of order ``d`` versus two-point integrals, on all ordered pairs from ``kappas``.

    For ``n = 2N + chi`` variables the three relations use ``d = n + 2``
    (K11), ``d = n`` (K12) and ``d = n - 2`` (K22).
    """
    if parity is None:
        parity = "odd" if ens.beta == 1 else "even"
    n = eigen_count(N, parity)
    chi = n % 2
    checks = []
    devs = {}
    printed = (-1) ** ((N + 1) % 2)
    signs = {}
    for label, which, d, kind in (("K11", "K11", n + 2, "0/2"), ("K12", "K12", n, "1/1"), ("K22", "K22", n - 2, "2/0")):
        if d < 0 or (d + chi) % 2:
            continue
        ks = KernelSet(ens, d, bordered=chi == 1, precision=precision)
        worst = 0.0
        for ka in kappas:
            for kb in kappas:
                if ka == kb:
                    continue
                if which == "K11":
                    lhs = ks.K11(ka, kb)
                elif which == "K12":
                    lhs = ks.K12(ka, kb)
                else:
                    lhs = ks.K22(ka, kb)
                rhs = scaled_kernel_from_two_point(ens, which, d, ka, kb, chi, precision) / ks.pf_moment
                dev = _rel(lhs, rhs)
                worst = max(worst, dev)
                checks.append((label, ka, kb, lhs, rhs, dev))
        devs[label] = worst
        if chi:
            # the printed relations cover 2N+1 variables only
            k1, k2 = {"0/2": (0, 2), "1/1": (1, 1), "2/0": (2, 0)}[kind]
            signs[label] = {"derived": 1 / kernel_sign(k1, k2, n), "printed": printed}
    return ConsistencyReport(devs, checks, signs)


@dataclass
class LimitReport:
    target: complex
    kappa02: tuple
    values: tuple
    deviations: tuple
    ratios: tuple


def limit_trick_check(ens, N, params, kappa02=(1e2, 1e3, 1e4), parity=None, precision="double"):
    """Finite-``kappa02`` approximants ``(-1)^n Z_{(k1/k2+1)} / kappa02^n`` versus the bordered formula."""
    if parity is None:
        parity = "odd" if ens.beta == 1 else "even"
    n = eigen_count(N, parity)
    if (params.k1 + params.k2) % 2 == 0:
        raise RegimeError("the limit construction applies to odd k1 + k2")
    target = z_pfaffian(ens, N, params, parity, precision).value
    values, devs = [], []
    for big in kappa02:
        ext = SpectralParams(params.kappa1, (complex(big),) + params.kappa2, validated=False)
        z = z_assembled(ens, n, ext, precision)
        v = (-1) ** (n % 2) * z / complex(big) ** n
        values.append(v)
        devs.append(abs(v - target) / abs(target))
    ratios = tuple(devs[i] / devs[i + 1] for i in range(len(devs) - 1))
    return LimitReport(target, tuple(kappa02), tuple(values), tuple(devs), ratios)

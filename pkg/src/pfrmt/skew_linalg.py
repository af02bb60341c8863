"""Skew-symmetric linear algebra and the Vandermonde/Cauchy determinant identities.

All functions are pure.  Inputs may be plain ``complex128`` arrays or
extended-precision object arrays (see :mod:`pfrmt.precision`); the result
carries the precision of the input.
"""

from dataclasses import dataclass, field
from itertools import permutations
import math

import mpmath
import numpy as np

from .errors import DegenerateShiftError, DimensionError, NumericError, SingularMatrixError
from .precision import RCOND_THRESHOLD, as_array, is_extended, precision_of, working_precision

__all__ = [
    "SkewMatrix",
    "SpectralParams",
    "pfaffian",
    "pfaffian_bruteforce",
    "skew_inverse",
    "pfaffian_schur",
    "vandermonde",
    "vandermonde_det",
    "sqrt_berezinian_kk",
    "cauchy_det_form",
    "berezinian_sign",
    "sqrt_berezinian_mixed",
    "berezinian_block_matrix",
    "sqrt_berezinian_mixed_det",
]

ANTISYMMETRY_RTOL = 1e-12


@dataclass(frozen=True)
class SkewMatrix:
    """Antisymmetric square matrix.

    Construction checks ``A = -A^T`` up to a relative ``1e-12`` and then
    projects onto the exactly antisymmetric part, so the diagonal is
    exactly zero afterwards.
    """

    entries: np.ndarray

    def __post_init__(self):
        a = self.entries
        if isinstance(a, SkewMatrix):
            a = a.entries
        if not is_extended(a):
            a = np.asarray(a, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DimensionError(f"expected a square matrix, got shape {a.shape}")
        if not is_extended(a) and not np.all(np.isfinite(a)):
            raise NumericError("matrix contains NaN or Inf")
        with working_precision(precision_of(a)):
            sym = a + a.T
            scale = max((abs(x) for x in a.flat), default=0)
            worst = max((abs(x) for x in sym.flat), default=0)
            if worst > ANTISYMMETRY_RTOL * max(scale, 1e-300) * 2:
                raise NumericError(f"matrix is not antisymmetric (|A + A^T| = {float(worst):.3g})")
            a = (a - a.T) / 2
        object.__setattr__(self, "entries", a)

    @property
    def dim(self):
        return self.entries.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)


def _entries(a):
    if isinstance(a, SkewMatrix):
        return a.entries
    return SkewMatrix(a).entries


@dataclass(frozen=True)
class SpectralParams:
    """Shift parameters: ``kappa1`` sit in denominators, ``kappa2`` in numerators.

    Denominator shifts must have a nonzero imaginary part, and each group
    must consist of pairwise distinct values.
    """

    kappa1: tuple = ()
    kappa2: tuple = ()
    validated: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        k1 = tuple(complex(k) for k in self.kappa1)
        k2 = tuple(complex(k) for k in self.kappa2)
        object.__setattr__(self, "kappa1", k1)
        object.__setattr__(self, "kappa2", k2)
        if not self.validated:
            return
        from .errors import OnSupportError

        for i, k in enumerate(k1):
            if not np.isfinite(k):
                raise NumericError(f"kappa1[{i}] is not finite")
            if k.imag == 0:
                raise OnSupportError(f"kappa1[{i}] = {k} lies on the real axis", field=f"kappa1[{i}]")
        for i, k in enumerate(k2):
            if not np.isfinite(k):
                raise NumericError(f"kappa2[{i}] is not finite")
        for name, group in (("kappa1", k1), ("kappa2", k2)):
            for i in range(len(group)):
                for j in range(i):
                    if group[i] == group[j]:
                        raise DegenerateShiftError(f"{name}[{j}] and {name}[{i}] coincide")

    @property
    def k1(self):
        return len(self.kappa1)

    @property
    def k2(self):
        return len(self.kappa2)

    def conjugate(self):
        return SpectralParams(tuple(k.conjugate() for k in self.kappa1),
                              tuple(k.conjugate() for k in self.kappa2))


# ---------------------------------------------------------------------------
# Pfaffians
# ---------------------------------------------------------------------------


def pfaffian(a):
    """Pfaffian of an even-dimensional antisymmetric matrix.

    Parlett-Reid reduction to tridiagonal form with partial pivoting,
    O(n^3).  Sign convention: ``Pf [[0, x], [-x, 0]] = x``; the 0x0 matrix
    has Pfaffian 1.
    """
    a = _entries(a)
    n = a.shape[0]
    if n % 2:
        raise DimensionError(f"Pfaffian needs an even dimension, got {n}")
    if n == 0:
        return _one_like(a)
    with working_precision(precision_of(a)):
        a = a.copy()
        result = _one_like(a)
        for k in range(0, n - 1, 2):
            col = np.array([abs(x) for x in a[k + 1:, k]], dtype=float)
            kp = k + 1 + int(np.argmax(col))
            if kp != k + 1:
                a[[k + 1, kp], :] = a[[kp, k + 1], :]
                a[:, [k + 1, kp]] = a[:, [kp, k + 1]]
                result = -result
            if a[k + 1, k] == 0:
                return 0 * result
            result = result * a[k, k + 1]
            if k + 2 < n:
                tau = a[k, k + 2:] / a[k, k + 1]
                piv = a[k + 2:, k + 1].copy()
                a[k + 2:, k + 2:] = a[k + 2:, k + 2:] + np.outer(tau, piv) - np.outer(piv, tau)
        return result


def _one_like(a):
    return mpmath.mpc(1) if is_extended(a) else complex(1.0)


def pfaffian_bruteforce(a):
    """Pfaffian by summing over all perfect matchings (test oracle, dim <= 12)."""
    a = _entries(a)
    n = a.shape[0]
    if n % 2:
        raise DimensionError(f"Pfaffian needs an even dimension, got {n}")
    if n > 12:
        raise DimensionError("brute-force Pfaffian is limited to dim <= 12")

    def rec(idx):
        if not idx:
            return 1
        first, rest = idx[0], idx[1:]
        total = 0
        for j, other in enumerate(rest):
            sign = -1 if j % 2 else 1
            total = total + sign * a[first, other] * rec(rest[:j] + rest[j + 1:])
        return total

    with working_precision(precision_of(a)):
        return rec(tuple(range(n)))


def pfaffian_permutation_sum(a):
    """Pfaffian straight from the permutation-sum definition (dim <= 8).

    ``Pf = 1/(2^N N!) sum_w sign(w) prod_j A[w(2j-1), w(2j)]``.
    """
    a = np.asarray(_entries(a))
    n = a.shape[0]
    if n % 2 or n > 8:
        raise DimensionError("permutation-sum Pfaffian needs even dim <= 8")
    half = n // 2
    total = 0
    for perm in permutations(range(n)):
        term = _perm_sign(perm)
        for j in range(half):
            term = term * a[perm[2 * j], perm[2 * j + 1]]
        total = total + term
    return total / (2 ** half * math.factorial(half))


def _perm_sign(perm):
    perm = list(perm)
    sign = 1
    for i in range(len(perm)):
        while perm[i] != i:
            j = perm[i]
            perm[i], perm[j] = perm[j], perm[i]
            sign = -sign
    return sign


def permutation_sign(perm):
    return _perm_sign(perm)


def skew_inverse(d, full_output=False):
    """Inverse of a nonsingular antisymmetric matrix, re-antisymmetrized.

    Raises :class:`SingularMatrixError` when the reciprocal 1-norm
    condition number falls below 1e-13 (double) or 1e-28 (extended).
    In double precision rows and columns are first equilibrated by powers
    of two, so ``rcond`` and ``residual`` = max|D D^-1 - I| refer to the
    equilibrated matrix.  With ``full_output`` returns ``(inverse, info)``.
    """
    d = _entries(d)
    n = d.shape[0]
    if n % 2:
        raise DimensionError(f"antisymmetric inverse needs an even dimension, got {n}")
    precision = precision_of(d)
    if n == 0:
        inv = d.copy()
        info = {"rcond": 1.0, "residual": 0.0}
        return (inv, info) if full_output else inv
    with working_precision(precision):
        if precision == "double":
            # symmetric power-of-two scaling keeps antisymmetry and is exact
            rowmax = np.max(np.abs(d), axis=1)
            scale = np.where(rowmax > 0, 2.0 ** -np.round(0.5 * np.log2(np.where(rowmax > 0, rowmax, 1.0))), 1.0)
            ds = scale[:, None] * d * scale[None, :]
            norm = np.linalg.norm(ds, 1)
            try:
                xs = np.linalg.inv(ds)
            except np.linalg.LinAlgError:
                raise SingularMatrixError("matrix is exactly singular", rcond=0.0) from None
            rcond = 1.0 / (norm * np.linalg.norm(xs, 1)) if norm > 0 else 0.0
            if not np.isfinite(rcond) or rcond < RCOND_THRESHOLD["double"]:
                raise SingularMatrixError(f"matrix is numerically singular (rcond={rcond:.3g})", rcond=rcond)
            xs = (xs - xs.T) / 2
            residual = float(np.max(np.abs(ds @ xs - np.eye(n))))
            x = scale[:, None] * xs * scale[None, :]
        else:
            m = mpmath.matrix(d.tolist())
            norm = mpmath.mnorm(m, 1)
            try:
                xm = mpmath.inverse(m)
            except ZeroDivisionError:
                raise SingularMatrixError("matrix is exactly singular", rcond=0.0) from None
            rcond = float(1 / (norm * mpmath.mnorm(xm, 1))) if norm else 0.0
            if rcond < RCOND_THRESHOLD["extended"]:
                raise SingularMatrixError(f"matrix is numerically singular (rcond={rcond:.3g})", rcond=rcond)
            x = np.array(xm.tolist(), dtype=object)
            x = (x - x.T) / 2
            resid = d @ x
            residual = max(float(abs(resid[i, j] - (1 if i == j else 0))) for i in range(n) for j in range(n))
    info = {"rcond": float(rcond), "residual": residual}
    return (x, info) if full_output else x


def pfaffian_schur(a, b, d):
    """``Pf [[A, B], [-B^T, D]] = Pf(D) Pf(A + B D^-1 B^T)`` for invertible ``D``."""
    a = _entries(a)
    d = _entries(d)
    precision = precision_of(d)
    b = as_array(b, precision) if precision == "extended" or is_extended(b) else np.asarray(b, dtype=complex)
    if b.shape != (a.shape[0], d.shape[0]):
        raise DimensionError(f"B has shape {b.shape}, expected {(a.shape[0], d.shape[0])}")
    if a.shape[0] % 2 or d.shape[0] % 2:
        raise DimensionError("A and D must both be even dimensional")
    dinv = skew_inverse(d)
    with working_precision(precision):
        inner = a + b @ dinv @ b.T
        inner = (inner - inner.T) / 2
        return pfaffian(d) * pfaffian(inner)


# ---------------------------------------------------------------------------
# Vandermonde and Cauchy determinants
# ---------------------------------------------------------------------------


def vandermonde(e):
    """``prod_{a<b} (E_a - E_b)``; 1 for fewer than two points."""
    e = [complex(x) for x in e]
    out = complex(1.0)
    for a in range(len(e)):
        for b in range(a + 1, len(e)):
            out *= e[a] - e[b]
    return out


def vandermonde_det(e):
    """Determinant form ``(-1)^{N(N-1)/2} det[E_a^{b-1}]`` of :func:`vandermonde`."""
    e = np.asarray(e, dtype=complex)
    n = e.size
    if n < 2:
        return complex(1.0)
    v = e[:, None] ** np.arange(n)[None, :]
    return (-1) ** (n * (n - 1) // 2) * complex(np.linalg.det(v))


def _check_distinct_across(kappa1, other, what="kappa2"):
    for a, x in enumerate(kappa1):
        for b, y in enumerate(other):
            if x == y:
                raise DegenerateShiftError(f"kappa1[{a}] coincides with {what}[{b}]")


def _kappas(p):
    return [complex(x) for x in p.kappa1], [complex(x) for x in p.kappa2]


def sqrt_berezinian_kk(p):
    """``Delta(kappa1) Delta(kappa2) / prod_{a,b} (kappa1_a - kappa2_b)``.

    Defined for any ``k1``, ``k2``; the Cauchy-determinant form
    (:func:`cauchy_det_form`) exists when ``k1 == k2``.
    """
    k1, k2 = _kappas(p)
    _check_distinct_across(k1, k2)
    denom = complex(1.0)
    for x in k1:
        for y in k2:
            denom *= x - y
    return vandermonde(k1) * vandermonde(k2) / denom


def cauchy_det_form(p):
    """``(-1)^{k(k-1)/2} det[1/(kappa1_a - kappa2_b)]`` (requires ``k1 == k2``)."""
    k1, k2 = _kappas(p)
    if len(k1) != len(k2):
        raise DimensionError("Cauchy determinant needs k1 == k2")
    _check_distinct_across(k1, k2)
    k = len(k1)
    if k == 0:
        return complex(1.0)
    c = 1.0 / (np.asarray(k1)[:, None] - np.asarray(k2)[None, :])
    return (-1) ** (k * (k - 1) // 2) * complex(np.linalg.det(c))


def berezinian_sign(k1, m):
    """Sign relating the ratio form to the block determinant.

    ``ratio = berezinian_sign(k1, m) * det(block)`` where ``m`` counts the
    numerator-side variables.  For ``m >= k1`` the block has ``k1`` Cauchy
    rows over ``m - k1`` monomial rows; for ``m < k1`` it has ``m`` Cauchy
    columns followed by ``k1 - m`` monomial columns in the denominator
    variables.
    """
    if m >= k1:
        return (-1) ** ((k1 * (m - 1) + m * (m - 1) // 2) % 2)
    return (-1) ** ((k1 * (k1 - 1) // 2) % 2)


def sqrt_berezinian_mixed(p, e=()):
    """Ratio form ``Delta(kappa1) Delta(kappa2, E) / [prod(kappa1 - kappa2) prod(kappa1 - E)]``."""
    k1, k2 = _kappas(p)
    y = k2 + [complex(x) for x in e]
    _check_distinct_across(k1, y, "numerator variable")
    denom = complex(1.0)
    for x in k1:
        for v in y:
            denom *= x - v
    return vandermonde(k1) * vandermonde(y) / denom


def berezinian_block_matrix(kappa1, y):
    """Square Cauchy-Vandermonde block matrix for denominator variables ``kappa1``
    and numerator variables ``y`` (see :func:`berezinian_sign` for the layout)."""
    x = np.asarray(kappa1, dtype=complex)
    y = np.asarray(y, dtype=complex)
    k1, m = x.size, y.size
    cauchy = 1.0 / (x[:, None] - y[None, :])
    if m >= k1:
        mono = y[None, :] ** np.arange(m - k1)[:, None]
        return np.vstack([cauchy, mono])
    mono = x[:, None] ** np.arange(k1 - m)[None, :]
    return np.hstack([cauchy, mono])


def sqrt_berezinian_mixed_det(p, e=()):
    """Block-determinant form of :func:`sqrt_berezinian_mixed`, sign included."""
    k1, k2 = _kappas(p)
    y = k2 + [complex(x) for x in e]
    _check_distinct_across(k1, y, "numerator variable")
    if not k1 and not y:
        return complex(1.0)
    block = berezinian_block_matrix(k1, y)
    return berezinian_sign(len(k1), len(y)) * complex(np.linalg.det(block))

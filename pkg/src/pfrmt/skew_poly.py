"""Skew-orthogonal polynomials from a moment matrix.

Pairs ``(q_{2i}, q_{2i+1})`` of monic polynomials are built by a skew
Gram-Schmidt sweep so that the pairing ``<p, q> = p M q^T`` becomes
block diagonal with blocks ``[[0, r_i], [-r_i, 0]]``.  Because the
transformation is unit lower triangular, ``Pf(M) = prod r_i``.
"""

from dataclasses import dataclass
import math

import numpy as np

from .errors import BreakdownError, DimensionError
from .kernels import assembled_matrix, debruijn_sign
from .skew_linalg import pfaffian, sqrt_berezinian_kk

BREAKDOWN_TOL = 1e-13


@dataclass(frozen=True)
class SkewPolynomialBasis:
    """``coeffs[j, b]`` is the coefficient of ``E^b`` in polynomial ``j`` (monic, degree ``j``)."""

    d: int
    coeffs: np.ndarray
    pairing_norms: tuple

    def evaluate(self, x):
        """Values of all ``d`` polynomials at ``x``; the polynomial index runs last."""
        return (np.asarray(x)[..., None] ** np.arange(self.d)) @ self.coeffs.T

    def block_form(self):
        """The block-diagonal target ``diag([[0, r_i], [-r_i, 0]])``."""
        out = np.zeros((self.d, self.d), dtype=complex)
        for i, r in enumerate(self.pairing_norms):
            out[2 * i, 2 * i + 1] = r
            out[2 * i + 1, 2 * i] = -r
        return out


def _pair_block(m):
    if hasattr(m, "matrix"):
        a = m.matrix[: m.d, : m.d]
    else:
        a = m
    return np.asarray(a, dtype=complex)


def skew_orthogonalize(m, tol=BREAKDOWN_TOL):
    """Monic skew-orthogonal basis for the pair block of ``m``.

    For odd order the last polynomial has no partner; it is made
    orthogonal to every pair.  Raises :class:`BreakdownError` (carrying
    the pair index) when a pairing norm vanishes relative to the size of
    the summands it is built from.
    """
    a = _pair_block(m)
    d = a.shape[0]
    if a.shape != (d, d):
        raise DimensionError("moment matrix must be square")
    tiny = 1e-300 * (np.max(np.abs(a)) if d else 1.0)
    t = np.eye(d, dtype=complex)
    norms = []

    def project(v):
        for j, r in enumerate(norms):
            qe, qo = t[2 * j], t[2 * j + 1]
            v = v - (v @ a @ qo) / r * qe + (v @ a @ qe) / r * qo
        return v

    for i in range(d // 2):
        t[2 * i] = project(t[2 * i])
        t[2 * i + 1] = project(t[2 * i + 1])
        r = t[2 * i] @ a @ t[2 * i + 1]
        # compare with the magnitude of the summands to detect cancellation to roundoff
        size = np.abs(t[2 * i]) @ np.abs(a) @ np.abs(t[2 * i + 1])
        if abs(r) <= tol * max(size, tiny):
            raise BreakdownError(f"pairing norm vanishes at pair {i}", step=i)
        norms.append(r)
    if d % 2:
        t[d - 1] = project(t[d - 1])
    return SkewPolynomialBasis(d, t, tuple(complex(r) for r in norms))


def transformed(basis, m):
    a = _pair_block(m)
    return basis.coeffs @ a @ basis.coeffs.T


def verify_block_diagonal(basis, m):
    """Largest deviation of ``T M T^T`` from its block-diagonal target, relative to ``max|M|``."""
    a = _pair_block(m)
    scale = max(np.max(np.abs(a)), 1e-300) if a.size else 1.0
    dev = transformed(basis, a) - basis.block_form()
    return {"residual": float(np.max(np.abs(dev)) / scale) if dev.size else 0.0, "d": basis.d}


def pfaffian_from_norms(basis):
    """``Pf(M) = prod r_i`` (the transformation has unit determinant)."""
    if basis.d % 2:
        raise DimensionError("Pfaffian needs an even order")
    return complex(np.prod(basis.pairing_norms)) if basis.pairing_norms else 1.0 + 0j


def z_in_basis(ens, n, params, basis=None):
    """Raw integral with the monomial rows replaced by skew-orthogonal polynomials.

    The pair block is replaced by its ideal block-diagonal form, so the
    result equals the monomial-basis value only if ``basis`` really
    skew-orthogonalizes the moment matrix.
    """
    k1, k2 = params.k1, params.k2
    d = k2 - k1 + n
    if d <= 0:
        raise DimensionError("basis substitution needs monomial rows (d > 0)")
    w = assembled_matrix(ens, n, params)
    if basis is None:
        basis = skew_orthogonalize(ens.build_moment_matrix(d, bordered=False))
    if basis.d != d:
        raise DimensionError(f"basis of order {basis.d} does not match d = {d}")
    size = w.shape[0]
    full = np.eye(size, dtype=complex)
    full[k1 : k1 + d, k1 : k1 + d] = basis.coeffs
    w2 = full @ w @ full.T
    w2[k1 : k1 + d, k1 : k1 + d] = basis.block_form()
    w2 = (w2 - w2.T) / 2
    sign = debruijn_sign(k1, k2, n)
    return sign * math.factorial(n // 2) * complex(pfaffian(w2)) / sqrt_berezinian_kk(params)

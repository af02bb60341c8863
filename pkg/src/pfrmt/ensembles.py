"""Eigenvalue weights and their reductions to one- and two-dimensional integrals.

Four ensembles are provided, selected by id:

=================  ====  =============================  ==========
id                 beta  weight P                       support
=================  ====  =============================  ==========
``gauss-beta1``    1     ``exp(-E^2/2)``                real line
``gauss-beta4``    4     ``exp(-E^2/2)``                real line
``laguerre-beta1`` 1     ``x^((nu-1)/2) exp(-x)``       ``[0, inf)``
``laguerre-beta4`` 4     ``x^(nu+1) exp(-x)``           ``[0, inf)``
=================  ====  =============================  ==========

Every averaged quantity the kernels need is an antisymmetric pairing
``A[f, g]`` of two row functions (monomials ``x^(a-1)`` or Cauchy factors
``1/(kappa - x)``) plus, for beta=1, single integrals ``int P f``:

* beta=1: ``A[f, g] = int int_{x<y} P(x) P(y) (f(x) g(y) - g(x) f(y))``,
  evaluated as ``int P(y) g(y) S_f(y) dy`` with the signed running integral
  ``S_f(y) = int P(x) f(x) sgn(y - x) dx``.
* beta=4: the pair density collapses onto the diagonal and
  ``A[f, g] = int P (f' g - f g')``.
"""

from dataclasses import dataclass
from functools import lru_cache
import math

import mpmath
import numpy as np
from scipy import special

from .errors import DivergentMomentError, OnSupportError, UnsupportedReductionError
from .precision import check_precision, working_precision
from .quadrature import PanelGrid, refined_breakpoints
from .skew_linalg import SkewMatrix

ENSEMBLE_IDS = ("gauss-beta1", "gauss-beta4", "laguerre-beta1", "laguerre-beta4")

NODES_PER_PANEL = 20


# ---------------------------------------------------------------------------
# row functions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RowFn:
    """``kind='mono'``: ``x^(index-1)``; ``kind='cauchy'``: ``1/(kappa - x)``."""

    kind: str
    param: complex

    def __call__(self, x):
        if self.kind == "mono":
            return np.asarray(x, dtype=complex) ** (int(self.param) - 1)
        return 1.0 / (self.param - np.asarray(x, dtype=complex))

    def deriv(self, x):
        x = np.asarray(x, dtype=complex)
        if self.kind == "mono":
            a = int(self.param)
            return (a - 1) * x ** (a - 2) if a > 1 else np.zeros_like(x)
        return 1.0 / (self.param - x) ** 2

    @property
    def pole(self):
        return self.param if self.kind == "cauchy" else None


def mono(a):
    return RowFn("mono", int(a))


def cauchy(kappa):
    return RowFn("cauchy", complex(kappa))


# ---------------------------------------------------------------------------
# ensembles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MomentMatrix:
    """Antisymmetric moment matrix of order ``d``.

    ``bordered`` marks the odd-dimensional beta=1 layout: an extra last
    row/column holding single moments ``int P x^(a-1)`` (column entries
    negated) with a zero corner.
    """

    d: int
    matrix: np.ndarray
    bordered: bool
    precision: str = "double"

    @property
    def dim(self):
        return self.matrix.shape[0]

    def skew(self):
        return SkewMatrix(self.matrix)


class Ensemble:
    """Base class; concrete ensembles fix the weight and its variable map."""

    id = None
    beta = None
    panel_width = 0.5

    def __init__(self, nu=0, nodes_per_panel=NODES_PER_PANEL):
        self.nu = int(nu)
        if self.nu < 0:
            raise ValueError("nu must be a nonnegative integer")
        self.nodes_per_panel = nodes_per_panel
        self._default_grid = self._make_grid(())

    def __repr__(self):
        extra = f", nu={self.nu}" if self.id.startswith("laguerre") else ""
        return f"{type(self).__name__}(id={self.id!r}{extra})"

    def __eq__(self, other):
        return type(self) is type(other) and self.nu == other.nu and self.nodes_per_panel == other.nodes_per_panel

    def __hash__(self):
        return hash((type(self).__name__, self.nu, self.nodes_per_panel))

    # --- weight -------------------------------------------------------
    support = (-np.inf, np.inf)

    def weight(self, x):
        raise NotImplementedError

    def moment(self, s):
        """``int P(x) x^s dx`` for integer ``s >= 0`` in closed form."""
        raise NotImplementedError

    def moment_mp(self, s):
        raise NotImplementedError

    def check_off_support(self, kappa, field="kappa"):
        kappa = complex(kappa)
        lo, hi = self.support
        if kappa.imag == 0 and lo <= kappa.real <= hi:
            raise OnSupportError(f"{field} = {kappa} lies on the support {self.support}", field=field)
        return kappa

    # --- quadrature ---------------------------------------------------
    def _y_range(self):
        raise NotImplementedError

    def _x_of_y(self, y):
        raise NotImplementedError

    def _density_y(self, y):
        """``P(x(y)) dx/dy``."""
        raise NotImplementedError

    def _pole_in_y(self, kappa):
        raise NotImplementedError

    def grid(self, poles=()):
        """Quadrature grid in the smooth variable, refined near the given poles."""
        poles = [complex(p) for p in poles if p is not None]
        if not poles:
            return self._default_grid
        return self._make_grid(tuple(poles))

    def _make_grid(self, poles):
        lo, hi = self._y_range()
        centers, scales = [], []
        for p in poles:
            for yp in self._pole_in_y(p):
                centers.append(yp.real)
                scales.append(abs(yp.imag))
        g = PanelGrid(refined_breakpoints(lo, hi, self.panel_width, centers, scales), n=self.nodes_per_panel)
        g.x = self._x_of_y(g.nodes)
        g.rho = self._density_y(g.nodes)
        return g

    # --- generic reductions ------------------------------------------
    def single(self, f):
        """``int P f``."""
        g = self.grid((f.pole,))
        return complex(np.sum(g.weights * g.rho * f(g.x)))

    def pair(self, f, g):
        """Antisymmetric pairing ``A[f, g]`` of two row functions."""
        if f == g:
            return 0j
        grid = self.grid((f.pole, g.pole))
        if self.beta == 4:
            integrand = grid.rho * (f.deriv(grid.x) * g(grid.x) - f(grid.x) * g.deriv(grid.x))
            return complex(np.sum(grid.weights * integrand))
        pf = grid.rho * f(grid.x)
        running = grid.running_integral(pf)
        total = np.sum(grid.weights * pf)
        return complex(np.sum(grid.weights * grid.rho * g(grid.x) * (2 * running - total)))

    # --- named operations --------------------------------------------
    def moment_single(self, a):
        """``int P(E) E^(a-1) dE`` (beta=1 border entries)."""
        if self.beta == 4:
            raise UnsupportedReductionError("single moments only enter odd-dimensional beta=1 ensembles")
        return float(self.moment(a - 1))

    def moment_pair(self, a, b):
        """Pair moment ``M_ab``; antisymmetric in ``(a, b)``."""
        a, b = int(a), int(b)
        if a == b:
            return 0.0
        if a > b:
            # one evaluation order keeps the antisymmetry exact
            return -self.moment_pair(b, a)
        if self.beta == 4:
            return float((a - b) * self.moment(a + b - 3))
        return self.pair(mono(a), mono(b)).real

    def cauchy_single(self, kappa):
        """``int P(E) / (kappa - E) dE``."""
        kappa = self.check_off_support(kappa)
        return self.single(cauchy(kappa))

    def cauchy_pair(self, kappa, b):
        """Pairing of the Cauchy factor at ``kappa`` with ``E^(b-1)``."""
        kappa = self.check_off_support(kappa)
        return self.pair(cauchy(kappa), mono(b))

    def cauchy_pair_row(self, kappa, d):
        """``[cauchy_pair(kappa, b) for b in 1..d]`` on a single grid."""
        kappa = self.check_off_support(kappa)
        if d == 0:
            return np.zeros(0, dtype=complex)
        grid = self.grid((kappa,))
        x = grid.x
        powers = x[None, :] ** np.arange(d)[:, None]
        if self.beta == 4:
            dpow = np.zeros_like(powers)
            dpow[1:] = np.arange(1, d)[:, None] * x[None, :] ** np.arange(d - 1)[:, None]
            f, df = 1.0 / (kappa - x), 1.0 / (kappa - x) ** 2
            return (powers * df - dpow * f) @ (grid.weights * grid.rho)
        pf = grid.rho / (kappa - x)
        signed = 2 * grid.running_integral(pf) - np.sum(grid.weights * pf)
        return powers @ (grid.weights * grid.rho * signed)

    def f_kernel(self, ka, kb):
        """Pairing of two Cauchy factors; antisymmetric, zero on the diagonal."""
        ka = self.check_off_support(ka, "ka")
        kb = self.check_off_support(kb, "kb")
        if ka == kb:
            return 0j
        if (ka.real, ka.imag) > (kb.real, kb.imag):
            return -self.f_kernel(kb, ka)
        if self.beta == 4:
            grid = self.grid((ka, kb))
            x = grid.x
            val = np.sum(grid.weights * grid.rho / ((ka - x) ** 2 * (kb - x) ** 2))
            return complex(-(ka - kb) * val)
        return self.pair(cauchy(ka), cauchy(kb))

    def build_moment_matrix(self, d, precision="double", bordered=None):
        """Moment matrix of order ``d``; bordered for odd ``d`` when beta=1."""
        check_precision(precision)
        d = int(d)
        if d < 0:
            raise ValueError("d must be nonnegative")
        if bordered is None:
            bordered = self.beta == 1 and d % 2 == 1
        if bordered and self.beta == 4:
            raise UnsupportedReductionError("beta=4 moment matrices carry no border")
        size = d + (1 if bordered else 0)
        if precision == "extended":
            return MomentMatrix(d, self._moment_matrix_mp(d, bordered), bordered, precision)
        m = np.zeros((size, size), dtype=complex)
        for a in range(1, d + 1):
            for b in range(a + 1, d + 1):
                m[a - 1, b - 1] = self.moment_pair(a, b)
                m[b - 1, a - 1] = -m[a - 1, b - 1]
        if bordered:
            for a in range(1, d + 1):
                s = self.moment_single(a)
                m[a - 1, d] = -s
                m[d, a - 1] = s
        return MomentMatrix(d, m, bordered, precision)

    # --- extended precision -------------------------------------------
    def _moment_matrix_mp(self, d, bordered):
        size = d + (1 if bordered else 0)
        with working_precision("extended"):
            m = np.empty((size, size), dtype=object)
            for idx in np.ndindex(size, size):
                m[idx] = mpmath.mpc(0)
            for a in range(1, d + 1):
                for b in range(a + 1, d + 1):
                    if self.beta == 4:
                        v = (a - b) * self.moment_mp(a + b - 3)
                    else:
                        v = self._pair_moment_mp(a, b)
                    m[a - 1, b - 1] = mpmath.mpc(v)
                    m[b - 1, a - 1] = -m[a - 1, b - 1]
            if bordered:
                for a in range(1, d + 1):
                    s = mpmath.mpc(self.moment_mp(a - 1))
                    m[a - 1, d] = -s
                    m[d, a - 1] = s
        return m

    def _pair_moment_mp(self, a, b):
        """beta=1 pair moment in extended precision via closed-form running moments."""
        total = self.moment_mp(a - 1)

        def integrand(y):
            return self._weight_mp(y) * y ** (b - 1) * (2 * self._running_moment_mp(a, y) - total)

        lo, hi = self.support
        pts = [lo, 0, hi] if lo < 0 else [lo, 2, 8, 30, hi]
        return mpmath.quad(integrand, pts)


class _GaussianWeight(Ensemble):
    support = (-np.inf, np.inf)
    half_width = 14.0

    def weight(self, x):
        return np.exp(-np.asarray(x) ** 2 / 2)

    def moment(self, s):
        s = int(s)
        if s < 0:
            raise DivergentMomentError(f"moment of order {s} diverges")
        if s % 2:
            return 0.0
        return math.sqrt(2 * math.pi) * float(special.factorial2(s - 1)) if s > 0 else math.sqrt(2 * math.pi)

    def moment_mp(self, s):
        s = int(s)
        if s < 0:
            raise DivergentMomentError(f"moment of order {s} diverges")
        if s % 2:
            return mpmath.mpf(0)
        return mpmath.sqrt(2 * mpmath.pi) * mpmath.fac2(s - 1)

    def _weight_mp(self, y):
        return mpmath.exp(-y * y / 2)

    def _running_moment_mp(self, a, y):
        # int_{-inf}^y x^(a-1) e^{-x^2/2} dx by the integration-by-parts recursion
        if a == 1:
            return mpmath.sqrt(2 * mpmath.pi) * mpmath.ncdf(y)
        if a == 2:
            return -mpmath.exp(-y * y / 2)
        return -y ** (a - 2) * mpmath.exp(-y * y / 2) + (a - 2) * self._running_moment_mp(a - 2, y)

    def _y_range(self):
        return -self.half_width, self.half_width

    def _x_of_y(self, y):
        return y

    def _density_y(self, y):
        return np.exp(-y ** 2 / 2)

    def _pole_in_y(self, kappa):
        return [complex(kappa)]

    def cauchy_single_closed(self, kappa):
        """Closed form ``int e^{-E^2/2}/(kappa - E) dE`` through the Faddeeva function."""
        kappa = self.check_off_support(kappa)
        z = kappa / math.sqrt(2)
        if kappa.imag > 0:
            return complex(-1j * math.pi * special.wofz(z))
        return complex(np.conj(-1j * math.pi * special.wofz(np.conj(z))))


class _LaguerreWeight(Ensemble):
    support = (0.0, np.inf)
    panel_width = 0.25
    y_max = 8.0

    def _exponent(self):
        raise NotImplementedError

    def weight(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x > 0, np.abs(x) ** self._exponent() * np.exp(-x), 0.0)

    def moment(self, s):
        e = self._exponent() + int(s)
        if e <= -1:
            raise DivergentMomentError(f"moment of order {s} diverges")
        return float(special.gamma(e + 1))

    def moment_mp(self, s):
        e = mpmath.mpf(self._exponent()) + int(s)
        if e <= -1:
            raise DivergentMomentError(f"moment of order {s} diverges")
        return mpmath.gamma(e + 1)

    def _weight_mp(self, y):
        return y ** mpmath.mpf(self._exponent()) * mpmath.exp(-y)

    def _running_moment_mp(self, a, y):
        return mpmath.gammainc(mpmath.mpf(self._exponent()) + a, 0, y)

    # x = y^2 makes the half-integer powers of x smooth polynomials in y
    def _y_range(self):
        return 0.0, self.y_max

    def _x_of_y(self, y):
        return y ** 2

    def _density_y(self, y):
        return 2 * y ** (2 * self._exponent() + 1) * np.exp(-y ** 2)

    def _pole_in_y(self, kappa):
        r = np.sqrt(complex(kappa))
        return [r, -r]


class GaussBeta1(_GaussianWeight):
    id = "gauss-beta1"
    beta = 1


class GaussBeta4(_GaussianWeight):
    id = "gauss-beta4"
    beta = 4


class LaguerreBeta1(_LaguerreWeight):
    id = "laguerre-beta1"
    beta = 1

    def _exponent(self):
        return (self.nu - 1) / 2


class LaguerreBeta4(_LaguerreWeight):
    id = "laguerre-beta4"
    beta = 4

    def _exponent(self):
        return self.nu + 1


_REGISTRY = {cls.id: cls for cls in (GaussBeta1, GaussBeta4, LaguerreBeta1, LaguerreBeta4)}


@lru_cache(maxsize=None)
def get_ensemble(ensemble_id, nu=0):
    """Shared, read-only ensemble instance for ``ensemble_id``."""
    try:
        cls = _REGISTRY[ensemble_id]
    except KeyError:
        raise ValueError(f"unknown ensemble {ensemble_id!r}; expected one of {ENSEMBLE_IDS}") from None
    return cls(nu=nu) if ensemble_id.startswith("laguerre") else cls()

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

SQRT2PI = float(np.sqrt(2 * np.pi))


def rel(a, b):
    a, b = complex(a), complex(b)
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_skew(rng, n, complex_=True):
    a = rng.standard_normal((n, n))
    if complex_:
        a = a + 1j * rng.standard_normal((n, n))
    return a - a.T


def ordered_pair_quad(weight, f, g, lo=-12.0, hi=12.0):
    """``int int_{x<y} P(x) P(y) (f(x) g(y) - g(x) f(y))`` by nested adaptive quadrature."""
    from scipy import integrate

    opts = dict(epsabs=1e-14, epsrel=1e-12, limit=200, complex_func=True)

    def inner(fn, y):
        return integrate.quad(lambda x: weight(x) * fn(x), lo, y, **opts)[0]

    def outer(y):
        return weight(y) * (g(y) * inner(f, y) - f(y) * inner(g, y))

    return integrate.quad(outer, lo, hi, **opts)[0]

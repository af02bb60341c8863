"""Release checks shared by ``pfrmt verify`` and the acceptance tests.

Each check returns a :class:`CheckResult` carrying its worst deviation,
tolerance and wall time.  ``quick`` checks exercise exact identities only;
``full`` adds every oracle comparison.
"""

from contextlib import nullcontext
from dataclasses import dataclass, field
from functools import lru_cache
import math
import time

import mpmath
import numpy as np

from . import kernels
from .ensembles import get_ensemble, mono
from .kernels import limit_trick_check, sparse_matrix, z_gse, z_goe, z_pfaffian
from .oracle import (
    MCSpec,
    QuadratureSpec,
    confluent_extrapolated,
    z_eigenvalue_quadrature,
    z_matrix_montecarlo,
)
from .skew_linalg import (
    SpectralParams,
    pfaffian,
    pfaffian_schur,
    sqrt_berezinian_mixed,
    sqrt_berezinian_mixed_det,
)
from .skew_poly import pfaffian_from_norms, skew_orthogonalize, verify_block_diagonal, z_in_basis

# off-axis shifts; |Im| >= 1.5 keeps the quadrature oracle well resolved
KAPPA1 = (0.5 + 1.5j, -0.3 + 2.0j, 0.2 - 1.8j, 1.1 + 1.6j)
KAPPA2 = (0.2 + 0.5j, -1.0 + 0.3j, 0.7 + 0.0j)


@dataclass
class CheckResult:
    name: str
    passed: bool
    max_dev: float
    tolerance: float
    elapsed: float
    budget: float
    detail: dict = field(default_factory=dict)

    @property
    def status(self):
        return "PASS" if self.passed else "FAIL"

    def line(self):
        return (
            f"{self.status}  {self.name:<34s} max_dev={self.max_dev:.3e} tol={self.tolerance:.0e}"
            f" time={self.elapsed:.2f}s/{self.budget:.0f}s"
        )


def _rel(a, b):
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


def _params(k1, k2):
    return SpectralParams(KAPPA1[:k1], KAPPA2[:k2])


def _finish(name, devs, tol, t0, budget, detail=None, extra_ok=True):
    worst = max(devs, default=0.0)
    elapsed = time.perf_counter() - t0
    passed = bool(extra_ok and worst <= tol and elapsed < budget and np.isfinite(worst))
    return CheckResult(name, passed, float(worst), tol, elapsed, budget, detail or {})


def _random_skew(rng, n):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return a - a.T


# ---------------------------------------------------------------------------
# exact identities
# ---------------------------------------------------------------------------


def check_pfaffian_squared(seed=0, instances=100):
    """``Pf(A)^2 = det(A)`` on random complex skew matrices of even order 2..20."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    devs = []
    for i in range(instances):
        n = 2 * (1 + i % 10)
        a = _random_skew(rng, n)
        devs.append(_rel(complex(pfaffian(a)) ** 2, complex(np.linalg.det(a))))
    return _finish("pfaffian-squared", devs, 1e-10, t0, 5.0)


def check_schur_pfaffian(seed=1, instances=100):
    """Assembled block Pfaffian versus ``Pf(D) Pf(A + B D^-1 B^T)``."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    devs = []
    for i in range(instances):
        na = 2 * (1 + i % 2)
        nd = 2 * (1 + (i // 2) % 3)
        a = _random_skew(rng, na)
        d = _random_skew(rng, nd)
        b = rng.standard_normal((na, nd)) + 1j * rng.standard_normal((na, nd))
        full = np.block([[a, b], [-b.T, d]])
        devs.append(_rel(complex(pfaffian(full)), complex(pfaffian_schur(a, b, d))))
    return _finish("schur-pfaffian", devs, 1e-9, t0, 5.0)


def check_berezinian_identity(seed=2, draws=50):
    """Ratio form versus signed Cauchy-Vandermonde block determinant."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    devs = []
    for _ in range(draws):
        k1 = int(rng.integers(0, 4))
        k2 = int(rng.integers(0, 4))
        ne = int(rng.integers(0, 5))
        kap1 = tuple(rng.standard_normal(k1) + 1j * (1 + rng.random(k1)))
        kap2 = tuple(rng.standard_normal(k2) + 1j * rng.standard_normal(k2))
        e = rng.standard_normal(ne)
        p = SpectralParams(kap1, kap2)
        devs.append(_rel(sqrt_berezinian_mixed(p, e), sqrt_berezinian_mixed_det(p, e)))
    return _finish("berezinian-determinant", devs, 1e-10, t0, 5.0)


def check_kernel_relations(N_max=3):
    """Kernels against two-point integrals for both Gaussian ensembles."""
    t0 = time.perf_counter()
    devs, detail = [], {}
    for eid, parities in (("gauss-beta1", ("odd", "even")), ("gauss-beta4", ("even",))):
        ens = get_ensemble(eid)
        for parity in parities:
            for N in range(1, N_max + 1):
                rep = kernels.kernel_consistency(ens, N, parity)
                detail[f"{eid}/{parity}/N={N}"] = rep.worst
                devs.append(rep.worst)
    return _finish("kernel-relations", devs, 1e-8, t0, 60.0, detail)


def _skew_poly_targets():
    return (
        get_ensemble("gauss-beta1"),
        get_ensemble("gauss-beta4"),
        get_ensemble("laguerre-beta1", 1),
        get_ensemble("laguerre-beta1", 2),
    )


def check_skew_polynomials(d_max=8):
    """Block residual, ``Pf(M) = prod r_i`` and basis invariance of the raw integral."""
    t0 = time.perf_counter()
    residuals, pf_devs, sub_devs = [], [], []
    for ens in _skew_poly_targets():
        for d in range(2, d_max + 1):
            m = ens.build_moment_matrix(d, bordered=False)
            basis = skew_orthogonalize(m)
            residuals.append(verify_block_diagonal(basis, m)["residual"])
            if d % 2 == 0:
                pf = complex(pfaffian(m.matrix))
                pf_devs.append(_rel(abs(pf), abs(pfaffian_from_norms(basis))))
        parity = "even" if ens.beta == 4 else "odd"
        for N in (1, 2):
            n = kernels.eigen_count(N, parity)
            for k1, k2 in ((0, 1), (1, 1), (1, 2), (2, 2)):
                p = _params(k1, k2)
                if k2 - k1 + n <= 0:
                    continue
                ref = z_pfaffian(ens, N, p, parity).raw
                sub_devs.append(_rel(z_in_basis(ens, n, p), ref))
    res = _finish("skew-polynomials", residuals, 1e-10, t0, 30.0)
    detail = {"block_residual": max(residuals), "pf_vs_norms": max(pf_devs), "basis_substitution": max(sub_devs)}
    ok = max(pf_devs) <= 1e-9 and max(sub_devs) <= 1e-9
    res.passed = res.passed and ok
    res.max_dev = max(residuals + pf_devs + sub_devs)
    res.detail = detail
    return res


# ---------------------------------------------------------------------------
# oracle comparisons
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _oracle_value(eid, nu, ndim, k1, k2, nodes):
    ens = get_ensemble(eid, nu)
    return z_eigenvalue_quadrature(ens, ndim, _params(k1, k2), QuadratureSpec(nodes_per_dim=nodes)).value


def oracle_normalized(eid, ndim, k1, k2, nodes, nu=0):
    """Quadrature-oracle average normalized by its own ``k1 = k2 = 0`` value."""
    return _oracle_value(eid, nu, ndim, k1, k2, nodes) / _oracle_value(eid, nu, ndim, 0, 0, nodes)


def _goe_nodes(ndim):
    return 60 if ndim >= 4 else 80


def _compare_goe(ens_id, ndim, shapes, nu=0):
    ens = get_ensemble(ens_id, nu)
    devs, detail = [], {}
    for k1, k2 in shapes:
        formula = z_goe(ens, ndim, _params(k1, k2)).value
        oracle = oracle_normalized(ens_id, ndim, k1, k2, _goe_nodes(ndim), nu)
        dev = _rel(formula, oracle)
        devs.append(dev)
        detail[f"Ndim={ndim} ({k1},{k2})"] = dev
    return devs, detail


def check_even_sum_oracle():
    """Even ``k1 + k2`` formula versus eigenvalue quadrature, Ndim 2 and 4."""
    t0 = time.perf_counter()
    devs, detail = [], {}
    for ndim in (2, 4):
        dv, dt = _compare_goe("gauss-beta1", ndim, ((0, 2), (1, 1), (2, 2)))
        devs += dv
        detail.update(dt)
    return _finish("even-sum-vs-oracle", devs, 1e-6, t0, 60.0, detail)


def check_odd_sum_oracle():
    """Odd ``k1 + k2`` formula versus quadrature, plus the large-shift limit."""
    t0 = time.perf_counter()
    devs, detail = _compare_goe("gauss-beta1", 3, ((0, 1), (1, 0), (1, 2)))
    lim = limit_trick_check(get_ensemble("gauss-beta1"), 1, _params(0, 1))
    orders = [math.log10(r) for r in lim.ratios]
    detail["limit_deviations"] = list(lim.deviations)
    detail["limit_orders"] = orders
    first_order = min(orders) >= 0.9
    return _finish("odd-sum-vs-oracle", devs, 1e-6, t0, 120.0, detail, extra_ok=first_order)


def check_sparse_oracle():
    """``d <= 0`` layout: structural zeros, trivial N=0 value and quadrature at N=1."""
    t0 = time.perf_counter()
    ens = get_ensemble("gauss-beta1")
    devs, detail = [], {}
    zero_blocks = True
    for k1 in (2, 3, 4):
        p = _params(k1, 0)
        for n in (0, 2):
            mat, q = sparse_matrix(ens, n, p)
            zero_blocks &= bool(np.all(mat[:q, :q] == 0))
        z0 = z_pfaffian(ens, 0, p, "even")
        devs.append(abs(z0.raw - 1.0))
        detail[f"N=0 k1={k1}"] = abs(z0.raw - 1.0)
    d2, dt = _compare_goe("gauss-beta1", 2, [(k1, 0) for k1 in (2, 3, 4)])
    devs += d2
    detail.update(dt)
    detail["zero_block"] = zero_blocks
    return _finish("sparse-vs-oracle", devs, 1e-6, t0, 30.0, detail, extra_ok=zero_blocks)


def _beta4_nodes(N):
    return 200 if N <= 2 else 120


def check_beta4_chain(mc_samples=1_000_000, seed=3):
    """Closed-form confluent moments, quadrature and matrix Monte Carlo for beta=4."""
    t0 = time.perf_counter()
    ens = get_ensemble("gauss-beta4")
    moment_devs = []
    m = ens.build_moment_matrix(6).matrix
    scale = np.max(np.abs(m))
    for a in range(1, 7):
        for b in range(a + 1, 7):
            ref = confluent_extrapolated(ens, "moment_pair", (a, b))
            closed = m[a - 1, b - 1]
            # vanishing entries are compared on the matrix scale
            denom = max(abs(closed), abs(ref)) if abs(closed) > 1e-12 * scale else scale
            moment_devs.append(abs(closed - ref) / denom)
    quad_devs, mc_sigmas, detail = [], [], {}
    for N in (1, 2):
        for k1, k2 in ((0, 2), (1, 1)):
            p = _params(k1, k2)
            formula = z_gse(ens, N, p).value
            oracle = oracle_normalized("gauss-beta4", N, k1, k2, _beta4_nodes(N))
            quad_devs.append(_rel(formula, oracle))
            mc = z_matrix_montecarlo(ens, N, p, MCSpec(samples=mc_samples, seed=seed))
            sigma = abs(mc.value - formula) / mc.error
            mc_sigmas.append(sigma)
            detail[f"N={N} ({k1},{k2})"] = {"quadrature": quad_devs[-1], "mc_sigma": sigma}
    detail["moment_matrix"] = max(moment_devs)
    ok = max(moment_devs) <= 1e-6 and max(mc_sigmas) <= 3.0
    res = _finish("beta4-chain", quad_devs, 1e-5, t0, 600.0, detail, extra_ok=ok)
    res.max_dev = max(quad_devs + moment_devs)
    return res


def _laguerre_pair_closed(ens, a, b):
    """beta=1 pair moment from incomplete-Gamma running moments."""
    with mpmath.workdps(30):
        return float(ens._pair_moment_mp(a, b))


def check_laguerre():
    """Laguerre beta=1 average versus quadrature and moments versus Gamma functions."""
    t0 = time.perf_counter()
    devs, detail = _compare_goe("laguerre-beta1", 2, ((0, 2),), nu=1)
    moment_devs = []
    for nu in (1, 2):
        ens = get_ensemble("laguerre-beta1", nu)
        for s in range(0, 7):
            numeric = ens.single(mono(s + 1)).real
            moment_devs.append(_rel(numeric, math.gamma(ens._exponent() + s + 1)))
        for a in range(1, 5):
            for b in range(a + 1, 6):
                moment_devs.append(_rel(ens.moment_pair(a, b), _laguerre_pair_closed(ens, a, b)))
    detail["moments"] = max(moment_devs)
    ok = max(moment_devs) <= 1e-12
    return _finish("laguerre-beta1", devs, 1e-6, t0, 30.0, detail, extra_ok=ok)


def average(ens, N, params, precision="double"):
    """Normalized Pfaffian-route average; ``N`` is the matrix (quaternion) dimension."""
    if ens.beta == 1:
        return z_goe(ens, N, params, precision)
    return z_gse(ens, N, params, precision)


def default_nodes(ens, N):
    return _goe_nodes(N) if ens.beta == 1 else _beta4_nodes(N)


def bench_point(ens, N, params, nodes=None, repeats=3):
    """Wall times (ms) of the Pfaffian route and the quadrature oracle at one size.

    The Pfaffian time is the best of ``repeats`` cold-cache runs.  Raises
    :class:`~pfrmt.errors.BudgetError` when the oracle is out of range.
    """
    nodes = nodes or default_nodes(ens, N)
    spec = QuadratureSpec(nodes_per_dim=nodes)
    t = time.perf_counter()
    num = z_eigenvalue_quadrature(ens, N, params, spec)
    den = z_eigenvalue_quadrature(ens, N, SpectralParams(), spec)
    oracle_ms = 1e3 * (time.perf_counter() - t)
    pf_times = []
    for _ in range(repeats):
        kernels.clear_caches()
        t = time.perf_counter()
        z = average(ens, N, params)
        pf_times.append(1e3 * (time.perf_counter() - t))
    oracle = num.value / den.value
    pf_ms = min(pf_times)
    return {
        "ensemble": ens.id,
        "N": N,
        "d": z.d,
        "k1": params.k1,
        "k2": params.k2,
        "nodes_per_dim": nodes,
        "pfaffian_ms": pf_ms,
        "oracle_ms": oracle_ms,
        "speedup": oracle_ms / pf_ms,
        "pfaffian_value": z.value,
        "oracle_value": oracle,
        "rel_dev": _rel(z.value, oracle),
    }


def check_speedup():
    """Pfaffian route at least ten times faster than quadrature at equal accuracy."""
    t0 = time.perf_counter()
    row = bench_point(get_ensemble("gauss-beta1"), 4, _params(1, 1))
    res = _finish("speedup", [row["rel_dev"]], 1e-6, t0, 120.0, row, extra_ok=row["speedup"] >= 10.0)
    return res


# ---------------------------------------------------------------------------

QUICK = (
    check_pfaffian_squared,
    check_schur_pfaffian,
    check_berezinian_identity,
    check_kernel_relations,
    check_skew_polynomials,
)

FULL = QUICK + (
    check_even_sum_oracle,
    check_odd_sum_oracle,
    check_sparse_oracle,
    check_beta4_chain,
    check_laguerre,
    check_speedup,
)

LEVELS = {"quick": QUICK, "full": FULL}


def run_checks(level="quick", fault=None, stream=None):
    """Run the checks of ``level``; with ``fault`` the named corruption is active throughout."""
    checks = LEVELS[level]
    results = []
    if fault:
        # the quick level has no route comparison that a prefactor flip could break
        if level == "quick":
            checks = checks + (check_even_sum_oracle,)
        ctx = kernels.inject_fault(fault)
    else:
        ctx = nullcontext()
    with ctx:
        for check in checks:
            r = check()
            results.append(r)
            if stream is not None:
                print(r.line(), file=stream, flush=True)
    return results


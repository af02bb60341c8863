import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import SQRT2PI, ordered_pair_quad, rel
from pfrmt import kernels
from pfrmt.ensembles import get_ensemble
from pfrmt.errors import DegenerateShiftError, OnSupportError, RegimeError
from pfrmt.kernels import (
    REGIMES,
    KernelSet,
    build_G,
    build_K_row,
    eigen_count,
    inject_fault,
    kernel_consistency,
    limit_trick_check,
    scaled_kernel_from_two_point,
    select_regime,
    sparse_matrix,
    z_assembled,
    z_gse,
    z_goe,
    z_kernel_form,
    z_pfaffian,
)
from pfrmt.oracle import DiscretePairMeasure, MCSpec, QuadratureSpec, z_discrete_bruteforce, z_eigenvalue_quadrature, z_matrix_montecarlo
from pfrmt.skew_linalg import SpectralParams

pytestmark = pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")

G1 = get_ensemble("gauss-beta1")
G4 = get_ensemble("gauss-beta4")
L1 = get_ensemble("laguerre-beta1", 1)
L4 = get_ensemble("laguerre-beta4", 1)

KAPPA1 = (0.5 + 1.5j, -0.3 + 2.0j, 0.2 - 1.8j)
KAPPA2 = (0.2 + 0.5j, -1.0 + 0.3j, 0.7 + 0.0j)


def params(k1, k2):
    return SpectralParams(KAPPA1[:k1], KAPPA2[:k2])


def oracle_avg(ens, ndim, p, nodes=80):
    spec = QuadratureSpec(nodes_per_dim=nodes)
    return z_eigenvalue_quadrature(ens, ndim, p, spec).value / z_eigenvalue_quadrature(ens, ndim, SpectralParams(), spec).value


class TestDispatch:
    def test_eigen_count(self):
        assert eigen_count(2, "odd") == 5 and eigen_count(2, "even") == 4
        with pytest.raises(ValueError):
            eigen_count(1, "both")

    @given(st.integers(0, 6), st.integers(0, 6), st.integers(0, 9))
    def test_partition(self, k1, k2, n):
        regime = select_regime(k1, k2, n)
        d = k2 - k1 + n
        hits = [d <= 0, d > 0 and (k1 + k2) % 2 == 0, d > 0 and (k1 + k2) % 2 == 1]
        assert sum(hits) == 1
        assert regime == ("sparse", "even-sum", "odd-sum")[hits.index(True)]
        assert regime in REGIMES


class TestRows:
    def test_k_row(self):
        assert np.array_equal(build_K_row(3, 0), [1, 0, 0, 0])
        assert np.array_equal(build_K_row(3, 1), [1, 1, 1, 0])
        assert np.array_equal(build_K_row(3, 2j), [1, 2j, -4, 0])
        assert np.array_equal(build_K_row(2, 1), [1, 1])

    def test_g_row_border(self):
        g = build_G(G1, 3, 1j)
        assert g.shape == (4,)
        assert g[-1] == -G1.cauchy_single(1j)

    @pytest.mark.parametrize("ens", [G1, G4])
    def test_g_row_conjugation(self, ens):
        d = 3 if ens.beta == 1 else 4
        assert np.allclose(build_G(ens, d, 1 - 2j), np.conj(build_G(ens, d, 1 + 2j)), rtol=1e-13, atol=0)

    def test_g_row_nested_quadrature(self):
        g = build_G(G1, 3, 1j)
        for b in range(1, 4):
            ref = ordered_pair_quad(lambda x: np.exp(-x * x / 2), lambda x: 1 / (1j - x), lambda x, b=b: x ** (b - 1) + 0j)
            assert rel(g[b - 1], ref) < 1e-8


class TestKernelSet:
    @pytest.mark.parametrize("ens,d", [(G1, 5), (G1, 6), (G4, 4), (L1, 5), (L4, 6)])
    def test_inverse_residual(self, ens, d):
        ks = KernelSet(ens, d)
        m = ks.moment.matrix
        resid = np.linalg.norm(m @ ks.minv - np.eye(m.shape[0]), 2)
        assert resid / (np.linalg.norm(m, 2) * np.linalg.norm(ks.minv, 2)) < 1e-14

    def test_odd_beta4_rejected(self):
        with pytest.raises(RegimeError):
            KernelSet(G4, 3)

    @pytest.mark.parametrize("ens,d", [(G1, 5), (G4, 4)])
    def test_antisymmetry(self, ens, d):
        ks = KernelSet(ens, d)
        grid = [1j, 1 + 1j, -0.5 + 2j, 0.3 - 1j]
        for x, y in itertools.product(grid, grid):
            assert ks.K11(x, y) == pytest.approx(-ks.K11(y, x), rel=1e-12, abs=1e-14)
            assert ks.K22(x, y) == pytest.approx(-ks.K22(y, x), rel=1e-12, abs=1e-14)
        assert ks.K11(1j, 1j) == 0 and ks.K22(1j, 1j) == 0

    def test_k11_explicit_sum(self):
        ks = KernelSet(G4, 4)
        minv = ks.minv
        total = sum(0 ** m * (1j) ** n * minv[m, n] for m in range(4) for n in range(4))
        assert rel(ks.K11(0, 1j), total) < 1e-14

    @pytest.mark.parametrize("ens,d,bordered", [(G1, 3, True), (G1, 4, False), (G4, 4, False)])
    def test_k12_decay(self, ens, d, bordered):
        # the bare 1/kb term is cancelled; the remainder falls off like kb**-(d+1)
        ks = KernelSet(ens, d, bordered=bordered)
        small, large = (abs(ks.K12(r * np.exp(0.7j), 0.3)) for r in (1e2, 1e3))
        assert np.log10(small / large) == pytest.approx(d + 1, abs=0.05)
        assert large * 1e3 < 1e-2

    def test_k12_pole(self):
        ks = KernelSet(G1, 3)
        x = 0.4 + 1j
        y = x + 1e-4
        assert (x - y) * ks.K12(x, y) == pytest.approx(1.0, rel=1e-3)

    def test_k12_coincident(self):
        with pytest.raises(DegenerateShiftError):
            KernelSet(G1, 3).K12(1j, 1j)

    @pytest.mark.parametrize("ens", [G1, get_ensemble("laguerre-beta1", 2)])
    def test_k12_correction_bound(self, ens):
        ks = KernelSet(ens, 1)
        for kb in (1j, 2 + 1j, -3 + 0.5j):
            corr = ks.K12(kb, 0.1) - 1 / (kb - 0.1)
            bound = np.linalg.norm(ks.k_row(0.1)) * np.linalg.norm(ks.minv, 2) * np.linalg.norm(ks.g_row(kb))
            assert abs(corr) <= bound * (1 + 1e-12)

    def test_on_support(self):
        ks = KernelSet(G1, 3)
        with pytest.raises(OnSupportError):
            ks.K22(0.5, 1j)
        with pytest.raises(OnSupportError):
            ks.K12(0.5, 1j)

    def test_k22_against_assembled(self):
        ks = KernelSet(G1, 3)
        rhs = scaled_kernel_from_two_point(G1, "K22", 3, 1j, 1 + 1j, 1) / ks.pf_moment
        assert rel(ks.K22(1j, 1 + 1j), rhs) < 1e-8


class TestConsistency:
    @pytest.mark.parametrize("ens,parity", [(G1, "odd"), (G1, "even"), (G4, "even")])
    @pytest.mark.parametrize("N", [1, 2, 3])
    def test_relations(self, ens, parity, N):
        rep = kernel_consistency(ens, N, parity)
        assert rep.worst < 1e-8

    def test_k12_beta4_at_real_numerator(self):
        ks = KernelSet(G4, 2)
        rhs = scaled_kernel_from_two_point(G4, "K12", 2, 1j, 0.0, 0) / ks.pf_moment
        assert rel(ks.K12(1j, 0.0), rhs) < 1e-10

    def test_k11_swap(self):
        a = scaled_kernel_from_two_point(G1, "K11", 5, 1j, 1 + 1j, 1)
        b = scaled_kernel_from_two_point(G1, "K11", 5, 1 + 1j, 1j, 1)
        assert rel(a, -b) < 1e-12

    def test_k22_beta1_two_pairs(self):
        rep = kernel_consistency(G1, 2, "odd", kappas=(1j, 1 + 1j))
        assert rep.max_rel_dev["K22"] < 1e-8

    def test_printed_signs_reported_for_odd_only(self):
        assert kernel_consistency(G4, 1).derived_vs_printed_sign == {}
        signs = kernel_consistency(G1, 1, "odd").derived_vs_printed_sign
        assert set(signs) == {"K11", "K12", "K22"}
        for label in ("K11", "K22"):
            assert signs[label]["derived"] == signs[label]["printed"]
        assert signs["K12"]["derived"] == -signs["K12"]["printed"]


class TestZPfaffian:
    def test_normalization_single_variable(self):
        z = z_pfaffian(G1, 0, SpectralParams(), "odd")
        assert z.regime == "even-sum" and z.d == 1
        assert z.value == pytest.approx(SQRT2PI, rel=1e-13)

    @pytest.mark.parametrize("kappa", [0.3, 1 + 2j, -0.7j])
    def test_one_variable_linear(self, kappa):
        z = z_pfaffian(G1, 0, SpectralParams((), (kappa,)), "odd")
        assert z.value == pytest.approx(-kappa * SQRT2PI, rel=1e-12)

    def test_smallest_sparse(self):
        z = z_pfaffian(G1, 0, params(2, 0), "even")
        assert z.regime == "sparse"
        assert z.value == pytest.approx(1.0, abs=1e-15)

    def test_sparse_zero_block(self):
        for k1 in (2, 3):
            for n in (0, 1, 2):
                if k1 > n:
                    mat, q = sparse_matrix(G1, n, params(k1, 0))
                    assert np.all(mat[:q, :q] == 0)

    def test_sparse_requires_nonpositive_d(self):
        with pytest.raises(RegimeError):
            sparse_matrix(G1, 3, params(1, 0))

    @pytest.mark.parametrize("ens", [G1, L1, G4, L4], ids=lambda e: e.id)
    @pytest.mark.slow
    def test_route_equivalence(self, ens):
        parities = ("even",) if ens.beta == 4 else ("odd", "even")
        for parity in parities:
            for N in range(6):
                n = eigen_count(N, parity)
                for k1, k2 in itertools.product(range(4), repeat=2):
                    d = k2 - k1 + n
                    if (k1 + k2) % 2 or not 0 <= d <= 9 or (ens.beta == 4 and d % 2):
                        continue
                    # poorly conditioned monomial moments need the extended scalar
                    rcond = KernelSet(ens, d, bordered=n % 2 == 1).rcond
                    prec = "extended" if rcond < 1e-3 else "double"
                    p = params(k1, k2)
                    ref = z_assembled(ens, n, p, prec)
                    assert rel(z_kernel_form(ens, n, p, prec), ref) < 1e-9, (parity, N, k1, k2)

    @pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
    @pytest.mark.parametrize("k1,k2", [(0, 0), (0, 1), (1, 0), (1, 1), (0, 2), (2, 0), (2, 1), (1, 2), (2, 2), (3, 1), (3, 0), (0, 3)])
    def test_discrete_bruteforce(self, n, k1, k2):
        meas = DiscretePairMeasure.random(10, seed=7)
        p = params(k1, k2)
        parity = "odd" if n % 2 else "even"
        z = z_pfaffian(meas, n // 2, p, parity)
        ref = z_discrete_bruteforce(meas, n, p)
        assert abs(z.value - ref) <= 1e-9 * max(abs(ref), 1e-3)

    @pytest.mark.parametrize("k1,k2", [(2, 2), (1, 2), (3, 1)])
    def test_permutation_symmetry(self, k1, k2):
        p = params(k1, k2)
        base = z_pfaffian(G1, 1, p).value
        for perm1 in itertools.permutations(range(k1)):
            for perm2 in itertools.permutations(range(k2)):
                q = SpectralParams([p.kappa1[i] for i in perm1], [p.kappa2[i] for i in perm2])
                assert rel(z_pfaffian(G1, 1, q).value, base) < 1e-10

    def test_extended_precision(self):
        p = params(1, 1)
        dbl = z_pfaffian(G1, 2, p).value
        ext = z_pfaffian(G1, 2, p, precision="extended").value
        assert rel(dbl, ext) < 1e-10

    def test_beta4_rejects_odd(self):
        with pytest.raises(RegimeError):
            z_pfaffian(G4, 1, params(0, 1), "odd")

    def test_fault_hook(self):
        p = params(1, 1)
        good = z_pfaffian(G1, 1, p).value
        with inject_fault("even-sum-sign"):
            bad = z_pfaffian(G1, 1, p).value
        assert bad == pytest.approx(-good)
        assert z_pfaffian(G1, 1, p).value == good


class TestMatrixAverages:
    def test_self_normalized(self):
        assert z_goe(G1, 3, SpectralParams()).value == pytest.approx(1.0)
        assert z_gse(G4, 2, SpectralParams()).value == pytest.approx(1.0)

    def test_goe_near_confluent_pair(self):
        p = SpectralParams((), (0.0, 1e-3))
        assert rel(z_goe(G1, 2, p).value, oracle_avg(G1, 2, p)) < 1e-6

    def test_goe_odd_mixed(self):
        p = SpectralParams((1j,), (0.0,))
        assert rel(z_goe(G1, 3, p).value, oracle_avg(G1, 3, p)) < 1e-6

    def test_goe_one_point(self):
        p = SpectralParams((0.5 + 1.5j,), ())
        assert rel(z_goe(G1, 3, p).value, oracle_avg(G1, 3, p)) < 1e-6

    def test_goe_scaled_is_diagnostic(self):
        z = z_goe(G1, 2, params(1, 1))
        assert np.isfinite(z.scaled) and z.diagnostics["constant_sign_chi_k1"] == 1

    def test_gse_second_moment(self):
        z = z_gse(G4, 1, SpectralParams((), (0.0,)))
        assert z.value == pytest.approx(1.0, rel=1e-13)

    def test_gse_montecarlo(self):
        p = SpectralParams((2j,), (0.0,))
        z = z_gse(G4, 2, p).value
        mc = z_matrix_montecarlo(G4, 2, p, MCSpec(samples=1_000_000, seed=11))
        assert abs(mc.value - z) < 3 * mc.error

    def test_wrong_beta(self):
        with pytest.raises(RegimeError):
            z_goe(G4, 2, SpectralParams())
        with pytest.raises(RegimeError):
            z_gse(G1, 2, SpectralParams())


class TestLimitTrick:
    def test_first_order(self):
        rep = limit_trick_check(G1, 1, params(1, 2))
        assert all(8 < r < 12 for r in rep.ratios)

    def test_one_percent(self):
        rep = limit_trick_check(G1, 1, SpectralParams((1j,), ()), kappa02=(1e3,))
        assert rep.deviations[0] < 1e-2

    def test_even_sum_rejected(self):
        with pytest.raises(RegimeError):
            limit_trick_check(G1, 1, params(1, 1))


def test_clear_caches():
    kernels.moment_matrix(G1, 4, False)
    kernels.clear_caches()
    assert kernels._moment_matrix_cached.cache_info().currsize == 0

from dataclasses import replace

import numpy as np
import pytest

from conftest import SQRT2PI, random_skew, rel
from pfrmt.ensembles import get_ensemble
from pfrmt.errors import BreakdownError, DimensionError
from pfrmt.kernels import z_pfaffian
from pfrmt.oracle import DiscretePairMeasure
from pfrmt.skew_linalg import SpectralParams, pfaffian
from pfrmt.skew_poly import (
    pfaffian_from_norms,
    skew_orthogonalize,
    transformed,
    verify_block_diagonal,
    z_in_basis,
)

G1 = get_ensemble("gauss-beta1")
G4 = get_ensemble("gauss-beta4")


class TestConstruction:
    def test_two_by_two_is_identity(self):
        basis = skew_orthogonalize(G4.build_moment_matrix(2))
        assert np.array_equal(basis.coeffs, np.eye(2))
        assert basis.pairing_norms[0] == pytest.approx(-SQRT2PI, rel=1e-14)
        assert verify_block_diagonal(basis, G4.build_moment_matrix(2))["residual"] == 0

    @pytest.mark.parametrize("ens", [G1, G4, get_ensemble("laguerre-beta1", 1)])
    def test_gauss_d8(self, ens):
        m = ens.build_moment_matrix(8)
        assert verify_block_diagonal(skew_orthogonalize(m), m)["residual"] < 1e-10

    def test_monic_lower_triangular(self):
        basis = skew_orthogonalize(G1.build_moment_matrix(6))
        assert np.allclose(np.triu(basis.coeffs, 1), 0)
        assert np.all(np.diag(basis.coeffs) == 1)

    def test_even_weight_parity(self):
        # an even weight keeps every polynomial of definite parity
        c = skew_orthogonalize(G1.build_moment_matrix(6)).coeffs
        for j in range(6):
            assert np.allclose(c[j, (j + 1) % 2 :: 2], 0, atol=1e-12)

    def test_rescaled_weight(self):
        m = G1.build_moment_matrix(6).matrix[:6, :6]
        c = 1.7
        a, b = skew_orthogonalize(m), skew_orthogonalize(c**2 * m)
        assert np.allclose(a.coeffs, b.coeffs, rtol=1e-12, atol=1e-12)
        assert np.allclose(np.array(b.pairing_norms), c**2 * np.array(a.pairing_norms), rtol=1e-12)

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_random_weight(self, seed):
        m = DiscretePairMeasure.random(9, seed=seed).build_moment_matrix(6, bordered=False)
        assert verify_block_diagonal(skew_orthogonalize(m), m)["residual"] < 1e-10

    def test_corrupted_coefficient(self):
        m = G1.build_moment_matrix(6)
        basis = skew_orthogonalize(m)
        coeffs = basis.coeffs.copy()
        coeffs[3, 1] += 0.5
        assert verify_block_diagonal(replace(basis, coeffs=coeffs), m)["residual"] > 1e-3

    def test_odd_order(self):
        m = G1.build_moment_matrix(5)
        basis = skew_orthogonalize(m)
        t = transformed(basis, m)
        assert len(basis.pairing_norms) == 2
        assert np.max(np.abs(t[4, :4])) < 1e-12 * np.max(np.abs(m.matrix))

    def test_breakdown(self):
        a = np.zeros((4, 4))
        a[0, 2], a[2, 0] = 1.0, -1.0
        a[1, 3], a[3, 1] = 1.0, -1.0
        with pytest.raises(BreakdownError) as exc:
            skew_orthogonalize(a)
        assert exc.value.step == 0

    def test_non_square(self):
        with pytest.raises(DimensionError):
            skew_orthogonalize(np.zeros((2, 3)))

    def test_evaluate(self):
        basis = skew_orthogonalize(G1.build_moment_matrix(4))
        x = np.array([0.3, -1.2])
        manual = np.array([[np.polyval(row[::-1], xi) for row in basis.coeffs] for xi in x])
        assert np.allclose(basis.evaluate(x), manual)


class TestPfaffianLink:
    @pytest.mark.parametrize("ens", [G1, G4, get_ensemble("laguerre-beta4", 1)])
    @pytest.mark.parametrize("d", [2, 4, 6, 8])
    def test_norm_product(self, ens, d):
        m = ens.build_moment_matrix(d, bordered=False)
        assert rel(pfaffian_from_norms(skew_orthogonalize(m)), pfaffian(m.matrix)) < 1e-9

    def test_random_skew(self, rng):
        a = random_skew(rng, 8)
        assert rel(pfaffian_from_norms(skew_orthogonalize(a)), pfaffian(a)) < 1e-9

    def test_odd_rejected(self):
        with pytest.raises(DimensionError):
            pfaffian_from_norms(skew_orthogonalize(G1.build_moment_matrix(3)))

    @pytest.mark.parametrize("ens,N,parity,k1,k2", [
        (G1, 2, "even", 1, 1),
        (G1, 2, "odd", 0, 1),
        (G1, 1, "odd", 2, 1),
        (G4, 2, "even", 1, 1),
        (G4, 1, "even", 0, 2),
    ])
    def test_basis_substitution(self, ens, N, parity, k1, k2):
        n = 2 * N + (parity == "odd")
        p = SpectralParams((0.5 + 1.5j, -0.3 + 2.0j)[:k1], (0.2 + 0.5j, -1.0 + 0.3j)[:k2])
        assert rel(z_in_basis(ens, n, p), z_pfaffian(ens, N, p, parity).value) < 1e-9

    def test_substitution_needs_rows(self):
        with pytest.raises(DimensionError):
            z_in_basis(G1, 1, SpectralParams((1j, 2j), ()))

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_skew, rel
from pfrmt.errors import DegenerateShiftError, DimensionError, NumericError, OnSupportError, SingularMatrixError
from pfrmt.precision import as_array
from pfrmt.skew_linalg import (
    SkewMatrix,
    SpectralParams,
    berezinian_sign,
    cauchy_det_form,
    pfaffian,
    pfaffian_bruteforce,
    pfaffian_permutation_sum,
    pfaffian_schur,
    skew_inverse,
    sqrt_berezinian_kk,
    sqrt_berezinian_mixed,
    sqrt_berezinian_mixed_det,
    vandermonde,
    vandermonde_det,
)

class TestSkewMatrix:
    def test_rejects_non_square(self):
        with pytest.raises(DimensionError):
            SkewMatrix(np.zeros((2, 3)))

    def test_rejects_symmetric_part(self):
        with pytest.raises(NumericError):
            SkewMatrix(np.array([[0, 1], [1, 0]]))

    def test_rejects_nan(self):
        with pytest.raises(NumericError):
            SkewMatrix(np.array([[0, np.nan], [-np.nan, 0]]))

    def test_projects_roundoff(self):
        a = np.array([[1e-17, 1.0], [-1.0 + 1e-16, 0.0]])
        m = SkewMatrix(a)
        assert m.entries[0, 0] == 0 and m.entries[0, 1] == -m.entries[1, 0]


class TestPfaffian:
    def test_two_by_two(self):
        assert pfaffian(np.array([[0, 3.5], [-3.5, 0]])) == 3.5

    def test_four_by_four_example(self):
        u = {(0, 1): 1, (0, 2): 2, (0, 3): 3, (1, 2): 4, (1, 3): 5, (2, 3): 6}
        a = np.zeros((4, 4))
        for (i, j), v in u.items():
            a[i, j], a[j, i] = v, -v
        assert pfaffian(a) == pytest.approx(8)
        assert pfaffian_permutation_sum(a) == pytest.approx(8)
        assert pfaffian_bruteforce(a) == pytest.approx(8)

    def test_empty(self):
        assert pfaffian(np.zeros((0, 0))) == 1

    def test_odd_dimension(self):
        with pytest.raises(DimensionError):
            pfaffian(np.zeros((3, 3)))

    def test_nan(self):
        a = np.array([[0, np.inf], [-np.inf, 0]])
        with pytest.raises(NumericError):
            pfaffian(a)

    def test_singular_is_zero(self):
        assert pfaffian(np.zeros((4, 4))) == 0

    @pytest.mark.parametrize("n", [2, 4, 6, 8])
    def test_matches_permutation_sum(self, rng, n):
        a = random_skew(rng, n)
        assert rel(pfaffian(a), pfaffian_permutation_sum(a)) < 1e-12

    @pytest.mark.parametrize("n", range(2, 21, 2))
    def test_square_is_determinant(self, rng, n):
        a = random_skew(rng, n)
        assert rel(pfaffian(a) ** 2, np.linalg.det(a)) < 1e-10

    @pytest.mark.parametrize("n", [2, 4, 6, 8])
    def test_congruence(self, rng, n):
        a = random_skew(rng, n)
        b = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        assert rel(pfaffian(b.T @ a @ b), np.linalg.det(b) * pfaffian(a)) < 1e-9

    @given(st.integers(0, 5), st.integers(0, 5), st.integers(0, 2**32 - 1))
    def test_swap_negates(self, i, j, seed):
        if i == j:
            return
        a = random_skew(np.random.default_rng(seed), 6)
        p = list(range(6))
        p[i], p[j] = p[j], p[i]
        assert rel(pfaffian(a[np.ix_(p, p)]), -pfaffian(a)) < 1e-12

    def test_extended_precision(self, rng):
        a = random_skew(rng, 6, complex_=False)
        ext = pfaffian(as_array(a, "extended"))
        assert isinstance(ext, mpmath.mpc)
        assert rel(complex(ext), pfaffian(a)) < 1e-13


class TestSkewInverse:
    def test_two_by_two(self):
        x = skew_inverse(np.array([[0, 2.0], [-2.0, 0]]))
        assert np.allclose(x, [[0, -0.5], [0.5, 0]])

    @pytest.mark.parametrize("n", [2, 6, 12, 20])
    def test_residual(self, rng, n):
        d = random_skew(rng, n)
        x, info = skew_inverse(d, full_output=True)
        assert np.max(np.abs(d @ x - np.eye(n))) < 1e-10
        assert info["residual"] < 1e-10
        assert np.array_equal(x, -x.T)

    def test_block_diagonal(self):
        blocks = [2.0, -3.0, 0.5]
        d = np.zeros((6, 6))
        for i, b in enumerate(blocks):
            d[2 * i, 2 * i + 1], d[2 * i + 1, 2 * i] = b, -b
        x = skew_inverse(d)
        for i, b in enumerate(blocks):
            assert x[2 * i, 2 * i + 1] == pytest.approx(-1 / b)

    def test_singular(self):
        d = np.zeros((4, 4))
        d[0, 1], d[1, 0] = 1, -1
        with pytest.raises(SingularMatrixError) as exc:
            skew_inverse(d)
        assert exc.value.rcond is not None

    def test_extended(self, rng):
        d = random_skew(rng, 4, complex_=False)
        x = skew_inverse(as_array(d, "extended"))
        assert np.allclose(np.array(x, dtype=complex), np.linalg.inv(d))


class TestSchurPfaffian:
    def test_zero_a(self):
        d = np.array([[0, 1.0], [-1.0, 0]])
        assert pfaffian_schur(np.zeros((2, 2)), np.zeros((2, 2)), d) == 0

    def test_decoupled(self, rng):
        a, d = random_skew(rng, 4), random_skew(rng, 2)
        assert rel(pfaffian_schur(a, np.zeros((4, 2)), d), pfaffian(a) * pfaffian(d)) < 1e-12

    @pytest.mark.parametrize("na,nd", [(2, 2), (2, 4), (4, 2), (4, 6)])
    def test_assembled(self, rng, na, nd):
        for _ in range(5):
            a, d = random_skew(rng, na), random_skew(rng, nd)
            b = rng.standard_normal((na, nd)) + 1j * rng.standard_normal((na, nd))
            full = np.block([[a, b], [-b.T, d]])
            assert rel(pfaffian_schur(a, b, d), pfaffian(full)) < 1e-10

    def test_shape_mismatch(self, rng):
        with pytest.raises(DimensionError):
            pfaffian_schur(random_skew(rng, 2), np.zeros((2, 3)), random_skew(rng, 2))


class TestVandermonde:
    def test_examples(self):
        assert vandermonde([1, 2]) == -1
        assert vandermonde([0, 1, 2]) == -2
        assert vandermonde([]) == 1 and vandermonde([5]) == 1

    @pytest.mark.parametrize("n", range(2, 9))
    def test_determinant_form(self, rng, n):
        e = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        assert rel(vandermonde(e), vandermonde_det(e)) < 1e-12

    @given(st.integers(0, 3), st.integers(0, 3), st.integers(0, 2**32 - 1))
    def test_merge(self, k, N, seed):
        r = np.random.default_rng(seed)
        kap = list(r.standard_normal(k) + 1j * r.standard_normal(k))
        e = list(r.standard_normal(2 * N))
        cross = np.prod([ea - kb for ea in e for kb in kap]) if e and kap else 1.0
        lhs = vandermonde(kap) * cross * vandermonde(e)
        assert rel(lhs, vandermonde(kap + e)) < 1e-10


class TestSpectralParams:
    def test_real_denominator_rejected(self):
        with pytest.raises(OnSupportError) as exc:
            SpectralParams([1j, 0.5])
        assert exc.value.field == "kappa1[1]"

    def test_duplicates_rejected(self):
        with pytest.raises(DegenerateShiftError):
            SpectralParams((), (0.1, 0.1))

    def test_counts(self):
        p = SpectralParams([1j], [0, 1, 2])
        assert (p.k1, p.k2) == (1, 3)


class TestBerezinian:
    def test_k1(self):
        p = SpectralParams([2j], [0.5])
        assert sqrt_berezinian_kk(p) == pytest.approx(1 / (2j - 0.5))

    def test_cauchy_example(self):
        # denominators on the real axis are fine for the pure algebra
        p = SpectralParams([0, 1], [2, 3], validated=False)
        assert sqrt_berezinian_kk(p) == pytest.approx(1 / 12)
        assert cauchy_det_form(p) == pytest.approx(1 / 12)

    def test_empty(self):
        assert sqrt_berezinian_kk(SpectralParams()) == 1

    @pytest.mark.parametrize("k", [1, 2, 3])
    def test_cauchy_determinant(self, rng, k):
        p = SpectralParams(rng.standard_normal(k) + 1j, rng.standard_normal(k) - 1j)
        assert rel(sqrt_berezinian_kk(p), cauchy_det_form(p)) < 1e-12

    def test_coincident(self):
        with pytest.raises(DegenerateShiftError):
            sqrt_berezinian_kk(SpectralParams([1j], [1j]))

    def test_no_cauchy_block(self, rng):
        kap2 = list(rng.standard_normal(2))
        e = list(rng.standard_normal(3))
        p = SpectralParams((), kap2)
        assert rel(sqrt_berezinian_mixed(p, e), vandermonde(kap2 + e)) < 1e-14

    def test_reduces_to_kk(self, rng):
        p = SpectralParams(rng.standard_normal(2) + 1j, rng.standard_normal(2))
        assert rel(sqrt_berezinian_mixed(p), sqrt_berezinian_kk(p)) < 1e-14

    def test_one_one_two(self, rng):
        p = SpectralParams([0.3 + 1j], [-0.2])
        e = rng.standard_normal(2)
        assert rel(sqrt_berezinian_mixed(p, e), sqrt_berezinian_mixed_det(p, e)) < 1e-10

    @given(st.integers(0, 3), st.integers(0, 3), st.integers(0, 4), st.integers(0, 2**32 - 1))
    def test_block_determinant(self, k1, k2, ne, seed):
        r = np.random.default_rng(seed)
        # separated abscissae keep the block determinant well conditioned
        y = r.permutation(np.arange(k2 + ne) - 2.0 + 0.4 * r.random(k2 + ne))
        p = SpectralParams(r.standard_normal(k1) + 1j * (1 + r.random(k1)), y[:k2])
        e = y[k2:]
        assert rel(sqrt_berezinian_mixed(p, e), sqrt_berezinian_mixed_det(p, e)) < 1e-10

    @pytest.mark.parametrize("k1,m", [(1, 3), (2, 2), (3, 1), (2, 5)])
    def test_sign_stable_under_deformation(self, rng, k1, m):
        """The recorded sign must not change along a continuous path of inputs."""
        x0 = rng.standard_normal(k1) + 2j
        y0 = rng.standard_normal(m)
        x1 = rng.standard_normal(k1) + 2j
        y1 = rng.standard_normal(m) + 0.5
        for t in np.linspace(0, 1, 11):
            x, y = (1 - t) * x0 + t * x1, (1 - t) * y0 + t * y1
            p = SpectralParams(x, y[: min(m, 1)])
            e = y[min(m, 1):]
            ratio = sqrt_berezinian_mixed(p, e) / sqrt_berezinian_mixed_det(p, e)
            assert ratio == pytest.approx(1.0, rel=1e-9)
        assert berezinian_sign(k1, m) in (1, -1)

    def test_signs_are_unit(self):
        assert {berezinian_sign(k, m) for k in range(5) for m in range(6)} <= {1, -1}


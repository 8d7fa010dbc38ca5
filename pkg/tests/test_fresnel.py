import cmath

import numpy as np
import pytest
from hypothesis import given, strategies as st

from vocdm import fresnel


def dfnt_entry(m, k, n):
    return cmath.exp(-1j * cmath.pi / 4 + 1j * cmath.pi / n * (m - k + (n % 2) / 2) ** 2) / n**0.5


class TestDfnt:
    def test_size_one(self):
        np.testing.assert_allclose(fresnel.dfnt_matrix(1), [[1.0]], atol=1e-15)

    def test_entry_n4(self):
        assert abs(fresnel.dfnt_matrix(4)[0, 0] - (0.35355339059327373 - 0.35355339059327373j)) < 1e-12

    @pytest.mark.parametrize("n", [2, 3, 5, 8])
    def test_matches_entry_formula(self, n):
        oracle = np.array([[dfnt_entry(m, k, n) for k in range(n)] for m in range(n)])
        np.testing.assert_allclose(fresnel.dfnt_matrix(n), oracle, atol=1e-12)

    @pytest.mark.parametrize("n", range(1, 40))
    def test_unitary(self, n):
        phi = fresnel.dfnt_matrix(n)
        assert np.linalg.norm(phi @ phi.conj().T - np.eye(n)) <= 1e-12 * max(1, n**0.5)

    def test_circulant(self):
        phi = fresnel.dfnt_matrix(7)
        for m in range(7):
            np.testing.assert_allclose(phi[m], np.roll(phi[0], m), atol=1e-13)

    def test_read_only(self):
        with pytest.raises(ValueError):
            fresnel.dfnt_matrix(4)[0, 0] = 0

    def test_rejects_zero(self):
        with pytest.raises(ValueError):
            fresnel.dfnt_matrix(0)

    @given(st.integers(1, 33), st.integers(1, 4), st.integers(0, 2**31 - 1))
    def test_fast_paths_match_dense(self, n, batch, seed):
        rng = np.random.default_rng(seed)
        x = rng.standard_normal((batch, n)) + 1j * rng.standard_normal((batch, n))
        np.testing.assert_allclose(fresnel.idfnt_apply(x), x @ fresnel.idfnt_matrix(n).T, atol=1e-11)
        np.testing.assert_allclose(fresnel.dfnt_apply(x), x @ fresnel.dfnt_matrix(n).T, atol=1e-11)
        np.testing.assert_allclose(fresnel.idfnt_apply(x.T, axis=0), fresnel.idfnt_matrix(n) @ x.T, atol=1e-11)


class TestShiftAndPhase:
    def test_shift_power_zero(self):
        np.testing.assert_array_equal(fresnel.cyclic_shift_matrix(4, 0), np.eye(4))

    def test_shift_moves_down(self):
        np.testing.assert_array_equal(fresnel.cyclic_shift_matrix(3, 1) @ np.array([1, 2, 3]), [3, 1, 2])

    def test_shift_is_circ_of_e1(self):
        k = 5
        first = np.zeros(k)
        first[1] = 1
        circ = np.column_stack([np.roll(first, c) for c in range(k)])
        np.testing.assert_array_equal(fresnel.cyclic_shift_matrix(k, 1), circ)

    def test_shift_periodic(self):
        np.testing.assert_array_equal(fresnel.cyclic_shift_matrix(5, 7), fresnel.cyclic_shift_matrix(5, 2))
        np.testing.assert_array_equal(fresnel.cyclic_shift_matrix(5, -1), fresnel.cyclic_shift_matrix(5, 4))

    def test_phase_power_zero(self):
        np.testing.assert_array_equal(fresnel.phase_diag_matrix(6, 0), np.eye(6))

    def test_phase_k4(self):
        np.testing.assert_allclose(np.diag(fresnel.phase_diag_matrix(4, 1)), [1, 1j, -1, -1j], atol=1e-15)

    @pytest.mark.parametrize("k", [1, 3, 8, 13])
    def test_full_turn(self, k):
        d = fresnel.phase_diag_matrix(k, 1)
        np.testing.assert_allclose(np.linalg.matrix_power(d, k), np.eye(k), atol=1e-12)
        np.testing.assert_allclose(fresnel.phase_diag_matrix(k, k), np.eye(k), atol=1e-15)

    def test_large_power_reduced(self):
        np.testing.assert_allclose(fresnel.phase_ramp(7, 10**12 + 3), fresnel.phase_ramp(7, (10**12 + 3) % 7), atol=1e-15)

    def test_leading_block_splits_phase(self):
        m, n = 3, 4
        k = m * n
        lam = fresnel.leading_phase_block(m, k)
        np.testing.assert_allclose(
            np.kron(fresnel.phase_diag_matrix(n, 1), lam), fresnel.phase_diag_matrix(k, 1), atol=1e-12
        )


class TestAlpha:
    def test_q_zero(self):
        for n in range(1, 10):
            assert fresnel.alpha(0, n) == 1

    def test_q1_n6(self):
        assert abs(fresnel.alpha(1, 6) - cmath.exp(-1j * cmath.pi / 6)) < 1e-15

    def test_q1_n3(self):
        assert abs(fresnel.alpha(1, 3) - 1) < 1e-15

    @given(st.integers(-30, 30), st.integers(1, 30))
    def test_unit_modulus(self, q, n):
        assert abs(abs(fresnel.alpha(q, n)) - 1) < 1e-12


@pytest.mark.parametrize("n", range(2, 13))
def test_commutation_identity(n):
    phi = fresnel.dfnt_matrix(n)
    for q in range(-n, n + 1):
        lhs = phi @ fresnel.phase_diag_matrix(n, q) @ phi.conj().T
        rhs = fresnel.alpha(q, n) * fresnel.phase_diag_matrix(n, q) @ fresnel.cyclic_shift_matrix(n, q)
        assert np.linalg.norm(lhs - rhs) <= 1e-10


@pytest.mark.parametrize("n", range(1, 17))
def test_inverse_is_circulant_of_first_column(n):
    inv = fresnel.idfnt_matrix(n)
    col0 = fresnel.idfnt_first_column(n)
    for c in range(n):
        assert np.max(np.abs(inv[:, c] - fresnel.cyclic_shift_matrix(n, c) @ col0)) <= 1e-12


@pytest.mark.parametrize("m,n", [(1, 1), (2, 3), (3, 4), (4, 2), (5, 5)])
def test_kronecker_circulant(m, n):
    big = np.kron(fresnel.idfnt_matrix(n), np.eye(m))
    t = np.zeros(m)
    t[0] = 1
    first = np.kron(fresnel.idfnt_first_column(n), t)
    circ = np.column_stack([np.roll(first, c) for c in range(m * n)])
    assert np.max(np.abs(big - circ)) <= 1e-12

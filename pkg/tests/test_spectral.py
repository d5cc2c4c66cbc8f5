"""Tests for spectral decomposition, Weyl fits and eigenfunction bounds."""

import math

import numpy as np
import pytest

from shubin_spectra.errors import InvalidArgumentError, NotNormalError, ResourceLimitError
from shubin_spectra.hermite import BasisTruncation, operator_matrix
from shubin_spectra.operators import annihilation, harmonic_oscillator, monomial, position
from shubin_spectra.spectral import (
    coeff_seminorm,
    decompose,
    eigen_bound_fit,
    eigen_constants_fit,
    sobolev_seminorm,
    weyl_fit,
)


class TestDecompose:
    def test_oscillator_eigenvalues(self, oscillator_spectrum):
        s = oscillator_spectrum
        j = np.arange(1, 65)
        np.testing.assert_allclose(s.eigenvalues.real, 2.0 * j - 1.0, atol=1e-12)
        assert s.selfadjoint
        assert s.trusted == 48

    def test_eigenvectors_are_unit_hermite_vectors(self, oscillator_spectrum):
        np.testing.assert_allclose(oscillator_spectrum.vectors, np.eye(64), atol=1e-12)

    def test_anisotropic_oscillator(self):
        op = monomial((0,), (2,)) + 4 * monomial((2,), (0,))
        s = decompose(operator_matrix(op, BasisTruncation(1, 128), pad=2), selfadjoint=True)
        expected = 2.0 * (2.0 * np.arange(20) + 1.0)
        np.testing.assert_allclose(s.eigenvalues[:20].real, expected, rtol=1e-6)

    def test_general_path_on_normal_matrix(self, oscillator):
        s = decompose(operator_matrix(oscillator, BasisTruncation(1, 16)))
        assert not s.selfadjoint
        np.testing.assert_allclose(s.eigenvalues, 2.0 * np.arange(1, 17) - 1.0, atol=1e-10)

    def test_non_normal_matrix_rejected(self):
        with pytest.raises(NotNormalError):
            decompose(operator_matrix(annihilation(), BasisTruncation(1, 16)))

    def test_selfadjoint_flag_checked(self):
        with pytest.raises(InvalidArgumentError):
            decompose(operator_matrix(annihilation(), BasisTruncation(1, 16)), selfadjoint=True)

    def test_degenerate_clusters_are_canonical(self):
        trunc = BasisTruncation(2, 8)
        s = decompose(operator_matrix(harmonic_oscillator(2), trunc), selfadjoint=True)
        assert s.clusters > 0
        v = s.vectors
        np.testing.assert_allclose(v.conj().T @ v, np.eye(trunc.total), atol=1e-10)
        np.testing.assert_allclose(s.eigenvalues[:3].real, [2.0, 4.0, 4.0], atol=1e-10)
        again = decompose(operator_matrix(harmonic_oscillator(2), trunc), selfadjoint=True)
        np.testing.assert_allclose(s.vectors, again.vectors, atol=1e-12)

    def test_phase_convention(self, oscillator_spectrum):
        v = oscillator_spectrum.vectors
        for j in range(v.shape[1]):
            k = int(np.argmax(np.abs(v[:, j])))
            assert v[k, j].real > 0
            assert abs(v[k, j].imag) < 1e-14

    def test_summary(self, oscillator_spectrum):
        summary = oscillator_spectrum.summary()
        assert summary['count'] == 64
        assert summary['trusted'] == 48
        assert summary['max_trusted_residual'] <= 1e-10


class TestWeylFit:
    def test_one_dimensional_oscillator(self, oscillator):
        s = decompose(operator_matrix(oscillator, BasisTruncation(1, 272)), selfadjoint=True)
        fit = weyl_fit(s, 2, 1, j_min=20, j_max=200)
        assert 1.9 <= fit.B <= 2.1
        assert 0.98 <= fit.exponent <= 1.02
        assert fit.expected_exponent == 1.0
        assert fit.j_max == 200

    def test_two_dimensional_oscillator(self):
        trunc = BasisTruncation(2, 40)
        s = decompose(operator_matrix(harmonic_oscillator(2), trunc), selfadjoint=True)
        fit = weyl_fit(s, 2, 2)
        assert 0.45 <= fit.exponent <= 0.55
        assert fit.r_squared > 0.95

    def test_too_few_trusted_points(self, oscillator):
        s = decompose(operator_matrix(oscillator, BasisTruncation(1, 16)), selfadjoint=True)
        with pytest.raises(ResourceLimitError):
            weyl_fit(s, 2, 1)


class TestSeminorms:
    def test_coefficient_seminorm(self):
        trunc = BasisTruncation(1, 8)
        u = np.zeros(8)
        u[0] = 1.0
        assert coeff_seminorm(u, (0,), (1,), trunc) == pytest.approx(1 / math.sqrt(2))
        assert coeff_seminorm(u, (1,), (0,), trunc) == pytest.approx(1 / math.sqrt(2))

    def test_sobolev_seminorm_of_ground_state(self):
        trunc = BasisTruncation(1, 8)
        u = np.zeros(8)
        u[0] = 1.0
        assert sobolev_seminorm(u, 0, trunc) == pytest.approx(1.0)
        assert sobolev_seminorm(u, 2, trunc) == pytest.approx(3 * math.sqrt(3) / 2)

    def test_cap(self):
        trunc = BasisTruncation(1, 8)
        with pytest.raises(InvalidArgumentError):
            coeff_seminorm(np.ones(8), (9,), (8,), trunc)
        with pytest.raises(InvalidArgumentError):
            sobolev_seminorm(np.ones(8), 17, trunc)

    def test_position_norm_matches_matrix(self):
        trunc = BasisTruncation(1, 10)
        rng = np.random.default_rng(0)
        u = rng.standard_normal(10)
        full = operator_matrix(position(0, 1), BasisTruncation(1, 11), pad=1).entries
        padded = np.zeros(11)
        padded[:10] = u
        assert coeff_seminorm(u, (0,), (1,), trunc) == pytest.approx(np.linalg.norm(full @ padded))


class TestEigenBounds:
    def test_bound_witness_is_stable(self, oscillator):
        s = decompose(operator_matrix(oscillator, BasisTruncation(1, 136)), selfadjoint=True)
        weyl = weyl_fit(s, 2, 1)
        fit = eigen_bound_fit(s, weyl, cap=4, j_max=100, threads=2)
        assert math.isfinite(fit.ell)
        assert fit.ell > 0
        assert len(fit.per_j) == 100
        assert fit.top_decade_variation <= 0.1

    def test_threads_do_not_change_result(self, oscillator):
        s = decompose(operator_matrix(oscillator, BasisTruncation(1, 136)), selfadjoint=True)
        weyl = weyl_fit(s, 2, 1)
        serial = eigen_bound_fit(s, weyl, cap=3, j_max=40, threads=1)
        parallel = eigen_bound_fit(s, weyl, cap=3, j_max=40, threads=4)
        assert serial.per_j == parallel.per_j

    def test_eigen_constants(self, oscillator_spectrum):
        constants = eigen_constants_fit(oscillator_spectrum, 2, cap=3, j_max=30)
        assert constants.L2 == pytest.approx(1.0)
        assert math.isfinite(constants.L1) and constants.L1 > 0
        assert constants.pairs_checked == 30 * (2 + 3 + 4)

    def test_cap_validation(self, oscillator_spectrum):
        with pytest.raises(InvalidArgumentError):
            eigen_constants_fit(oscillator_spectrum, 2, cap=0)

"""Tests for the Hermite basis: truncations, operator matrices and transforms."""

import math

import numpy as np
import pytest

from shubin_spectra.errors import InvalidArgumentError, InvalidInputError, ResourceLimitError
from shubin_spectra.hermite import (
    BasisTruncation,
    apply_padded,
    crop,
    gauss_hermite_rule,
    hermite_eval,
    hermite_functions,
    hermite_transform,
    ladder_matrix,
    monomial_norms,
    named_function,
    operator_matrix,
    quadrature_grid,
    synthesize,
)
from shubin_spectra.operators import harmonic_oscillator, monomial, position


class TestBasisTruncation:
    def test_graded_order(self):
        trunc = BasisTruncation(2, 3)
        assert trunc.total == 9
        assert trunc.index_order[:4] == ((0, 0), (0, 1), (1, 0), (0, 2))
        assert trunc.index_order[-1] == (2, 2)
        assert trunc.position_of((1, 0)) == 2

    def test_complete_count(self):
        assert BasisTruncation(2, 3).complete_count == 6
        assert BasisTruncation(1, 10).complete_count == 10

    def test_resource_limit(self):
        with pytest.raises(ResourceLimitError):
            BasisTruncation(3, 17)

    def test_invalid(self):
        with pytest.raises(InvalidArgumentError):
            BasisTruncation(0, 4)


class TestOperatorMatrix:
    def test_oscillator_is_diagonal(self, oscillator, trunc64):
        a = operator_matrix(oscillator, trunc64)
        expected = np.diag(2.0 * np.arange(64) + 1.0)
        np.testing.assert_allclose(a.entries, expected, atol=1e-12)
        assert a.pad == 2

    def test_two_dimensional_oscillator(self):
        trunc = BasisTruncation(2, 6)
        a = operator_matrix(harmonic_oscillator(2), trunc)
        degrees = np.array([sum(k) for k in trunc.index_order], dtype=float)
        np.testing.assert_allclose(a.entries, np.diag(2.0 * degrees + 2.0), atol=1e-12)

    def test_position_ladder_entries(self):
        a = ladder_matrix(0, 'x', BasisTruncation(1, 8))
        k = np.arange(1, 8)
        np.testing.assert_allclose(np.diag(a.entries, 1), np.sqrt(k / 2.0))
        np.testing.assert_allclose(np.diag(a.entries, -1), np.sqrt(k / 2.0))
        assert a.truncation_loss == pytest.approx(2.0)

    def test_momentum_ladder_is_hermitian(self):
        a = ladder_matrix(0, 'D', BasisTruncation(1, 8)).entries
        np.testing.assert_allclose(a, a.conj().T, atol=1e-15)

    def test_dimension_mismatch(self, oscillator):
        with pytest.raises(InvalidArgumentError):
            operator_matrix(oscillator, BasisTruncation(2, 4))

    def test_apply_padded_is_exact_at_the_edge(self):
        trunc = BasisTruncation(1, 8)
        u = np.zeros(8)
        u[7] = 1.0
        v = apply_padded(position(0, 1), u, trunc)
        assert v.size == 9
        assert v[8] == pytest.approx(math.sqrt(4.0))
        assert v[6] == pytest.approx(math.sqrt(3.5))
        assert crop(v, trunc, 9).size == 8


class TestHermiteFunctions:
    def test_ground_state_at_origin(self):
        assert hermite_eval(0, 0.0) == pytest.approx(math.pi ** -0.25)

    def test_first_excited_state(self):
        x = np.linspace(-3, 3, 7)
        expected = math.sqrt(2.0) * x * np.exp(-x * x / 2) * math.pi ** -0.25
        np.testing.assert_allclose(hermite_eval(1, x), expected, atol=1e-14)

    def test_orthonormal_under_quadrature(self):
        nodes, log_w = gauss_hermite_rule(80)
        phi = hermite_functions(40, nodes, log_weight=0.5 * (log_w + nodes * nodes))
        np.testing.assert_allclose(phi @ phi.T, np.eye(40), atol=1e-12)

    def test_large_arguments_do_not_overflow(self):
        values = hermite_functions(300, np.array([30.0, 40.0]))
        assert np.all(np.isfinite(values))

    def test_negative_index(self):
        with pytest.raises(InvalidArgumentError):
            hermite_eval(-1, 0.0)


class TestHermiteTransform:
    def test_gaussian_coefficients(self):
        trunc = BasisTruncation(1, 32)
        c = hermite_transform(named_function('gaussian'), trunc, 48)
        assert c[0].real == pytest.approx(math.pi ** 0.25, abs=1e-8)
        assert np.sum(np.abs(c[1:])) <= 1e-8

    def test_hermite_function_is_unit_vector(self):
        trunc = BasisTruncation(2, 8)
        c = hermite_transform(named_function('hermite_k', dim=2, k=3), trunc, 24)
        expected = np.zeros(trunc.total)
        expected[trunc.position_of((3, 0))] = 1.0
        np.testing.assert_allclose(c, expected, atol=1e-10)

    def test_sampled_input_matches_callable(self):
        trunc = BasisTruncation(1, 16)
        f = named_function('gaussian_narrow')
        samples = f(quadrature_grid(1, 30))
        np.testing.assert_allclose(hermite_transform(samples, trunc, 30),
                                   hermite_transform(f, trunc, 30), atol=1e-14)

    def test_synthesize_reconstructs(self):
        trunc = BasisTruncation(1, 48)
        f = named_function('gaussian_narrow')
        c = hermite_transform(f, trunc, 64)
        pts = np.linspace(-4, 4, 9)[:, None]
        np.testing.assert_allclose(synthesize(c, trunc, pts).real, f(pts), atol=1e-10)

    def test_quadrature_too_small(self):
        with pytest.raises(InvalidArgumentError):
            hermite_transform(named_function('gaussian'), BasisTruncation(1, 32), 39)

    def test_sample_errors(self):
        trunc = BasisTruncation(1, 8)
        with pytest.raises(InvalidInputError):
            hermite_transform(np.ones(10), trunc, 16)
        bad = np.ones(16)
        bad[3] = np.nan
        with pytest.raises(InvalidInputError):
            hermite_transform(bad, trunc, 16)


class TestMonomialNorms:
    def test_position_times_ground_state(self):
        trunc = BasisTruncation(1, 8)
        u = np.zeros(8)
        u[0] = 1.0
        norms = monomial_norms(u, trunc, 2)
        assert norms[((0,), (1,))] == pytest.approx(1 / math.sqrt(2))
        assert norms[((1,), (0,))] == pytest.approx(1 / math.sqrt(2))
        order_two = sum(v for (a, b), v in norms.items() if a[0] + b[0] == 2)
        assert order_two == pytest.approx(3 * math.sqrt(3) / 2)

    def test_matches_padded_operator(self):
        trunc = BasisTruncation(1, 12)
        rng = np.random.default_rng(3)
        u = rng.standard_normal(12)
        norms = monomial_norms(u, trunc, 3)
        v = apply_padded(monomial((2,), (1,), 1j), u, trunc, pad=3)
        assert norms[((1,), (2,))] == pytest.approx(np.linalg.norm(v))

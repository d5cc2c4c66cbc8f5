"""Tests for the symbolic Shubin operator algebra."""

import math

import numpy as np
import pytest
from numpy.polynomial import Polynomial

from shubin_spectra.errors import InvalidArgumentError, ResourceLimitError
from shubin_spectra.operators import (
    ShubinOperator,
    adjoint,
    annihilation,
    compose,
    creation,
    derivative,
    ellipticity_test,
    harmonic_oscillator,
    identity,
    is_normal,
    iterate,
    max_coefficient_difference,
    monomial,
    multi_indices_of_order,
    position,
)


def _apply_to_gaussian_multiple(p, poly):
    """Apply a 1-D operator to q(x) e^{-x^2/2}; returns the new polynomial factor.

    d/dx (q e^{-x^2/2}) = (q' - x q) e^{-x^2/2} and D = -i d/dx.
    """
    x = Polynomial([0, 1])
    result = Polynomial([0j])
    for (beta, alpha), c in p.terms.items():
        q = poly
        for _ in range(alpha[0]):
            q = -1j * (q.deriv() - x * q)
        result = result + c * x ** beta[0] * q
    return result


def _sample_operator():
    return ShubinOperator(1, {
        ((2,), (0,)): 1,
        ((1,), (1,)): 2 - 1j,
        ((0,), (3,)): 3j,
        ((0,), (0,)): -4,
    })


def _random_operator(rng, dim, order, count=4):
    terms = {}
    for _ in range(count):
        s = int(rng.integers(0, order + 1))
        split = int(rng.integers(0, s + 1))
        beta = tuple(int(v) for v in rng.multinomial(split, [1.0 / dim] * dim))
        alpha = tuple(int(v) for v in rng.multinomial(s - split, [1.0 / dim] * dim))
        terms[(beta, alpha)] = complex(int(rng.integers(-3, 4)), int(rng.integers(-3, 4)))
    return ShubinOperator(dim, terms)


class TestConstruction:
    def test_zero_coefficients_are_pruned(self):
        op = ShubinOperator(1, {((1,), (0,)): 0, ((0,), (1,)): 2})
        assert list(op.terms) == [((0,), (1,))]
        assert op.order == 1

    def test_rejects_wrong_index_length(self):
        with pytest.raises(InvalidArgumentError):
            ShubinOperator(2, {((1,), (0,)): 1})

    def test_rejects_non_finite_coefficient(self):
        with pytest.raises(InvalidArgumentError):
            ShubinOperator(1, {((1,), (0,)): math.inf})

    def test_oscillator_terms(self):
        op = harmonic_oscillator(2, omega=3.0)
        assert op.order == 2
        assert op.terms[((2, 0), (0, 0))] == 9
        assert op.terms[((0, 0), (0, 2))] == 1

    def test_multi_indices_of_order(self):
        assert multi_indices_of_order(2, 2) == [(2, 0), (1, 1), (0, 2)]

    def test_from_dict_forms(self):
        shifted = ShubinOperator.from_dict({'kind': 'oscillator', 'dim': 1, 'shift': 1.0})
        assert shifted == harmonic_oscillator(1) - identity(1)
        terms = ShubinOperator.from_dict(shifted.to_dict())
        assert terms == shifted
        assert ShubinOperator.from_dict({'kind': 'annihilation'}) == annihilation()

    def test_from_dict_unknown_kind(self):
        with pytest.raises(InvalidArgumentError):
            ShubinOperator.from_dict({'kind': 'laplacian'})


class TestCompose:
    def test_canonical_commutator(self):
        x, d = position(0, 1), derivative(0, 1)
        commutator = compose(d, x) - compose(x, d)
        assert commutator == -1j * identity(1)

    def test_matmul_and_identity(self):
        op = _sample_operator()
        assert op @ identity(1) == op
        assert identity(1) @ op == op

    def test_order_adds(self):
        op = _sample_operator()
        assert compose(op, op).order == 2 * op.order

    @pytest.mark.parametrize('poly', [[1], [0, 1], [2, -1, 0.5], [0, 0, 0, 1]])
    def test_compose_matches_pointwise_application(self, poly):
        p = _sample_operator()
        q = harmonic_oscillator(1) + monomial((1,), (2,), 1j)
        f = Polynomial(np.array(poly, dtype=complex))
        sequential = _apply_to_gaussian_multiple(p, _apply_to_gaussian_multiple(q, f))
        composed = _apply_to_gaussian_multiple(compose(p, q), f)
        diff = (sequential - composed).coef
        assert np.max(np.abs(diff)) <= 1e-9

    @pytest.mark.parametrize('dim', [1, 2])
    def test_associative_on_random_triples(self, dim):
        rng = np.random.default_rng(7 + dim)
        for _ in range(5):
            p, q, r = (_random_operator(rng, dim, 3) for _ in range(3))
            lhs = compose(compose(p, q), r)
            rhs = compose(p, compose(q, r))
            assert max_coefficient_difference(lhs, rhs) <= 1e-9

    def test_dimension_mismatch(self):
        with pytest.raises(InvalidArgumentError):
            compose(identity(1), identity(2))


class TestAdjoint:
    def test_involution(self):
        op = _sample_operator()
        assert adjoint(adjoint(op)) == op

    def test_anti_homomorphism(self):
        p = _sample_operator()
        q = harmonic_oscillator(1) + monomial((1,), (2,), 1j)
        lhs = adjoint(compose(p, q))
        rhs = compose(adjoint(q), adjoint(p))
        assert max_coefficient_difference(lhs, rhs) <= 1e-12

    def test_derivative_is_self_adjoint(self):
        assert adjoint(derivative(0, 1)) == derivative(0, 1)

    def test_annihilation_adjoint_is_creation(self):
        assert max_coefficient_difference(adjoint(annihilation()), creation()) <= 1e-15


class TestNormality:
    def test_oscillator_is_normal(self, oscillator):
        report = is_normal(oscillator)
        assert report.normal
        assert report.discrepancy == 0.0

    def test_derivative_is_normal(self):
        report = is_normal(derivative(0, 1))
        assert report.normal
        assert report.discrepancy == 0.0

    def test_annihilation_discrepancy_is_one(self):
        report = is_normal(annihilation())
        assert not report.normal
        assert report.discrepancy == pytest.approx(1.0, abs=1e-12)


class TestIterate:
    def test_zero_power_is_identity(self, oscillator):
        assert iterate(oscillator, 0) == identity(1)

    def test_square(self, oscillator):
        assert iterate(oscillator, 2) == compose(oscillator, oscillator)

    @pytest.mark.parametrize('j, k', [(1, 1), (1, 2), (2, 3), (0, 4)])
    def test_powers_add(self, j, k):
        op = harmonic_oscillator(1) + monomial((1,), (1,), 0.5j)
        lhs = iterate(op, j + k)
        rhs = compose(iterate(op, j), iterate(op, k))
        scale = max(abs(c) for c in lhs.terms.values())
        assert max_coefficient_difference(lhs, rhs) <= 1e-9 * scale

    def test_cap(self, oscillator):
        with pytest.raises(ResourceLimitError):
            iterate(oscillator, 17)
        with pytest.raises(InvalidArgumentError):
            iterate(oscillator, -1)


class TestEllipticity:
    def test_oscillator_is_elliptic(self, oscillator):
        report = ellipticity_test(oscillator, sphere_samples=64, seed=0)
        assert report.elliptic
        assert report.min_modulus == pytest.approx(1.0, abs=1e-9)

    def test_pure_derivative_is_not_elliptic(self):
        report = ellipticity_test(monomial((0,), (2,)), sphere_samples=64, seed=0)
        assert not report.elliptic
        assert abs(report.argmin[1]) < 1e-3
        assert abs(report.argmin[0]) == pytest.approx(1.0, abs=1e-3)

    def test_seed_reproducible(self):
        op = monomial((1,), (1,)) + harmonic_oscillator(1)
        first = ellipticity_test(op, sphere_samples=32, seed=7)
        second = ellipticity_test(op, sphere_samples=32, seed=7)
        assert first == second

    def test_order_zero_rejected(self):
        with pytest.raises(InvalidArgumentError):
            ellipticity_test(identity(1))

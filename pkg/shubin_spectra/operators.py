"""Symbolic Shubin operators with polynomial coefficients.

An operator is a finite sum of normal-ordered monomials ``c * x^beta D^alpha``
with ``D = -i d/dx``. Products are brought back to normal order one variable
and one degree at a time through the commutation rule ``D_j x_j = x_j D_j - i``.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Iterable, Mapping, Tuple

import numpy as np

from .errors import InvalidArgumentError, ResourceLimitError

logger = logging.getLogger(__name__)

MultiIndex = Tuple[int, ...]
TermKey = Tuple[MultiIndex, MultiIndex]

ITERATE_CAP = 16
ELLIPTIC_THRESHOLD = 1e-9
REFINE_STEPS = 200
DEFAULT_SPHERE_SAMPLES = 256


def multi_index(entries: Iterable[int], dim: int) -> MultiIndex:
    """Validate and freeze a multi-index of length ``dim``."""
    mi = tuple(int(e) for e in entries)
    if len(mi) != dim:
        raise InvalidArgumentError(f'multi-index {mi} has length {len(mi)}, expected {dim}')
    if any(e < 0 for e in mi):
        raise InvalidArgumentError(f'multi-index {mi} has negative entries')
    return mi


def multi_indices_of_order(dim: int, order: int):
    """All multi-indices of total degree ``order``, in lexicographic order."""
    if dim == 1:
        return [(order,)]
    out = []
    for first in range(order, -1, -1):
        for rest in multi_indices_of_order(dim - 1, order - first):
            out.append((first,) + rest)
    return out


def factorial_of(mi: MultiIndex) -> int:
    return math.prod(math.factorial(e) for e in mi)


def _add_index(a: MultiIndex, b: MultiIndex) -> MultiIndex:
    return tuple(x + y for x, y in zip(a, b))


@lru_cache(maxsize=None)
def _d_times_x_power(g: int) -> Tuple[Tuple[int, int, complex], ...]:
    """Normal order of D x^g as tuples (x power, D power, coefficient)."""
    if g == 0:
        return ((0, 1, 1 + 0j),)
    # D x^g = (x D - i) x^{g-1} = x (D x^{g-1}) - i x^{g-1}
    acc: Dict[Tuple[int, int], complex] = {}
    for xp, dp, c in _d_times_x_power(g - 1):
        acc[(xp + 1, dp)] = acc.get((xp + 1, dp), 0j) + c
    acc[(g - 1, 0)] = acc.get((g - 1, 0), 0j) - 1j
    return tuple((xp, dp, c) for (xp, dp), c in sorted(acc.items()) if c != 0)


@lru_cache(maxsize=None)
def _reorder(a: int, g: int) -> Tuple[Tuple[int, int, complex], ...]:
    """Normal order of D^a x^g in one variable."""
    if a == 0 or g == 0:
        return ((g, a, 1 + 0j),)
    # D^a x^g = D^{a-1} (D x^g)
    acc: Dict[Tuple[int, int], complex] = {}
    for xp, dp, c in _d_times_x_power(g):
        for xq, dq, d in _reorder(a - 1, xp):
            key = (xq, dq + dp)
            acc[key] = acc.get(key, 0j) + c * d
    return tuple((xp, dp, c) for (xp, dp), c in sorted(acc.items()) if c != 0)


def _sort_key(key: TermKey):
    beta, alpha = key
    return (sum(beta) + sum(alpha), beta, alpha)


@dataclass(frozen=True, eq=False)
class ShubinOperator:
    """Finite map (beta, alpha) -> c for the operator sum c x^beta D^alpha."""

    dim: int
    terms: Mapping[TermKey, complex]

    def __post_init__(self):
        if self.dim < 1:
            raise InvalidArgumentError(f'dimension must be positive (got {self.dim!r})')
        clean: Dict[TermKey, complex] = {}
        for key, coeff in self.terms.items():
            beta, alpha = key
            beta = multi_index(beta, self.dim)
            alpha = multi_index(alpha, self.dim)
            c = complex(coeff)
            if not (math.isfinite(c.real) and math.isfinite(c.imag)):
                raise InvalidArgumentError(f'non-finite coefficient for {key}')
            if c != 0:
                clean[(beta, alpha)] = clean.get((beta, alpha), 0j) + c
        ordered = {k: clean[k] for k in sorted(clean, key=_sort_key) if clean[k] != 0}
        object.__setattr__(self, 'terms', ordered)

    @property
    def order(self) -> int:
        if not self.terms:
            return 0
        return max(sum(b) + sum(a) for b, a in self.terms)

    def __eq__(self, other):
        if not isinstance(other, ShubinOperator):
            return NotImplemented
        return self.dim == other.dim and dict(self.terms) == dict(other.terms)

    __hash__ = None  # type: ignore[assignment]

    def __add__(self, other: 'ShubinOperator') -> 'ShubinOperator':
        _check_dims(self, other)
        acc = dict(self.terms)
        for key, c in other.terms.items():
            acc[key] = acc.get(key, 0j) + c
        return ShubinOperator(self.dim, acc)

    def __neg__(self) -> 'ShubinOperator':
        return ShubinOperator(self.dim, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other: 'ShubinOperator') -> 'ShubinOperator':
        return self + (-other)

    def __mul__(self, scalar) -> 'ShubinOperator':
        if isinstance(scalar, ShubinOperator):
            return compose(self, scalar)
        s = complex(scalar)
        return ShubinOperator(self.dim, {k: s * c for k, c in self.terms.items()})

    __rmul__ = __mul__

    def __matmul__(self, other: 'ShubinOperator') -> 'ShubinOperator':
        return compose(self, other)

    def principal_terms(self) -> Dict[TermKey, complex]:
        m = self.order
        return {k: c for k, c in self.terms.items() if sum(k[0]) + sum(k[1]) == m}

    def to_dict(self):
        return {
            'dim': self.dim,
            'terms': [
                {'beta': list(b), 'alpha': list(a), 're': c.real, 'im': c.imag}
                for (b, a), c in self.terms.items()
            ],
        }

    @classmethod
    def from_dict(cls, data) -> 'ShubinOperator':
        """Parse ``{"dim", "terms": [{"beta", "alpha", "re", "im"}]}`` or ``{"kind": "oscillator", ...}``."""
        if not isinstance(data, dict):
            raise InvalidArgumentError('operator must be a JSON object')
        kind = data.get('kind', 'terms')
        dim = int(data.get('dim', 1))
        if kind == 'oscillator':
            shift = complex(data.get('shift', 0.0))
            op = harmonic_oscillator(dim, omega=float(data.get('omega', 1.0)))
            return op - shift * identity(dim) if shift else op
        if kind == 'annihilation':
            return annihilation()
        if kind != 'terms':
            raise InvalidArgumentError(f'unknown operator kind {kind!r}')
        terms: Dict[TermKey, complex] = {}
        for entry in data.get('terms', []):
            key = (multi_index(entry['beta'], dim), multi_index(entry['alpha'], dim))
            terms[key] = terms.get(key, 0j) + complex(entry.get('re', 0.0), entry.get('im', 0.0))
        return cls(dim, terms)


def _check_dims(p: ShubinOperator, q: ShubinOperator):
    if p.dim != q.dim:
        raise InvalidArgumentError(f'dimension mismatch: {p.dim} vs {q.dim}')


def identity(dim: int) -> ShubinOperator:
    zero = (0,) * dim
    return ShubinOperator(dim, {(zero, zero): 1})


def monomial(beta: MultiIndex, alpha: MultiIndex, coeff: complex = 1) -> ShubinOperator:
    return ShubinOperator(len(beta), {(tuple(beta), tuple(alpha)): coeff})


def _unit(axis: int, dim: int) -> MultiIndex:
    if not 0 <= axis < dim:
        raise InvalidArgumentError(f'axis {axis} out of range for dimension {dim}')
    return tuple(1 if j == axis else 0 for j in range(dim))


def position(axis: int, dim: int) -> ShubinOperator:
    return monomial(_unit(axis, dim), (0,) * dim)


def derivative(axis: int, dim: int) -> ShubinOperator:
    """D_j = -i d/dx_j."""
    return monomial((0,) * dim, _unit(axis, dim))


def harmonic_oscillator(dim: int = 1, omega: float = 1.0) -> ShubinOperator:
    """sum_j D_j^2 + omega^2 x_j^2; eigenvalues omega * (2|k| + dim)."""
    terms: Dict[TermKey, complex] = {}
    zero = (0,) * dim
    for j in range(dim):
        two = tuple(2 if i == j else 0 for i in range(dim))
        terms[(zero, two)] = 1
        terms[(two, zero)] = omega * omega
    return ShubinOperator(dim, terms)


def annihilation() -> ShubinOperator:
    """(x + iD)/sqrt(2) = (x + d/dx)/sqrt(2) in one variable."""
    c = 1 / math.sqrt(2)
    return ShubinOperator(1, {((1,), (0,)): c, ((0,), (1,)): 1j * c})


def creation() -> ShubinOperator:
    c = 1 / math.sqrt(2)
    return ShubinOperator(1, {((1,), (0,)): c, ((0,), (1,)): -1j * c})


def _reorder_multi(alpha: MultiIndex, gamma: MultiIndex):
    """Normal order of D^alpha x^gamma across all axes."""
    per_axis = [_reorder(a, g) for a, g in zip(alpha, gamma)]
    for combo in itertools.product(*per_axis):
        coeff = 1 + 0j
        for _, _, c in combo:
            coeff *= c
        yield tuple(x for x, _, _ in combo), tuple(d for _, d, _ in combo), coeff


def compose(p: ShubinOperator, q: ShubinOperator) -> ShubinOperator:
    """Normal-ordered product p o q."""
    _check_dims(p, q)
    acc: Dict[TermKey, complex] = {}
    for (beta, alpha), c in p.terms.items():
        for (gamma, delta), d in q.terms.items():
            for xp, dp, e in _reorder_multi(alpha, gamma):
                key = (_add_index(beta, xp), _add_index(dp, delta))
                acc[key] = acc.get(key, 0j) + c * d * e
    return ShubinOperator(p.dim, acc)


def adjoint(p: ShubinOperator) -> ShubinOperator:
    """Formal L^2 adjoint: (c x^beta D^alpha)* = conj(c) D^alpha x^beta, normal ordered."""
    acc: Dict[TermKey, complex] = {}
    for (beta, alpha), c in p.terms.items():
        for xp, dp, e in _reorder_multi(alpha, beta):
            key = (xp, dp)
            acc[key] = acc.get(key, 0j) + c.conjugate() * e
    return ShubinOperator(p.dim, acc)


def max_coefficient_difference(p: ShubinOperator, q: ShubinOperator) -> float:
    """Largest |coefficient| of p - q (0.0 when equal)."""
    diff = p - q
    if not diff.terms:
        return 0.0
    return max(abs(c) for c in diff.terms.values())


@dataclass(frozen=True)
class NormalityReport:
    normal: bool
    discrepancy: float

    def to_dict(self):
        return {'normal': self.normal, 'discrepancy': self.discrepancy}


def is_normal(p: ShubinOperator, tol: float = 0.0) -> NormalityReport:
    """Check P P* = P* P; discrepancy is the largest coefficient of the commutator."""
    pa = adjoint(p)
    discrepancy = max_coefficient_difference(compose(p, pa), compose(pa, p))
    return NormalityReport(discrepancy <= tol, discrepancy)


def iterate(p: ShubinOperator, k: int, cap: int = ITERATE_CAP) -> ShubinOperator:
    """P^k by repeated composition; P^0 is the identity."""
    if k < 0:
        raise InvalidArgumentError(f'iterate exponent must be non-negative (got {k})')
    if k > cap:
        raise ResourceLimitError(f'iterate exponent {k} exceeds cap {cap}')
    result = identity(p.dim)
    for _ in range(k):
        result = compose(result, p)
    return result


def _symbol_parts(p: ShubinOperator):
    principal = p.principal_terms()
    coeffs = np.array(list(principal.values()), dtype=complex)
    # exponents over the 2n phase-space coordinates (x, xi)
    exps = np.array([list(b) + list(a) for b, a in principal], dtype=float)
    return coeffs, exps


def _eval_symbol(coeffs, exps, z):
    """Principal symbol at points z of shape (S, 2n)."""
    powers = np.prod(z[:, None, :] ** exps[None, :, :], axis=2)
    return powers @ coeffs


def _symbol_gradient(coeffs, exps, z):
    """Gradient of the principal symbol at a single point z (2n,)."""
    grad = np.zeros(z.size, dtype=complex)
    for k in range(z.size):
        mask = exps[:, k] > 0
        if not mask.any():
            continue
        e = exps[mask].copy()
        scale = e[:, k].copy()
        e[:, k] -= 1
        grad[k] = np.sum(coeffs[mask] * scale * np.prod(z[None, :] ** e, axis=1))
    return grad


@dataclass(frozen=True)
class EllipticityReport:
    elliptic: bool
    min_modulus: float
    argmin: Tuple[float, ...]
    threshold: float
    samples: int

    def to_dict(self):
        return {
            'elliptic': self.elliptic,
            'min_modulus': self.min_modulus,
            'argmin': list(self.argmin),
            'threshold': self.threshold,
            'samples': self.samples,
        }


def _sphere_points(dim2, count, seed):
    g = np.random.default_rng(seed).standard_normal((count, dim2))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def ellipticity_test(p: ShubinOperator, sphere_samples: int = DEFAULT_SPHERE_SAMPLES,
                     seed: int = 0, threshold: float = ELLIPTIC_THRESHOLD) -> EllipticityReport:
    """Minimize |p_m| over the unit sphere of R^{2n}.

    Seeded Gaussian samples normalized onto the sphere start the search; the best
    sample is refined by projected gradient descent on |p_m|^2 with an
    adaptive step.
    """
    if p.order == 0:
        raise InvalidArgumentError('ellipticity is undefined for order-0 operators')
    if sphere_samples < 1:
        raise InvalidArgumentError('sphere_samples must be positive')
    coeffs, exps = _symbol_parts(p)
    pts = _sphere_points(2 * p.dim, sphere_samples, seed)
    values = np.abs(_eval_symbol(coeffs, exps, pts))
    z = pts[int(np.argmin(values))].copy()

    def objective(point):
        return float(abs(_eval_symbol(coeffs, exps, point[None, :])[0]) ** 2)

    f = objective(z)
    step = 1.0
    for _ in range(REFINE_STEPS):
        if f == 0.0:
            break
        s = _eval_symbol(coeffs, exps, z[None, :])[0]
        grad = 2.0 * np.real(np.conj(s) * _symbol_gradient(coeffs, exps, z))
        grad -= np.dot(grad, z) * z
        if not np.any(grad):
            break
        accepted = False
        for _ in range(60):
            trial = z - step * grad
            trial /= np.linalg.norm(trial)
            ft = objective(trial)
            if ft < f:
                z, f = trial, ft
                step *= 2.0
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break
    min_modulus = math.sqrt(f)
    logger.debug('ellipticity: min |p_m| = %.3e after refinement', min_modulus)
    return EllipticityReport(
        elliptic=min_modulus >= threshold,
        min_modulus=min_modulus,
        argmin=tuple(float(v) for v in z),
        threshold=threshold,
        samples=sphere_samples,
    )

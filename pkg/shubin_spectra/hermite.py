"""Hermite function basis: truncation, operator matrices, evaluation and transforms.

Multi-indices of a truncation are enumerated in degree-graded order: first by
total degree, then lexicographically. Operator matrices are assembled on a
padded grid (per-axis size N + pad) from sparse ladder matrices and cropped
back to the truncation, so entries are exact whenever pad >= operator order.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Callable, Optional, Tuple, Union

import numpy as np
import scipy.sparse as sp
from numpy.typing import NDArray
from scipy.special import roots_hermite

from .errors import InvalidArgumentError, InvalidInputError, ResourceLimitError
from .operators import (
    MultiIndex,
    ShubinOperator,
    derivative,
    monomial,
    multi_indices_of_order,
    position,
)

logger = logging.getLogger(__name__)

MAX_TOTAL = 4096
MAX_PADDED_TOTAL = 2_000_000
QUADRATURE_MARGIN = 8

_LOG_PI_QUARTER = 0.25 * math.log(math.pi)
_RESCALE_AT = 1e150


@dataclass(frozen=True)
class BasisTruncation:
    """Tensor Hermite basis {h_k : 0 <= k_j < per_axis} in ``dim`` variables."""

    dim: int
    per_axis: int

    def __post_init__(self):
        if self.dim < 1 or self.per_axis < 1:
            raise InvalidArgumentError('truncation needs dim >= 1 and per_axis >= 1')
        if self.per_axis ** self.dim > MAX_TOTAL:
            raise ResourceLimitError(
                f'truncation {self.per_axis}^{self.dim} exceeds {MAX_TOTAL} basis functions'
            )

    @property
    def total(self) -> int:
        return self.per_axis ** self.dim

    @cached_property
    def index_order(self) -> Tuple[MultiIndex, ...]:
        grid = itertools.product(range(self.per_axis), repeat=self.dim)
        return tuple(sorted(grid, key=lambda k: (sum(k), k)))

    @cached_property
    def _index_array(self) -> NDArray[np.int64]:
        return np.array(self.index_order, dtype=np.int64).reshape(self.total, self.dim)

    def position_of(self, k: MultiIndex) -> int:
        """Graded position of multi-index k."""
        return self._positions[tuple(k)]

    @cached_property
    def _positions(self):
        return {k: i for i, k in enumerate(self.index_order)}

    def lex_positions(self, size: int) -> NDArray[np.int64]:
        """Flat positions of the graded indices inside a (size,)*dim lexicographic grid."""
        if size < self.per_axis:
            raise InvalidArgumentError(f'grid size {size} smaller than truncation {self.per_axis}')
        return np.ravel_multi_index(self._index_array.T, (size,) * self.dim)

    @property
    def complete_count(self) -> int:
        """Number of basis functions with total degree <= per_axis - 1."""
        return math.comb(self.per_axis - 1 + self.dim, self.dim)

    def to_dict(self):
        return {'dim': self.dim, 'per_axis': self.per_axis}


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """Dense matrix of an operator on a truncation (graded index order)."""

    trunc: BasisTruncation
    entries: NDArray[np.complex128]
    pad: int
    source: Optional[ShubinOperator] = None
    truncation_loss: float = 0.0

    @property
    def shape(self):
        return self.entries.shape


@lru_cache(maxsize=64)
def _axis_ladder(kind: str, size: int) -> sp.csr_matrix:
    """One-variable x ('x'), d/dx ('partial') or D = -i d/dx ('D') on h_0..h_{size-1}."""
    off = np.sqrt(np.arange(1, size, dtype=float) / 2.0)
    if kind == 'x':
        return sp.diags([off, off], [-1, 1], shape=(size, size), format='csr', dtype=complex)
    partial = sp.diags([-off, off], [-1, 1], shape=(size, size), format='csr', dtype=complex)
    if kind == 'partial':
        return partial
    if kind == 'D':
        return (-1j * partial).tocsr()
    raise InvalidArgumentError(f'unknown ladder kind {kind!r}')


@lru_cache(maxsize=512)
def _axis_factor(size: int, x_power: int, d_power: int) -> sp.csr_matrix:
    """x^b D^a on one axis, truncated at ``size``."""
    result = sp.identity(size, dtype=complex, format='csr')
    x = _axis_ladder('x', size)
    d = _axis_ladder('D', size)
    for _ in range(x_power):
        result = result @ x
    for _ in range(d_power):
        result = result @ d
    return result.tocsr()


@lru_cache(maxsize=512)
def _axis_factor_dense(size: int, x_power: int, partial_power: int) -> NDArray[np.complex128]:
    """x^b (d/dx)^a on one axis as a dense array."""
    result = sp.identity(size, dtype=complex, format='csr')
    for _ in range(x_power):
        result = result @ _axis_ladder('x', size)
    for _ in range(partial_power):
        result = result @ _axis_ladder('partial', size)
    return result.toarray()


def padded_operator(p: ShubinOperator, size: int) -> sp.csr_matrix:
    """Sparse matrix of p on the lexicographic grid (size,)*dim."""
    if size ** p.dim > MAX_PADDED_TOTAL:
        raise InvalidArgumentError(
            f'padded grid {size}^{p.dim} exceeds padding budget {MAX_PADDED_TOTAL}'
        )
    total = size ** p.dim
    acc = sp.csr_matrix((total, total), dtype=complex)
    for (beta, alpha), c in p.terms.items():
        term = None
        for b, a in zip(beta, alpha):
            f = _axis_factor(size, b, a)
            term = f if term is None else sp.kron(term, f, format='csr')
        acc = acc + c * term
    return acc.tocsr()


def ladder_matrix(axis: int, kind: str, trunc: BasisTruncation) -> OperatorMatrix:
    """Position ('x') or momentum ('D') on one axis of the truncation.

    The coupling of h_{N-1} to h_N falls outside the truncation and is recorded
    as ``truncation_loss``.
    """
    if kind not in ('x', 'D'):
        raise InvalidArgumentError(f"ladder kind must be 'x' or 'D' (got {kind!r})")
    source = position(axis, trunc.dim) if kind == 'x' else derivative(axis, trunc.dim)
    idx = trunc.lex_positions(trunc.per_axis)
    full = padded_operator(source, trunc.per_axis)
    entries = full[idx][:, idx].toarray()
    return OperatorMatrix(trunc, entries, pad=0, source=source,
                          truncation_loss=math.sqrt(trunc.per_axis / 2.0))


def operator_matrix(p: ShubinOperator, trunc: BasisTruncation,
                    pad: Optional[int] = None) -> OperatorMatrix:
    """Assemble p at per-axis size N + pad and crop to the truncation.

    With pad >= order(p) the cropped block equals the Galerkin matrix
    <h_j, P h_k> exactly.
    """
    if p.dim != trunc.dim:
        raise InvalidArgumentError(f'operator dim {p.dim} != truncation dim {trunc.dim}')
    if pad is None:
        pad = p.order
    if pad < 0:
        raise InvalidArgumentError('pad must be non-negative')
    if pad < p.order:
        logger.warning('pad %d < operator order %d; top-degree entries are inexact', pad, p.order)
    size = trunc.per_axis + pad
    full = padded_operator(p, size)
    idx = trunc.lex_positions(size)
    entries = full[idx][:, idx].toarray()
    logger.debug('assembled %dx%d operator matrix (padded size %d)', *entries.shape, size)
    return OperatorMatrix(trunc, entries, pad=pad, source=p)


def embed(u, trunc: BasisTruncation, size: int) -> NDArray[np.complex128]:
    """Place a graded coefficient vector into a flat (size,)*dim lexicographic grid."""
    u = np.asarray(u, dtype=complex).ravel()
    if u.size != trunc.total:
        raise InvalidArgumentError(f'coefficient vector has {u.size} entries, expected {trunc.total}')
    out = np.zeros(size ** trunc.dim, dtype=complex)
    out[trunc.lex_positions(size)] = u
    return out


def crop(v, trunc: BasisTruncation, size: int) -> NDArray[np.complex128]:
    return np.asarray(v)[trunc.lex_positions(size)]


def apply_padded(p: ShubinOperator, u, trunc: BasisTruncation,
                 pad: Optional[int] = None) -> NDArray[np.complex128]:
    """p applied to u on a grid large enough to hold the result exactly.

    Returns the flat lexicographic vector on the (N + pad)^dim grid.
    """
    if pad is None:
        pad = p.order
    if pad < p.order:
        raise InvalidArgumentError(f'pad {pad} below operator order {p.order}')
    size = trunc.per_axis + pad
    return padded_operator(p, size) @ embed(u, trunc, size)


def derivative_monomial(beta: MultiIndex, alpha: MultiIndex) -> ShubinOperator:
    """x^beta d^alpha written in D-form (d = iD)."""
    return monomial(tuple(beta), tuple(alpha), 1j ** sum(alpha))


def monomial_norms(u, trunc: BasisTruncation, s_cap: int):
    """||x^beta d^alpha u|| for every pair with |alpha| + |beta| <= s_cap.

    Returns a dict keyed by (alpha, beta). Each value is computed on the padded
    grid, so it is exact for u supported on the truncation.
    """
    if s_cap < 0:
        raise InvalidArgumentError('s_cap must be non-negative')
    size = trunc.per_axis + s_cap
    if size ** trunc.dim > MAX_PADDED_TOTAL:
        raise InvalidArgumentError(f'seminorm order {s_cap} exceeds the padding budget')
    dim = trunc.dim
    v = embed(u, trunc, size).reshape((size,) * dim)
    out = {}
    for s in range(s_cap + 1):
        for split in range(s + 1):
            for alpha in multi_indices_of_order(dim, split):
                for beta in multi_indices_of_order(dim, s - split):
                    w = v
                    for axis in range(dim):
                        if beta[axis] == 0 and alpha[axis] == 0:
                            continue
                        f = _axis_factor_dense(size, beta[axis], alpha[axis])
                        w = np.moveaxis(np.tensordot(f, w, axes=([1], [axis])), 0, axis)
                    out[(alpha, beta)] = float(np.linalg.norm(w))
    return out


def hermite_functions(count: int, x, log_weight=None) -> NDArray[np.float64]:
    """Values h_0..h_{count-1} at points x, shape (count, len(x)).

    Uses h_{k+1} = x sqrt(2/(k+1)) h_k - sqrt(k/(k+1)) h_{k-1} with the Gaussian
    factor kept in a per-point log scale, so nothing overflows or underflows
    prematurely. ``log_weight`` is added to that log scale (quadrature folding).
    """
    x = np.asarray(x, dtype=float).ravel()
    if count < 0:
        raise InvalidArgumentError('count must be non-negative')
    out = np.zeros((count, x.size))
    log_scale = -0.5 * x * x - _LOG_PI_QUARTER
    if log_weight is not None:
        log_scale = log_scale + np.asarray(log_weight, dtype=float).ravel()
    prev = np.zeros_like(x)
    cur = np.ones_like(x)
    with np.errstate(divide='ignore', over='ignore', under='ignore'):
        for k in range(count):
            out[k] = np.sign(cur) * np.exp(np.log(np.abs(cur)) + log_scale)
            nxt = x * math.sqrt(2.0 / (k + 1)) * cur - math.sqrt(k / (k + 1.0)) * prev
            prev, cur = cur, nxt
            big = np.abs(cur) > _RESCALE_AT
            if big.any():
                shift = np.log(np.abs(cur[big]))
                cur[big] /= np.abs(cur[big])
                prev[big] /= np.exp(shift)
                log_scale[big] += shift
    return out


def hermite_eval(k: int, x) -> Union[float, NDArray[np.float64]]:
    """Normalized Hermite function h_k at x (scalar or array)."""
    if k < 0:
        raise InvalidArgumentError(f'Hermite index must be non-negative (got {k})')
    scalar = np.ndim(x) == 0
    values = hermite_functions(k + 1, np.atleast_1d(x))[k]
    return float(values[0]) if scalar else values.reshape(np.shape(x))


@lru_cache(maxsize=16)
def gauss_hermite_rule(quad_order: int):
    """Nodes and log-weights of the Gauss-Hermite rule for weight e^{-x^2}."""
    nodes, weights = roots_hermite(quad_order)
    with np.errstate(divide='ignore'):
        log_w = np.log(weights)
    return nodes, log_w


def quadrature_grid(dim: int, quad_order: int) -> NDArray[np.float64]:
    """Tensor quadrature nodes as points of shape (quad_order**dim, dim), lexicographic."""
    nodes, _ = gauss_hermite_rule(quad_order)
    mesh = np.meshgrid(*([nodes] * dim), indexing='ij')
    return np.stack([m.ravel() for m in mesh], axis=1)


FunctionInput = Union[Callable[[NDArray[np.float64]], NDArray], NDArray]


def hermite_transform(f: FunctionInput, trunc: BasisTruncation,
                      quad_order: int) -> NDArray[np.complex128]:
    """Coefficients c_k = <f, h_k> by tensor Gauss-Hermite quadrature.

    ``f`` is either a callable taking points of shape (M, dim) or the sampled
    values on ``quadrature_grid(dim, quad_order)``. The weights are folded
    with the Gaussian factor in log space.
    """
    n_ax = trunc.per_axis
    if quad_order < n_ax + QUADRATURE_MARGIN:
        raise InvalidArgumentError(
            f'quad_order {quad_order} must be at least per_axis + {QUADRATURE_MARGIN}'
        )
    dim = trunc.dim
    if callable(f):
        values = np.asarray(f(quadrature_grid(dim, quad_order)), dtype=complex)
    else:
        values = np.asarray(f, dtype=complex)
    if values.size != quad_order ** dim:
        raise InvalidInputError(
            f'expected {quad_order ** dim} samples on the quadrature grid, got {values.size}'
        )
    if not np.all(np.isfinite(values)):
        raise InvalidInputError('function samples contain non-finite values')
    nodes, log_w = gauss_hermite_rule(quad_order)
    phi = hermite_functions(n_ax, nodes, log_weight=log_w + nodes * nodes)
    coeffs = values.reshape((quad_order,) * dim)
    for axis in range(dim):
        coeffs = np.moveaxis(np.tensordot(phi, coeffs, axes=([1], [axis])), 0, axis)
    return coeffs.ravel()[trunc.lex_positions(n_ax)]


def synthesize(c, trunc: BasisTruncation, points) -> NDArray[np.complex128]:
    """Evaluate sum_k c_k h_k at points of shape (M, dim) (or (M,) in one variable)."""
    c = np.asarray(c, dtype=complex).ravel()
    if c.size != trunc.total:
        raise InvalidArgumentError(f'coefficient vector has {c.size} entries, expected {trunc.total}')
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.shape[1] != trunc.dim:
        raise InvalidArgumentError(f'points must have {trunc.dim} columns')
    order = trunc._index_array
    prod = np.ones((trunc.total, pts.shape[0]))
    for axis in range(trunc.dim):
        h = hermite_functions(trunc.per_axis, pts[:, axis])
        prod *= h[order[:, axis]]
    return c @ prod


def _gaussian(scale):
    def f(points):
        return np.exp(-scale * np.sum(np.asarray(points) ** 2, axis=1))
    return f


def named_function(name: str, dim: int = 1, k: int = 0) -> Callable[[NDArray[np.float64]], NDArray]:
    """Built-in test functions on R^dim.

    gaussian        e^{-|x|^2/2}
    gaussian_narrow e^{-|x|^2}
    gaussian_wide   e^{-|x|^2/8}
    hermite_k       h_k(x_1) h_0(x_2) ... h_0(x_dim)
    gevrey_bump     e^{-sqrt(1 + |x|^2)}
    """
    if name == 'gaussian':
        return _gaussian(0.5)
    if name == 'gaussian_narrow':
        return _gaussian(1.0)
    if name == 'gaussian_wide':
        return _gaussian(0.125)
    if name == 'hermite_k':
        if k < 0:
            raise InvalidArgumentError('hermite_k needs k >= 0')

        def hk(points):
            pts = np.asarray(points, dtype=float)
            vals = hermite_functions(k + 1, pts[:, 0])[k]
            for axis in range(1, pts.shape[1]):
                vals = vals * hermite_functions(1, pts[:, axis])[0]
            return vals
        return hk
    if name == 'gevrey_bump':
        def bump(points):
            return np.exp(-np.sqrt(1.0 + np.sum(np.asarray(points) ** 2, axis=1)))
        return bump
    raise InvalidArgumentError(f'unknown test function {name!r}')


NAMED_FUNCTIONS = ('gaussian', 'gaussian_narrow', 'gaussian_wide', 'hermite_k', 'gevrey_bump')

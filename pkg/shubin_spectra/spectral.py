"""Spectral decomposition of operator matrices, Weyl fits and eigenfunction bounds."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
import scipy.linalg
from numpy.typing import NDArray

from .config import resolve_threads
from .errors import InvalidArgumentError, NotNormalError, ResourceLimitError
from .hermite import (
    BasisTruncation,
    OperatorMatrix,
    apply_padded,
    derivative_monomial,
    monomial_norms,
    operator_matrix,
)
from .operators import ShubinOperator, factorial_of, monomial

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-8
TRUST_FRACTION = 0.75
SEMINORM_CAP = 16
WEYL_MIN_POINTS = 20


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """Eigenpairs sorted by |lambda|, then argument, then original index.

    Only the first ``trusted`` pairs are certified: their residuals are below
    ``tol * norm`` and they lie outside the top quarter of the complete-degree
    part of the truncation.
    """

    eigenvalues: NDArray[np.complex128]
    vectors: NDArray[np.complex128]
    residuals: NDArray[np.float64]
    trusted: int
    norm: float
    tol: float
    trunc: BasisTruncation
    selfadjoint: bool
    clusters: int = 0

    def summary(self):
        return {
            'count': int(self.eigenvalues.size),
            'trusted': self.trusted,
            'norm': self.norm,
            'tol': self.tol,
            'selfadjoint': self.selfadjoint,
            'degenerate_clusters': self.clusters,
            'max_trusted_residual': float(np.max(self.residuals[: self.trusted]))
            if self.trusted else 0.0,
        }


def _spectral_order(lam, tie_tol):
    """Sort by modulus; moduli within tie_tol count as equal and sort by argument, then index."""
    mod = np.abs(lam)
    first = np.argsort(mod, kind='stable')
    order: List[int] = []
    group = [int(first[0])] if first.size else []
    for i in first[1:]:
        if mod[i] - mod[group[0]] <= tie_tol:
            group.append(int(i))
        else:
            order.extend(sorted(group, key=lambda k: (round(float(np.angle(lam[k])), 9), k)))
            group = [int(i)]
    order.extend(sorted(group, key=lambda k: (round(float(np.angle(lam[k])), 9), k)))
    return np.array(order, dtype=np.int64)


def _clusters(lam, tie_tol):
    out = []
    start = 0
    for i in range(1, lam.size + 1):
        if i == lam.size or abs(lam[i] - lam[start]) > tie_tol:
            if i - start > 1:
                out.append((start, i))
            start = i
    return out


def _position_gram_operator(dim: int) -> ShubinOperator:
    # sum_a sqrt(a+1) x_a^2 separates every state of a degenerate oscillator shell
    zero = (0,) * dim
    op = None
    for a in range(dim):
        two = tuple(2 if j == a else 0 for j in range(dim))
        term = monomial(two, zero, math.sqrt(a + 1))
        op = term if op is None else op + term
    return op


def _fix_phases(vectors):
    for j in range(vectors.shape[1]):
        col = vectors[:, j]
        mags = np.abs(col)
        top = float(mags.max())
        if top == 0.0:
            continue
        k = int(np.argmax(mags >= (1 - 1e-8) * top))
        vectors[:, j] = col * (np.conj(col[k]) / abs(col[k]))
    return vectors


def decompose(a: OperatorMatrix, selfadjoint: bool = False, tol: float = DEFAULT_TOL,
              trust_fraction: float = TRUST_FRACTION,
              normal_tol: Optional[float] = None) -> SpectralDecomposition:
    """Orthonormal eigenbasis of an operator matrix.

    The self-adjoint path uses a Hermitian eigensolver. Otherwise a complex
    Schur form is computed and the matrix is rejected when the strictly upper
    part of the Schur factor carries more than ``normal_tol`` of its
    Frobenius mass.

    Raises:
        InvalidArgumentError: selfadjoint requested for a non-Hermitian matrix
        NotNormalError: the matrix is not normal within tolerance
    """
    A = np.asarray(a.entries, dtype=complex)
    trunc = a.trunc
    if not 0 < trust_fraction <= 1:
        raise InvalidArgumentError('trust_fraction must lie in (0, 1]')
    if selfadjoint:
        herm_err = float(np.max(np.abs(A - A.conj().T))) if A.size else 0.0
        if herm_err > tol * max(1.0, float(np.max(np.abs(A)))):
            raise InvalidArgumentError(f'matrix is not Hermitian (error {herm_err:.3e})')
        evals, vectors = scipy.linalg.eigh(0.5 * (A + A.conj().T))
        lam = evals.astype(complex)
    else:
        T, vectors = scipy.linalg.schur(A, output='complex')
        lam = np.diag(T).copy()
        total = float(np.linalg.norm(T))
        off = float(np.linalg.norm(np.triu(T, 1)))
        departure = off / total if total else 0.0
        if normal_tol is None:
            order = a.source.order if a.source is not None else 0
            normal_tol = max(tol, order / trunc.per_axis)
        if departure > normal_tol:
            raise NotNormalError(departure, f'matrix is not normal (Schur departure {departure:.3e})')
    norm = float(np.max(np.abs(lam))) if lam.size else 0.0
    scale = max(norm, 1.0)
    tie_tol = tol * scale

    order = _spectral_order(lam, tie_tol)
    lam = lam[order]
    vectors = np.array(vectors[:, order], dtype=complex)

    groups = _clusters(lam, tie_tol)
    if groups:
        gram_matrix = operator_matrix(_position_gram_operator(trunc.dim), trunc).entries
        for start, stop in groups:
            block = vectors[:, start:stop]
            g = block.conj().T @ gram_matrix @ block
            _, rot = scipy.linalg.eigh(0.5 * (g + g.conj().T))
            block = block @ rot
            vectors[:, start:stop] = block
            rayleigh = np.einsum('ij,ij->j', block.conj(), A @ block)
            lam[start:stop] = rayleigh.real if selfadjoint else rayleigh
        logger.debug('canonicalized %d degenerate eigenspaces', len(groups))
    vectors = _fix_phases(vectors)

    residuals = np.linalg.norm(A @ vectors - vectors * lam[None, :], axis=0)
    passing = residuals <= tol * scale
    prefix = int(np.argmin(passing)) if not passing.all() else int(passing.size)
    cap = int(math.floor(trust_fraction * min(trunc.complete_count, lam.size)))
    trusted = min(prefix, cap)
    logger.debug('spectrum: %d eigenpairs, %d trusted (residual prefix %d, cap %d)',
                 lam.size, trusted, prefix, cap)
    return SpectralDecomposition(
        eigenvalues=lam,
        vectors=vectors,
        residuals=residuals,
        trusted=trusted,
        norm=norm,
        tol=tol,
        trunc=trunc,
        selfadjoint=selfadjoint,
        clusters=len(groups),
    )


@dataclass(frozen=True)
class WeylFit:
    """Least-squares fit of log|lambda_j| against log j over trusted indices."""

    B: float
    exponent: float
    B_free: float
    r_squared: float
    expected_exponent: float
    j_min: int
    j_max: int
    m: int
    n: int

    def to_dict(self):
        return dict(self.__dict__)


def weyl_fit(s: SpectralDecomposition, m: int, n: int, j_min: int = 20,
             j_max: Optional[int] = None) -> WeylFit:
    """Fit |lambda_j| ~ B j^{m/(2n)}.

    ``exponent`` and ``B_free`` come from a free two-parameter fit; ``B`` is the
    constant at the exponent m/(2n).

    Raises:
        ResourceLimitError: fewer than 20 trusted indices above j_min
    """
    if m < 1 or n < 1:
        raise InvalidArgumentError('m and n must be positive')
    hi = s.trusted if j_max is None else min(j_max, s.trusted)
    if j_min < 1 or hi - j_min < WEYL_MIN_POINTS:
        raise ResourceLimitError(
            f'Weyl fit needs at least {WEYL_MIN_POINTS} trusted indices above j_min={j_min} '
            f'(trusted up to {s.trusted})'
        )
    j = np.arange(j_min, hi + 1, dtype=float)
    lam = np.abs(s.eigenvalues[j_min - 1:hi])
    keep = lam > 0
    x, y = np.log(j[keep]), np.log(lam[keep])
    slope, intercept = np.polyfit(x, y, 1)
    fitted = intercept + slope * x
    ss_res = float(np.sum((y - fitted) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r_squared = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    expected = m / (2.0 * n)
    b_fixed = math.exp(float(np.mean(y - expected * x)))
    return WeylFit(
        B=b_fixed,
        exponent=float(slope),
        B_free=math.exp(float(intercept)),
        r_squared=r_squared,
        expected_exponent=expected,
        j_min=j_min,
        j_max=hi,
        m=m,
        n=n,
    )


def coeff_seminorm(u, alpha, beta, trunc: BasisTruncation, cap: int = SEMINORM_CAP) -> float:
    """||x^beta d^alpha u||_{L^2} computed on the padded truncation."""
    alpha, beta = tuple(alpha), tuple(beta)
    order = sum(alpha) + sum(beta)
    if order > cap:
        raise InvalidArgumentError(f'|alpha|+|beta| = {order} exceeds the seminorm cap {cap}')
    v = apply_padded(derivative_monomial(beta, alpha), u, trunc, pad=order)
    return float(np.linalg.norm(v))


def sobolev_seminorm(u, s: int, trunc: BasisTruncation, cap: int = SEMINORM_CAP) -> float:
    """|u|_s = sum over |alpha|+|beta| = s of ||x^beta d^alpha u||."""
    if s < 0 or s > cap:
        raise InvalidArgumentError(f'seminorm order must lie in [0, {cap}] (got {s})')
    norms = monomial_norms(u, trunc, s)
    return float(sum(v for (a, b), v in norms.items() if sum(a) + sum(b) == s))


@dataclass(frozen=True)
class EigenBoundFit:
    """Witness l with ||x^beta d^alpha u_j|| <= l^s j^{(m+s)/(2n)} (alpha! beta!)^{1/2}."""

    ell: float
    per_j: List[float] = field(default_factory=list)
    running_max: List[float] = field(default_factory=list)
    top_decade_variation: float = 0.0
    cap: int = 0

    def to_dict(self):
        return {
            'ell': self.ell,
            'per_j': list(self.per_j),
            'top_decade_variation': self.top_decade_variation,
            'cap': self.cap,
        }


def _eigen_norm_tables(s: SpectralDecomposition, cap: int, count: int, threads: Optional[int]):
    columns = [s.vectors[:, j] for j in range(count)]
    with ThreadPoolExecutor(max_workers=resolve_threads(threads)) as pool:
        return list(pool.map(lambda u: monomial_norms(u, s.trunc, cap), columns))


def eigen_bound_fit(s: SpectralDecomposition, weyl: WeylFit, cap: int, j_max: int = 100,
                    threads: Optional[int] = None) -> EigenBoundFit:
    """Smallest l making every trusted eigenvector obey the normalized derivative bound."""
    if cap < 0 or cap > SEMINORM_CAP:
        raise InvalidArgumentError(f'cap must lie in [0, {SEMINORM_CAP}]')
    count = min(s.trusted, j_max)
    if count < 1:
        raise ResourceLimitError('no trusted eigenpairs')
    if cap == 0:
        return EigenBoundFit(ell=0.0, per_j=[0.0] * count, running_max=[0.0] * count, cap=0)
    tables = _eigen_norm_tables(s, cap, count, threads)
    m, n = weyl.m, weyl.n
    per_j = []
    for j, table in enumerate(tables, start=1):
        best = 0.0
        for (alpha, beta), value in table.items():
            order = sum(alpha) + sum(beta)
            if order == 0 or value == 0.0:
                continue
            denom = j ** ((m + order) / (2.0 * n)) * math.sqrt(factorial_of(alpha) * factorial_of(beta))
            best = max(best, (value / denom) ** (1.0 / order))
        per_j.append(best)
    running = np.maximum.accumulate(np.array(per_j))
    low = running[max(int(math.ceil(count / 10)) - 1, 0)]
    variation = float((running[-1] - low) / running[-1]) if running[-1] > 0 else 0.0
    return EigenBoundFit(
        ell=float(running[-1]),
        per_j=per_j,
        running_max=[float(v) for v in running],
        top_decade_variation=variation,
        cap=cap,
    )


@dataclass(frozen=True)
class EigenConstants:
    """Constants with ||x^beta d^alpha u|| <= L2 |lam| (L1 |lam|^{1/m})^s (alpha! beta!)^{1/2}."""

    L1: float
    L2: float
    pairs_checked: int

    def to_dict(self):
        return dict(self.__dict__)


def eigen_constants_fit(s: SpectralDecomposition, m: int, cap: int, j_max: int = 100,
                        threads: Optional[int] = None) -> EigenConstants:
    """Fit L1, L2 over the trusted eigenpairs; kernel vectors use L1^s (alpha! beta!)^{1/2}."""
    if m < 1:
        raise InvalidArgumentError('m must be positive')
    if cap < 1 or cap > SEMINORM_CAP:
        raise InvalidArgumentError(f'cap must lie in [1, {SEMINORM_CAP}]')
    count = min(s.trusted, j_max)
    if count < 1:
        raise ResourceLimitError('no trusted eigenpairs')
    mods = np.abs(s.eigenvalues[:count])
    nonzero = mods[mods > s.tol * max(s.norm, 1.0)]
    l2 = float(np.max(1.0 / nonzero)) if nonzero.size else 1.0
    tables = _eigen_norm_tables(s, cap, count, threads)
    l1 = 0.0
    checked = 0
    for lam, table in zip(mods, tables):
        kernel = lam <= s.tol * max(s.norm, 1.0)
        for (alpha, beta), value in table.items():
            order = sum(alpha) + sum(beta)
            if order == 0:
                continue
            checked += 1
            fact = math.sqrt(factorial_of(alpha) * factorial_of(beta))
            if kernel:
                l1 = max(l1, (value / fact) ** (1.0 / order))
            else:
                base = (value / (l2 * lam * fact)) ** (1.0 / order)
                l1 = max(l1, base / lam ** (1.0 / m))
    return EigenConstants(L1=l1, L2=l2, pairs_checked=checked)

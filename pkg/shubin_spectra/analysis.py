"""Eigenfunction expansions and Gelfand-Shilov decay analysis.

The classifier and the norm families all reduce to one question about a finite
profile (log-domain values indexed by j, p or s): is the supremum attained well
inside the computed range? Profiles whose last quarter still reaches the
maximum are treated as unbounded, and any evaluation of the associated function
that hits the end of the weight range marks the result as saturated.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
from numpy.typing import NDArray
from scipy.special import gammaln, logsumexp

from .config import DEFAULT_LAMBDA_GRID
from .errors import InvalidArgumentError, NotInDualError, UnsolvableError
from .hermite import BasisTruncation, OperatorMatrix, embed, monomial_norms, padded_operator
from .operators import ShubinOperator
from .spectral import SEMINORM_CAP, SpectralDecomposition
from .weights import (
    AssociatedFunction,
    ConditionReport,
    WeightSequence,
    check_conditions,
    eval_associated_many,
    tail_is_bounded,
)

logger = logging.getLogger(__name__)

NOISE_FLOOR = 1e-13
KERNEL_COEFF_TOL = 1e-12
DUAL_TAIL_FACTOR = 4


def _safe_exp(value: float) -> float:
    if value > 709.0:
        return math.inf
    return math.exp(value)


@dataclass(frozen=True, eq=False)
class ExpansionCoefficients:
    """Coefficients a_j = (f, u_j) indexed by eigen-index j = 1..J."""

    a: NDArray[np.complex128]
    source: str = ''
    dropped_mass: float = 0.0

    def __post_init__(self):
        arr = np.asarray(self.a, dtype=complex).ravel()
        if not np.all(np.isfinite(arr)):
            raise InvalidArgumentError('expansion coefficients contain non-finite values')
        object.__setattr__(self, 'a', arr)

    def __len__(self):
        return int(self.a.size)


def expand(f_coeffs, s: SpectralDecomposition, source: str = '') -> ExpansionCoefficients:
    """Project Hermite coefficients of f onto the trusted eigenvectors."""
    f = np.asarray(f_coeffs, dtype=complex).ravel()
    if f.size != s.vectors.shape[0]:
        raise InvalidArgumentError(
            f'coefficient vector has {f.size} entries, basis has {s.vectors.shape[0]}'
        )
    a = s.vectors[:, : s.trusted].conj().T @ f
    return ExpansionCoefficients(a, source=source)


@dataclass(frozen=True)
class LambdaRow:
    lam: float
    log_s: float
    log_s_max: float
    argmax_j: int
    passed: bool
    saturated: bool
    effective: int

    @property
    def s_value(self) -> float:
        return _safe_exp(self.log_s)

    def to_dict(self):
        return {
            'lambda': self.lam,
            'log_S': self.log_s,
            'S': self.s_value,
            'log_S_max': self.log_s_max,
            'argmax_j': self.argmax_j,
            'passed': self.passed,
            'saturated': self.saturated,
            'effective': self.effective,
        }


@dataclass(frozen=True)
class DecayFit:
    """Per-lambda suprema S(lambda) = sup_j |a_j| e^{M(lambda j^{1/(2n)})} and the verdicts."""

    lambda_star: float
    log_c_star: float
    verdict_roumieu: bool
    verdict_beurling: bool
    per_lambda: List[LambdaRow] = field(default_factory=list)
    j_range: int = 0
    noise_floor: float = NOISE_FLOOR
    floored_count: int = 0

    @property
    def c_star(self) -> float:
        return _safe_exp(self.log_c_star)

    def to_dict(self):
        return {
            'lambda_star': self.lambda_star,
            'log_c_star': self.log_c_star,
            'c_star': self.c_star,
            'verdict_roumieu': self.verdict_roumieu,
            'verdict_beurling': self.verdict_beurling,
            'j_range': self.j_range,
            'noise_floor': self.noise_floor,
            'floored_count': self.floored_count,
            'per_lambda': [row.to_dict() for row in self.per_lambda],
        }


def classify_decay(a: ExpansionCoefficients, w: WeightSequence, n: int,
                   lambda_grid: Optional[Sequence[float]] = None,
                   noise_floor: float = NOISE_FLOOR) -> DecayFit:
    """Decide Roumieu/Beurling membership of f from its eigen-coefficients.

    Coefficients below ``noise_floor`` times the largest one are treated as
    zero. For each lambda the profile log|a_j| + M(lambda j^{1/(2n)}) must peak
    strictly before its last quarter and must not touch the end of the weight
    range. Roumieu holds if some grid lambda passes, Beurling if all do.
    """
    if n < 1:
        raise InvalidArgumentError('n must be positive')
    grid = sorted(float(v) for v in (DEFAULT_LAMBDA_GRID if lambda_grid is None else lambda_grid))
    if not grid or grid[0] <= 0:
        raise InvalidArgumentError('lambda grid must contain positive values')
    mags = np.abs(a.a)
    if mags.size == 0:
        raise InvalidArgumentError('no coefficients to classify')
    peak = float(mags.max())
    assoc = AssociatedFunction(w)
    rows: List[LambdaRow] = []
    floored = 0
    if peak == 0.0:
        rows = [LambdaRow(lam, -math.inf, -math.inf, 0, True, False, 0) for lam in grid]
    else:
        kept = mags > noise_floor * peak
        floored = int(np.count_nonzero(~kept & (mags > 0)))
        if floored:
            logger.info('%d coefficients below the noise floor %g are treated as zero',
                        floored, noise_floor)
        eff = np.nonzero(kept)[0]
        j = (eff + 1).astype(float)
        log_mag = np.log(mags[eff])
        t = j ** (1.0 / (2 * n))
        running = -math.inf
        for lam in grid:
            values, _, sat = eval_associated_many(assoc, lam * t)
            profile = log_mag + values
            k = int(np.argmax(profile))
            saturated = bool(sat.any())
            passed = (not saturated) and tail_is_bounded(profile, strict=True)
            log_s = float(profile[k])
            running = max(running, log_s)
            rows.append(LambdaRow(lam, log_s, running, int(eff[k]) + 1, passed, saturated,
                                  int(eff.size)))
            if saturated:
                logger.debug('lambda=%g saturates the weight range (p_max=%d)', lam, w.p_max)
    passing = [row for row in rows if row.passed]
    lambda_star = max((row.lam for row in passing), default=0.0)
    log_c_star = next((row.log_s_max for row in rows if row.lam == lambda_star), -math.inf)
    return DecayFit(
        lambda_star=lambda_star,
        log_c_star=log_c_star if passing else -math.inf,
        verdict_roumieu=bool(passing),
        verdict_beurling=len(passing) == len(rows),
        per_lambda=rows,
        j_range=int(mags.size),
        noise_floor=noise_floor,
        floored_count=floored,
    )


@dataclass
class NormRow:
    h: float
    norm_h: Optional[float] = None
    norm_h_order: Optional[int] = None
    norm_h_saturated: Optional[bool] = None
    norm_prime: Optional[float] = None
    norm_prime_order: Optional[int] = None
    norm_prime_saturated: Optional[bool] = None
    norm_p: Optional[float] = None
    norm_p_power: Optional[int] = None
    norm_p_saturated: Optional[bool] = None

    def to_dict(self):
        return dict(self.__dict__)


@dataclass
class NormTable:
    """The three norm families on a shared h grid; columns not computed stay None."""

    rows: List[NormRow]
    iterate_norms: List[float] = field(default_factory=list)
    sobolev: List[float] = field(default_factory=list)
    sigma: Dict[float, List[float]] = field(default_factory=dict)

    def finite_somewhere(self, column: str) -> bool:
        """True if some row has a finite, unsaturated value in ``column``."""
        for row in self.rows:
            value = getattr(row, column)
            saturated = getattr(row, f'{column}_saturated')
            if value is not None and math.isfinite(value) and saturated is False:
                return True
        return False

    def merge(self, other: 'NormTable') -> 'NormTable':
        by_h = {row.h: row for row in self.rows}
        for row in other.rows:
            base = by_h.setdefault(row.h, NormRow(row.h))
            for key, value in row.__dict__.items():
                if key != 'h' and value is not None:
                    setattr(base, key, value)
        return NormTable(
            rows=[by_h[h] for h in sorted(by_h)],
            iterate_norms=self.iterate_norms or other.iterate_norms,
            sobolev=self.sobolev or other.sobolev,
            sigma=self.sigma or other.sigma,
        )

    def to_dict(self):
        return {
            'rows': [row.to_dict() for row in self.rows],
            'iterate_norms': list(self.iterate_norms),
            'sobolev': list(self.sobolev),
            'sigma': {str(h): values for h, values in self.sigma.items()},
        }


def _check_grid(h_grid):
    grid = sorted(float(h) for h in h_grid)
    if not grid or grid[0] <= 0:
        raise InvalidArgumentError('h grid must contain positive values')
    return grid


def _sup_profile(log_values, orders, log_h, log_m_at):
    """Argmax of log_values - order log h - log M_order; returns (value, index)."""
    profile = np.asarray(log_values) - np.asarray(orders) * log_h - np.asarray(log_m_at)
    k = int(np.argmax(profile))
    return float(profile[k]), k


def _log(values):
    with np.errstate(divide='ignore'):
        return np.log(np.asarray(values, dtype=float))


def iterate_norms(p_mat: OperatorMatrix, f, w: WeightSequence, m: int,
                  h_grid: Sequence[float], p_cap: int,
                  s_cap: Optional[int] = None) -> NormTable:
    """||f||_{P,h} = sup_p ||P^p f|| / (h^{mp} M_{mp}) for p <= p_cap.

    P^p f is built by repeated application on a grid padded by p_cap * m, so
    every iterate is exact for f supported on the truncation. With ``s_cap``
    the sigma table |f|_{mp} / (h^{mp} M_{mp}) is added for mp <= s_cap.
    """
    grid = _check_grid(h_grid)
    if m < 1 or p_cap < 0:
        raise InvalidArgumentError('m must be positive and p_cap non-negative')
    if p_cap * m > w.p_max:
        raise InvalidArgumentError(f'p_cap*m = {p_cap * m} exceeds p_max = {w.p_max}')
    if p_mat.source is None:
        raise InvalidArgumentError('iterate norms need the operator behind the matrix')
    trunc = p_mat.trunc
    size = trunc.per_axis + p_cap * m
    op = padded_operator(p_mat.source, size)
    v = embed(f, trunc, size)
    norms = [float(np.linalg.norm(v))]
    for _ in range(p_cap):
        v = op @ v
        norms.append(float(np.linalg.norm(v)))
    powers = np.arange(p_cap + 1)
    log_norms = _log(norms)
    log_m_at = w.log_m[powers * m]

    sobolev: List[float] = []
    sigma: Dict[float, List[float]] = {}
    if s_cap is not None:
        sobolev = _sobolev_all(f, trunc, s_cap)

    rows = []
    for h in grid:
        value, k = _sup_profile(log_norms, powers * m, math.log(h), log_m_at)
        rows.append(NormRow(h, norm_p=_safe_exp(value), norm_p_power=k,
                            norm_p_saturated=bool(k == p_cap and p_cap > 0)))
        if sobolev:
            sigma[h] = [
                _safe_exp(math.log(sobolev[p * m]) - p * m * math.log(h) - w.log_m[p * m])
                if sobolev[p * m] > 0 else 0.0
                for p in range(p_cap + 1) if p * m <= s_cap
            ]
    return NormTable(rows=rows, iterate_norms=norms, sobolev=sobolev, sigma=sigma)


def _sobolev_all(f, trunc: BasisTruncation, s_cap: int) -> List[float]:
    if s_cap < 0 or s_cap > SEMINORM_CAP:
        raise InvalidArgumentError(f's_cap must lie in [0, {SEMINORM_CAP}]')
    table = monomial_norms(f, trunc, s_cap)
    sums = [0.0] * (s_cap + 1)
    for (alpha, beta), value in table.items():
        sums[sum(alpha) + sum(beta)] += value
    return sums


def _max_by_order(f, trunc, s_cap):
    table = monomial_norms(f, trunc, s_cap)
    best = [0.0] * (s_cap + 1)
    sums = [0.0] * (s_cap + 1)
    for (alpha, beta), value in table.items():
        s = sum(alpha) + sum(beta)
        best[s] = max(best[s], value)
        sums[s] += value
    return best, sums


def seminorm_family(f, w: WeightSequence, h_grid: Sequence[float], s_cap: int, m: int,
                    trunc: BasisTruncation) -> NormTable:
    """||f||_h over |alpha|+|beta| <= s_cap and ||f||'_h over multiples of m up to s_cap."""
    grid = _check_grid(h_grid)
    if m < 1:
        raise InvalidArgumentError('m must be positive')
    if s_cap < 0 or s_cap > SEMINORM_CAP:
        raise InvalidArgumentError(f's_cap must lie in [0, {SEMINORM_CAP}]')
    if s_cap > w.p_max:
        raise InvalidArgumentError(f's_cap = {s_cap} exceeds p_max = {w.p_max}')
    best, sums = _max_by_order(f, trunc, s_cap)
    orders = np.arange(s_cap + 1)
    log_best = _log(best)
    prime_orders = np.arange(0, s_cap + 1, m)
    log_sums = _log([sums[s] for s in prime_orders])
    rows = []
    for h in grid:
        lh = math.log(h)
        value, k = _sup_profile(log_best, orders, lh, w.log_m[orders])
        pvalue, pk = _sup_profile(log_sums, prime_orders, lh, w.log_m[prime_orders])
        rows.append(NormRow(
            h,
            norm_h=_safe_exp(value),
            norm_h_order=int(orders[k]),
            norm_h_saturated=bool(k == s_cap and s_cap > 0),
            norm_prime=_safe_exp(pvalue),
            norm_prime_order=int(prime_orders[pk]),
            norm_prime_saturated=bool(pk == prime_orders.size - 1 and prime_orders.size > 1),
        ))
    return NormTable(rows=rows, sobolev=sums)


@dataclass
class NormEquivalence:
    table: NormTable
    finite_iterate: bool
    finite_prime: bool
    finite_plain: bool
    log_ratios: Dict[float, Dict[str, Optional[float]]] = field(default_factory=dict)
    inclusion_scale: float = 1.0
    log_inclusion: Dict[float, Optional[float]] = field(default_factory=dict)
    plain_implies_iterate: bool = True

    @property
    def consistent(self) -> bool:
        return self.finite_iterate == self.finite_prime

    def to_dict(self):
        return {
            'table': self.table.to_dict(),
            'finite_iterate': self.finite_iterate,
            'finite_prime': self.finite_prime,
            'finite_plain': self.finite_plain,
            'consistent': self.consistent,
            'log_ratios': {str(h): r for h, r in self.log_ratios.items()},
            'inclusion_scale': self.inclusion_scale,
            'log_inclusion': {str(h): r for h, r in self.log_inclusion.items()},
            'plain_implies_iterate': self.plain_implies_iterate,
        }


def _log_ratio(a, b):
    if a is None or b is None or not (a > 0 and b > 0) or math.isinf(a) or math.isinf(b):
        return None
    return math.log(a) - math.log(b)


def inclusion_scale(p: ShubinOperator) -> float:
    """L = (1 + sum |c|)^{1/m}, the h-dilation under which ||f||_{P,Lh} is compared to ||f||_h."""
    order = max(p.order, 1)
    return (1.0 + sum(abs(c) for c in p.terms.values())) ** (1.0 / order)


def norm_equivalence(p_mat: OperatorMatrix, f, w: WeightSequence, m: int,
                     h_grid: Sequence[float], p_cap: int, s_cap: int,
                     scale: Optional[float] = None) -> NormEquivalence:
    """All three norm families for one function plus their per-h log ratios.

    The inclusion of the plain family in the iterate family is tested at the
    dilated grid ``scale * h``: wherever ||f||_h is finite and unsaturated,
    ||f||_{P,scale*h} has to be too.
    """
    grid = _check_grid(h_grid)
    table = iterate_norms(p_mat, f, w, m, grid, p_cap, s_cap=s_cap).merge(
        seminorm_family(f, w, grid, s_cap, m, p_mat.trunc))
    ratios = {
        row.h: {
            'iterate_over_prime': _log_ratio(row.norm_p, row.norm_prime),
            'prime_over_plain': _log_ratio(row.norm_prime, row.norm_h),
        }
        for row in table.rows
    }
    for h, r in ratios.items():
        logger.debug('h=%g log ratios %s', h, r)

    if scale is None:
        scale = inclusion_scale(p_mat.source) if p_mat.source is not None else 1.0
    if not (scale > 0 and math.isfinite(scale)):
        raise InvalidArgumentError(f'inclusion scale must be positive (got {scale!r})')
    dilated = iterate_norms(p_mat, f, w, m, [scale * h for h in grid], p_cap)
    inclusion: Dict[float, Optional[float]] = {}
    implied = True
    by_h = dict(zip(grid, dilated.rows))
    for row in table.rows:
        wide = by_h[row.h]
        inclusion[row.h] = _log_ratio(wide.norm_p, row.norm_h)
        plain_finite = (row.norm_h is not None and math.isfinite(row.norm_h)
                        and row.norm_h_saturated is False)
        if plain_finite and (wide.norm_p_saturated or not math.isfinite(wide.norm_p)):
            logger.info('h=%g: plain norm finite but iterate norm at %g*h is not', row.h, scale)
            implied = False
    return NormEquivalence(
        table=table,
        finite_iterate=table.finite_somewhere('norm_p'),
        finite_prime=table.finite_somewhere('norm_prime'),
        finite_plain=table.finite_somewhere('norm_h'),
        log_ratios=ratios,
        inclusion_scale=scale,
        log_inclusion=inclusion,
        plain_implies_iterate=implied,
    )


@dataclass(frozen=True)
class BoundCheck:
    h: float
    lhs: float
    rhs: float
    holds: bool

    def to_dict(self):
        return dict(self.__dict__)


def prime_bound_check(f, w: WeightSequence, h_grid: Sequence[float], s_cap: int, m: int,
                      trunc: BasisTruncation) -> List[BoundCheck]:
    """Check ||f||'_h <= 2^{2n-1} ||f||_{h/2} on the grid."""
    grid = _check_grid(h_grid)
    prime = seminorm_family(f, w, grid, s_cap, m, trunc)
    half = seminorm_family(f, w, [h / 2 for h in grid], s_cap, m, trunc)
    factor = 2.0 ** (2 * trunc.dim - 1)
    out = []
    for row, half_row in zip(prime.rows, half.rows):
        lhs, rhs = row.norm_prime, factor * half_row.norm_h
        out.append(BoundCheck(row.h, lhs, rhs, bool(lhs <= rhs * (1 + 1e-12))))
    return out


@dataclass(frozen=True)
class InterpolationReport:
    c_grid: List[float]
    holds: List[bool]
    least_c: Optional[float]
    pairs: List[List[int]]
    min_slack: List[float]

    def to_dict(self):
        return dict(self.__dict__)


def interpolation_check(f, m: int, c_grid: Sequence[float], trunc: BasisTruncation,
                        s_cap: int = 8) -> InterpolationReport:
    """Test |f|_{pm+j} <= |f|_{pm} + C |f|_{(p+1)m} + C^{pm+j} ((pm+j)!)^{1/2} ||f||.

    All p >= 0 and 0 < j < m with (p+1)m <= s_cap are checked for each C.
    """
    if m < 1:
        raise InvalidArgumentError('m must be positive')
    grid = sorted(float(c) for c in c_grid)
    if not grid or grid[0] < 0 or not math.isfinite(grid[-1]):
        raise InvalidArgumentError('interpolation constants must be finite and >= 0')
    sob = _sobolev_all(f, trunc, s_cap)
    base = sob[0]
    pairs = [[p, j] for p in range(s_cap // m) for j in range(1, m) if (p + 1) * m <= s_cap]
    holds, slacks = [], []
    for c in grid:
        worst = math.inf
        for p, j in pairs:
            k = p * m + j
            rhs = sob[p * m] + c * sob[(p + 1) * m] + c ** k * math.exp(0.5 * gammaln(k + 1)) * base
            worst = min(worst, rhs - sob[k])
        slacks.append(worst)
        holds.append(worst >= -1e-12 * max(1.0, max(sob)))
    least = next((c for c, ok in zip(grid, holds) if ok), None)
    return InterpolationReport(grid, holds, least, pairs, slacks)


def solve_eigen_division(s: SpectralDecomposition, f: ExpansionCoefficients,
                         kernel_policy: str = 'reject',
                         tol: Optional[float] = None) -> ExpansionCoefficients:
    """Coefficients of u with Pu = f: b_j = a_j / lambda_j.

    Eigenvalues with |lambda_j| <= tol form the kernel. Under 'reject' a
    nonzero a_j there raises UnsolvableError; under 'project' the component is
    dropped and its squared mass reported.
    """
    if kernel_policy not in ('reject', 'project'):
        raise InvalidArgumentError(f'unknown kernel policy {kernel_policy!r}')
    a = f.a
    if a.size > s.eigenvalues.size:
        raise InvalidArgumentError('more coefficients than eigenvalues')
    zero_tol = tol if tol is not None else 1e-10 * max(s.norm, 1.0)
    lam = s.eigenvalues[: a.size]
    kernel = np.abs(lam) <= zero_tol
    coeff_tol = KERNEL_COEFF_TOL * max(1.0, float(np.max(np.abs(a))) if a.size else 0.0)
    b = np.zeros_like(a)
    b[~kernel] = a[~kernel] / lam[~kernel]
    dropped = 0.0
    for j in np.nonzero(kernel)[0]:
        if abs(a[j]) > coeff_tol:
            if kernel_policy == 'reject':
                raise UnsolvableError(int(j) + 1, a[j])
            dropped += abs(a[j]) ** 2
    if dropped:
        logger.warning('projected away kernel mass %.3e', dropped)
    return ExpansionCoefficients(b, source=f'solve({f.source})', dropped_mass=dropped)


@dataclass(frozen=True)
class DualPairing:
    value: complex
    tail_bound: float
    log_growth: float
    log_decay: float
    decay_lambda: float
    terms: int
    saturated: bool

    def to_dict(self):
        return {
            're': self.value.real,
            'im': self.value.imag,
            'tail_bound': self.tail_bound,
            'log_growth': self.log_growth,
            'log_decay': self.log_decay,
            'decay_lambda': self.decay_lambda,
            'terms': self.terms,
            'saturated': self.saturated,
        }


def pair_dual(dual: ExpansionCoefficients, test: ExpansionCoefficients, w: WeightSequence,
              n: int, h: float, j_max: Optional[int] = None,
              lambda_grid: Optional[Sequence[float]] = None) -> DualPairing:
    """Truncated pairing sum_j a_j b_j of a dual sequence with a test sequence.

    The dual sequence must pass the growth screen sup_j |a_j| e^{-M(j^{1/(2n)}/h)}.
    The test sequence is classified on ``lambda_grid``; its decay witness is
    S(lambda*) = sup_j |b_j| e^{M(lambda* j^{1/(2n)})} at its largest passing
    lambda. The tail bound is the product of both witnesses times the sum of
    e^{M(t/h) - M(lambda* t)} beyond the truncation, and is infinite when no
    lambda passes.

    Raises:
        NotInDualError: the dual sequence fails the growth screen
    """
    if n < 1 or not h > 0:
        raise InvalidArgumentError('n must be positive and h > 0')
    a, b = dual.a, test.a
    terms = min(a.size, b.size) if j_max is None else min(j_max, a.size, b.size)
    if terms < 1:
        raise InvalidArgumentError('nothing to pair')
    assoc = AssociatedFunction(w)

    ja = np.arange(1, a.size + 1, dtype=float) ** (1.0 / (2 * n))
    m_a, _, sat_a = eval_associated_many(assoc, ja / h)
    growth = _log(np.abs(a)) - m_a
    if not tail_is_bounded(growth):
        k = int(np.argmax(growth))
        raise NotInDualError(k + 1)
    log_growth = float(np.max(growth))

    decay = classify_decay(test, w, n, lambda_grid)
    mu, log_decay = decay.lambda_star, decay.log_c_star

    value = complex(np.sum(a[:terms] * b[:terms]))
    extent = DUAL_TAIL_FACTOR * max(terms, a.size, b.size)
    jt = np.arange(terms + 1, extent + 1, dtype=float) ** (1.0 / (2 * n))
    tail_saturated = False
    if not decay.verdict_roumieu:
        logger.warning('test sequence passes no lambda; tail bound is unavailable')
        log_tail = math.inf
    elif jt.size:
        m_lo, _, sat_lo = eval_associated_many(assoc, jt / h)
        m_hi, _, sat_hi = eval_associated_many(assoc, mu * jt)
        log_tail = log_growth + log_decay + float(logsumexp(m_lo - m_hi))
        tail_saturated = bool(sat_lo.any() or sat_hi.any())
    else:
        log_tail = -math.inf
    return DualPairing(
        value=value,
        tail_bound=_safe_exp(log_tail),
        log_growth=log_growth,
        log_decay=log_decay,
        decay_lambda=mu,
        terms=terms,
        saturated=bool(sat_a.any() or tail_saturated),
    )


@dataclass(frozen=True)
class SequenceNormRow:
    h: float
    log_sup: float
    log_l2: float
    log_tame_bound: Optional[float]
    tame_holds: Optional[bool]

    def to_dict(self):
        return dict(self.__dict__)


def sequence_norms(a: ExpansionCoefficients, w: WeightSequence, n: int, m: int,
                   h_grid: Sequence[float],
                   report: Optional[ConditionReport] = None) -> List[SequenceNormRow]:
    """Log of ||a||_{inf,h} and ||a||_{2,h} (built on M~ with step m) and the tame comparison.

    The comparison ||a||_{2,h} <= ||a||_{inf,H^{-2n}h} (A h H^{(m+1)/2})^{2n} pi/sqrt(6)
    uses the (M.2)' witnesses; it is skipped when they are unavailable.
    """
    grid = _check_grid(h_grid)
    if n < 1 or m < 1:
        raise InvalidArgumentError('n and m must be positive')
    report = report or check_conditions(w)
    tilde = AssociatedFunction(w, step=m)
    log_mag = _log(np.abs(a.a))
    t = np.arange(1, a.a.size + 1, dtype=float) ** (1.0 / (2 * n))
    rows = []
    for h in grid:
        vals, _, _ = eval_associated_many(tilde, t / h)
        log_sup = float(np.max(log_mag + vals))
        log_l2 = 0.5 * float(logsumexp(2.0 * (log_mag + vals)))
        bound, holds = None, None
        if report.m2prime_ok:
            log_a, log_h = report.m2prime_log_A, report.m2prime_log_H
            shifted, _, _ = eval_associated_many(tilde, t * math.exp(2 * n * log_h) / h)
            bound = (float(np.max(log_mag + shifted))
                     + 2 * n * (log_a + math.log(h) + 0.5 * (m + 1) * log_h)
                     + math.log(math.pi / math.sqrt(6.0)))
            holds = bool(log_l2 <= bound + 1e-9)
        rows.append(SequenceNormRow(h, log_sup, log_l2, bound, holds))
    return rows


@dataclass(frozen=True)
class CoefficientComparison:
    """||f||_{P,h} next to ||a||_{inf,h} and ||a||_{2,h} at one h (all logs).

    ``log_lower`` = log ||a||_{2,h} - log ||f||_{P,h} is the largest B with
    B ||f||_{P,h} <= ||a||_{2,h}; ``log_upper`` = log ||a||_{inf,h} - log ||f||_{P,h}
    is the smallest C with ||a||_{inf,h} <= C ||f||_{P,h}.
    """

    h: float
    log_iterate: Optional[float]
    log_sup: float
    log_l2: float

    @property
    def log_lower(self) -> Optional[float]:
        if self.log_iterate is None or not math.isfinite(self.log_l2):
            return None
        return self.log_l2 - self.log_iterate

    @property
    def log_upper(self) -> Optional[float]:
        if self.log_iterate is None or not math.isfinite(self.log_sup):
            return None
        return self.log_sup - self.log_iterate

    def to_dict(self):
        return {
            'h': self.h,
            'log_iterate': self.log_iterate,
            'log_sup': self.log_sup,
            'log_l2': self.log_l2,
            'log_lower': self.log_lower,
            'log_upper': self.log_upper,
        }


@dataclass
class CoefficientBounds:
    rows: List[CoefficientComparison]

    @property
    def log_lower_min(self) -> Optional[float]:
        values = [row.log_lower for row in self.rows if row.log_lower is not None]
        return min(values, default=None)

    @property
    def log_upper_max(self) -> Optional[float]:
        values = [row.log_upper for row in self.rows if row.log_upper is not None]
        return max(values, default=None)

    def to_dict(self):
        return {
            'rows': [row.to_dict() for row in self.rows],
            'log_lower_min': self.log_lower_min,
            'log_upper_max': self.log_upper_max,
        }


def compare_coefficients(table: NormTable, rows: Sequence[SequenceNormRow]) -> CoefficientBounds:
    """Pair the iterate norms of ``table`` with the sequence norms of the eigen-coefficients.

    Only h values present in both are compared; an iterate norm that is zero
    or overflowed leaves the constants of that row undefined.
    """
    by_h = {row.h: row for row in table.rows}
    out = []
    for seq in rows:
        row = by_h.get(seq.h)
        if row is None or row.norm_p is None:
            continue
        log_iterate = math.log(row.norm_p) if 0 < row.norm_p < math.inf else None
        out.append(CoefficientComparison(seq.h, log_iterate, seq.log_sup, seq.log_l2))
    if not out:
        logger.warning('no common h between the iterate and the sequence norms')
    return CoefficientBounds(out)

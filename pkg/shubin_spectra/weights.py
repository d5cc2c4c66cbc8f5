"""Weight sequences M_p, their structural conditions and associated functions.

A weight sequence is stored in the log domain, ``log_m[p] = log M_p`` for
``0 <= p <= p_max``, with ``M_0 = 1``. Gevrey sequences ``(p!)^mu`` are the
standard family. All conditions are checked on the finite index range only,
so every verdict carries the ``finite_range`` caveat: the asymptotic parts of
the conditions are decided by a trend test on the last quartile of the range.
"""

from __future__ import annotations

import logging
import math
import sys
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
from numpy.typing import NDArray

from .errors import InvalidArgumentError, PreconditionError

logger = logging.getLogger(__name__)

# Shortest range on which the trend tests are meaningful
MIN_CONDITION_RANGE = 8

# Roumieu scale grid: l = 2^(k/4), k = -32..32 (contains l = 1 exactly)
ROUMIEU_L_GRID = tuple(2.0 ** (k / 4.0) for k in range(-32, 33))

TREND_TOL = 1e-9
WITNESS_SLACK = 1e-12
LOG_FLOAT_MAX = math.log(sys.float_info.max)

# Memory cap for the (t, p) evaluation matrix of eval_associated_many
_EVAL_BLOCK_ENTRIES = 4_000_000


def tail_is_bounded(values, strict=False, margin=TREND_TOL):
    """Trend test on a finite profile.

    Splits ``values`` into the first three quarters (head) and the last quarter
    (tail). The profile counts as bounded when the tail never rises above the
    head maximum. With ``strict`` the tail must stay ``margin`` below the head
    maximum, which rejects flat profiles.

    Args:
        values: 1-D sequence of finite or -inf floats
        strict: require a strict drop of the tail below the head maximum
        margin: tolerance (log domain)

    Returns:
        True if the profile passes the trend test.
    """
    arr = np.asarray(values, dtype=float)
    if arr.size <= 1:
        return True
    cut = int(math.ceil(0.75 * arr.size))
    head, tail = arr[:cut], arr[cut:]
    if tail.size == 0:
        return True
    head_max = float(np.max(head))
    tail_max = float(np.max(tail))
    if strict:
        return tail_max < head_max - margin
    return tail_max <= head_max + margin


@dataclass(frozen=True, eq=False)
class WeightSequence:
    """Positive sequence M_0..M_{p_max} stored as natural logarithms."""

    log_m: NDArray[np.float64]
    label: str = 'explicit'

    def __post_init__(self):
        arr = np.array(self.log_m, dtype=float, copy=True)
        if arr.ndim != 1 or arr.size < 2:
            raise InvalidArgumentError('weight sequence needs log M_0 and at least log M_1')
        if not np.all(np.isfinite(arr)):
            raise InvalidArgumentError('weight sequence contains non-finite entries')
        if arr[0] != 0.0:
            raise InvalidArgumentError(f'log M_0 must be 0 (got {arr[0]!r})')
        arr.flags.writeable = False
        object.__setattr__(self, 'log_m', arr)

    @property
    def p_max(self) -> int:
        return int(self.log_m.size - 1)

    def __eq__(self, other):
        if not isinstance(other, WeightSequence):
            return NotImplemented
        return np.array_equal(self.log_m, other.log_m)

    __hash__ = None  # type: ignore[assignment]

    @classmethod
    def from_dict(cls, data) -> 'WeightSequence':
        """Build from ``{"kind": "gevrey", "mu", "p_max"}`` or ``{"kind": "explicit", "log_m"}``."""
        if not isinstance(data, dict):
            raise InvalidArgumentError('weights must be a JSON object')
        kind = data.get('kind', 'gevrey')
        if kind == 'gevrey':
            try:
                return make_gevrey(float(data['mu']), int(data['p_max']))
            except KeyError as e:
                raise InvalidArgumentError(f'gevrey weights need field {e.args[0]!r}') from e
        if kind == 'explicit':
            if 'log_m' not in data:
                raise InvalidArgumentError("explicit weights need field 'log_m'")
            return cls(np.asarray(data['log_m'], dtype=float), label=data.get('label', 'explicit'))
        raise InvalidArgumentError(f'unknown weight kind {kind!r}')

    def to_dict(self):
        return {'kind': 'explicit', 'label': self.label, 'log_m': [float(v) for v in self.log_m]}


def make_gevrey(mu: float, p_max: int) -> WeightSequence:
    """Gevrey sequence M_p = (p!)^mu with log M_p = mu * sum_{k<=p} log k."""
    if not (mu > 0 and math.isfinite(mu)):
        raise InvalidArgumentError(f'Gevrey exponent must be positive (got {mu!r})')
    if p_max < 1:
        raise InvalidArgumentError(f'p_max must be at least 1 (got {p_max!r})')
    if p_max < MIN_CONDITION_RANGE:
        logger.warning('p_max=%d is below %d; condition checks will be unreliable',
                       p_max, MIN_CONDITION_RANGE)
    log_fact = np.concatenate(([0.0], np.cumsum(np.log(np.arange(1, p_max + 1, dtype=float)))))
    return WeightSequence(mu * log_fact, label=f'gevrey(mu={mu:g})')


@dataclass(frozen=True)
class ConditionReport:
    """Outcome of the structural checks on a WeightSequence."""

    m1_ok: bool
    m1_violation: Optional[int]
    m2prime_ok: bool
    m2prime_log_A: float
    m2prime_log_H: float
    m2_ok: bool
    m2_log_A: float
    m2_log_H: float
    assumption_roumieu: bool
    roumieu_l: Optional[float]
    roumieu_log_C: Optional[float]
    assumption_beurling: bool
    lemma_ratios: List[float] = field(default_factory=list)
    lemma_r: Optional[float] = None
    finite_range: bool = True

    @property
    def m2prime_A(self) -> float:
        return exp_or_inf(self.m2prime_log_A)

    @property
    def m2prime_H(self) -> float:
        return exp_or_inf(self.m2prime_log_H)

    @property
    def m2_A(self) -> float:
        return exp_or_inf(self.m2_log_A)

    @property
    def m2_H(self) -> float:
        return exp_or_inf(self.m2_log_H)

    @property
    def roumieu_C(self) -> Optional[float]:
        return None if self.roumieu_log_C is None else exp_or_inf(self.roumieu_log_C)

    def to_dict(self):
        return {
            'm1_ok': self.m1_ok,
            'm1_violation': self.m1_violation,
            'm2prime_ok': self.m2prime_ok,
            'm2prime_A': self.m2prime_A,
            'm2prime_H': self.m2prime_H,
            'm2prime_log_A': self.m2prime_log_A,
            'm2prime_log_H': self.m2prime_log_H,
            'm2_ok': self.m2_ok,
            'm2_A': self.m2_A,
            'm2_H': self.m2_H,
            'm2_log_A': self.m2_log_A,
            'm2_log_H': self.m2_log_H,
            'assumption_roumieu': self.assumption_roumieu,
            'roumieu_l': self.roumieu_l,
            'roumieu_C': self.roumieu_C,
            'roumieu_log_C': self.roumieu_log_C,
            'assumption_beurling': self.assumption_beurling,
            'lemma_ratios': list(self.lemma_ratios),
            'lemma_r': self.lemma_r,
            'finite_range': self.finite_range,
        }


def exp_or_inf(x: float) -> float:
    """exp(x), with overflow mapped to inf."""
    return math.exp(x) if x < LOG_FLOAT_MAX else math.inf


def _log_factorials(p_max):
    return np.concatenate(([0.0], np.cumsum(np.log(np.arange(1, p_max + 1, dtype=float)))))


def _growth_witness(excess):
    """Fit excess_p <= log A + p log H; returns (ok, log A, log H).

    log H comes from a least-squares slope (clamped at 0), log A is the largest
    residual so the inequality holds on the whole range.
    """
    p = np.arange(excess.size, dtype=float)
    if excess.size >= 2:
        slope = float(np.polyfit(p, excess, 1)[0])
    else:
        slope = 0.0
    log_h = max(slope, 0.0)
    residual = excess - p * log_h
    log_a = max(float(np.max(residual)), 0.0) + WITNESS_SLACK
    finite = math.isfinite(log_a) and math.isfinite(log_h)
    return bool(finite and tail_is_bounded(residual)), log_a, log_h


def _check_log_convex(log_m):
    # 2 log M_p <= log M_{p-1} + log M_{p+1}
    for p in range(1, log_m.size - 1):
        lhs = 2.0 * log_m[p]
        rhs = log_m[p - 1] + log_m[p + 1]
        if lhs > rhs + TREND_TOL * (1.0 + abs(rhs)):
            return False, p
    return True, None


def _check_roumieu(log_m):
    # sqrt(p!) <= C_l l^p M_p ; smallest l on the grid with a bounded residual
    excess = 0.5 * _log_factorials(log_m.size - 1) - log_m
    p = np.arange(excess.size, dtype=float)
    for l in ROUMIEU_L_GRID:
        residual = excess - p * math.log(l)
        if tail_is_bounded(residual):
            log_c = max(float(np.max(residual)), 0.0) + WITNESS_SLACK
            if math.isfinite(log_c):
                return True, l, log_c
    return False, None, None


def check_conditions(w: WeightSequence) -> ConditionReport:
    """Check (M.1), (M.2)', (M.2) and the Roumieu/Beurling assumptions on the finite range.

    Witness constants are the smallest ones compatible with the fitted growth
    rate and, substituted back, satisfy their defining inequalities at every
    index of the range.
    """
    log_m = w.log_m
    p_max = w.p_max
    if p_max < MIN_CONDITION_RANGE:
        logger.warning('condition checks on a range of %d indices are indicative only', p_max + 1)

    m1_ok, m1_violation = _check_log_convex(log_m)

    increments = np.diff(log_m)
    m2prime_ok, log_a1, log_h1 = _growth_witness(increments)

    # (M.2): log M_p - min_q (log M_q + log M_{p-q})
    split = np.empty(p_max + 1)
    for p in range(p_max + 1):
        split[p] = log_m[p] - float(np.min(log_m[: p + 1] + log_m[p::-1]))
    m2_ok, log_a2, log_h2 = _growth_witness(split)

    roumieu_ok, roumieu_l, roumieu_log_c = _check_roumieu(log_m)

    # r_p = sqrt(p+1) M_p / M_{p+1}
    p = np.arange(p_max, dtype=float)
    log_ratios = 0.5 * np.log(p + 1.0) + log_m[:-1] - log_m[1:]
    with np.errstate(over="ignore", under="ignore"):
        ratios = np.exp(log_ratios)
    cut = int(math.ceil(0.75 * ratios.size))
    tail = ratios[cut:] if cut < ratios.size else ratios[-1:]
    beurling_ok = bool(
        tail.size >= 2 and np.all(np.diff(tail) < 0) and np.all(tail < 0.5 * ratios[0])
    )

    lemma_r = float(np.max(ratios)) if (m1_ok and roumieu_ok) else None

    report = ConditionReport(
        m1_ok=m1_ok,
        m1_violation=m1_violation,
        m2prime_ok=m2prime_ok,
        m2prime_log_A=log_a1,
        m2prime_log_H=log_h1,
        m2_ok=m2_ok,
        m2_log_A=log_a2,
        m2_log_H=log_h2,
        assumption_roumieu=roumieu_ok,
        roumieu_l=roumieu_l,
        roumieu_log_C=roumieu_log_c,
        assumption_beurling=beurling_ok,
        lemma_ratios=[float(r) for r in ratios],
        lemma_r=lemma_r,
    )
    logger.debug('conditions for %s: m1=%s m2prime=%s m2=%s roumieu=%s beurling=%s',
                 w.label, m1_ok, m2prime_ok, m2_ok, roumieu_ok, beurling_ok)
    return report


@dataclass(frozen=True)
class AssociatedFunction:
    """M(t) = sup_p log(t^p / M_p); with step m > 1 the sup runs over p = m*q only (M~)."""

    weights: WeightSequence
    step: int = 1

    def __post_init__(self):
        if self.step < 1:
            raise InvalidArgumentError(f'step must be a positive integer (got {self.step!r})')

    @property
    def kind(self) -> str:
        return 'plain' if self.step == 1 else 'tilde'

    @property
    def indices(self) -> NDArray[np.int64]:
        return np.arange(0, self.weights.p_max // self.step + 1, dtype=np.int64) * self.step


@dataclass(frozen=True)
class AssociatedValue:
    value: float
    maximizer: int
    saturated: bool


def eval_associated(a: AssociatedFunction, t: float) -> AssociatedValue:
    """Evaluate the truncated associated function at t > 0.

    ``saturated`` is set when the sup is attained at the last admissible index,
    in which case the value is only a lower bound for the untruncated function.
    """
    values, argmax, saturated = eval_associated_many(a, [t])
    return AssociatedValue(float(values[0]), int(argmax[0]), bool(saturated[0]))


def eval_associated_many(a: AssociatedFunction, ts: Sequence[float]):
    """Vectorized eval_associated; returns (values, maximizers, saturated) arrays."""
    t = np.asarray(ts, dtype=float).ravel()
    if np.any(~np.isfinite(t)) or np.any(t <= 0):
        raise InvalidArgumentError('associated function needs finite t > 0')
    idx = a.indices
    log_m = a.weights.log_m[idx]
    pf = idx.astype(float)
    values = np.empty(t.size)
    argmax = np.empty(t.size, dtype=np.int64)
    block = max(1, _EVAL_BLOCK_ENTRIES // idx.size)
    log_t = np.log(t)
    for start in range(0, t.size, block):
        lt = log_t[start:start + block, None]
        terms = lt * pf[None, :] - log_m[None, :]
        k = np.argmax(terms, axis=1)
        values[start:start + block] = terms[np.arange(k.size), k]
        argmax[start:start + block] = idx[k]
    last = int(idx[-1])
    saturated = (argmax == last) & (last > 0)
    return values, argmax, saturated


@dataclass(frozen=True)
class MTildeRow:
    t: float
    m_value: float
    m_tilde: float
    ordering_slack: float
    komatsu_slack: float
    reverse_slack: float
    saturated: bool

    def to_dict(self):
        return dict(self.__dict__)


def compare_m_mtilde(w: WeightSequence, m: int, t_grid, n: int = 1,
                     report: Optional[ConditionReport] = None) -> List[MTildeRow]:
    """Tabulate M~ against M and the slacks of the two comparison inequalities.

    Rows report, for each t:
        ordering_slack = M(t) - M~(t)                                     (>= 0)
        komatsu_slack  = log of A^{2n} H^{n(m+1)} e^{M~(H^{2n} t)} / t^{2n} minus M~(t)
        reverse_slack  = M~(H^m t) + m log A + (m+2)(m-1)/2 log H - M(t)

    Raises:
        PreconditionError: (M.2)' has no witnesses on this sequence
    """
    if m < 1:
        raise InvalidArgumentError(f'm must be a positive integer (got {m!r})')
    report = report or check_conditions(w)
    if not report.m2prime_ok:
        raise PreconditionError("(M.2)' witnesses are not available for this sequence")
    log_a = report.m2prime_log_A
    log_h = report.m2prime_log_H
    t = np.asarray(t_grid, dtype=float)
    plain = AssociatedFunction(w)
    tilde = AssociatedFunction(w, step=m)

    m_val, _, sat_plain = eval_associated_many(plain, t)
    mt_val, _, sat_tilde = eval_associated_many(tilde, t)
    mt_shift, _, sat_shift = eval_associated_many(tilde, t * math.exp(2 * n * log_h))
    mt_rev, _, sat_rev = eval_associated_many(tilde, t * math.exp(m * log_h))

    komatsu = (2 * n * log_a + n * (m + 1) * log_h + mt_shift - 2 * n * np.log(t)) - mt_val
    reverse = mt_rev + m * log_a + 0.5 * (m + 2) * (m - 1) * log_h - m_val
    rows = []
    for i, ti in enumerate(t):
        saturated = bool(sat_plain[i] or sat_tilde[i] or sat_shift[i] or sat_rev[i])
        if saturated:
            logger.warning('associated function saturated at t=%g; slacks are indicative', ti)
        rows.append(MTildeRow(
            t=float(ti),
            m_value=float(m_val[i]),
            m_tilde=float(mt_val[i]),
            ordering_slack=float(m_val[i] - mt_val[i]),
            komatsu_slack=float(komatsu[i]),
            reverse_slack=float(reverse[i]),
            saturated=saturated,
        ))
    return rows

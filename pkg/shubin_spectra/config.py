"""Job configuration and setting resolution.

Settings resolve in a fixed priority order:
1. Value given on the command line (if provided)
2. Value from the job file or the environment
3. Built-in default
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

from .errors import ConfigError, InvalidArgumentError
from .hermite import NAMED_FUNCTIONS

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
ENV_THREADS = 'SHUBIN_SPECTRA_THREADS'
DEFAULT_THREADS = 1

DEFAULT_LAMBDA_GRID = tuple(2.0 ** k for k in range(-4, 5))
DEFAULT_H_GRID = (0.5, 1.0, 2.0, 4.0, 8.0)
DEFAULT_C_GRID = (1.0, 2.0, 4.0, 8.0)
KERNEL_POLICIES = ('reject', 'project')

JOBS_DIR = Path(__file__).parent / 'jobs'

CHECK_NAMES = (
    'conditions', 'ellipticity', 'normality', 'weyl', 'classify',
    'norms', 'bounds', 'solve', 'interpolation',
)


def resolve_threads(user_threads: Optional[int] = None) -> int:
    """Resolve the worker count for thread pools.

    Priority order:
    1. User-specified value (if provided)
    2. SHUBIN_SPECTRA_THREADS environment variable
    3. DEFAULT_THREADS
    """
    if user_threads is not None:
        if int(user_threads) < 1:
            raise InvalidArgumentError(f'thread count must be positive (got {user_threads})')
        return int(user_threads)
    raw = os.environ.get(ENV_THREADS)
    if raw:
        try:
            value = int(raw)
        except ValueError:
            logger.warning('ignoring non-integer %s=%r', ENV_THREADS, raw)
        else:
            if value >= 1:
                return value
            logger.warning('ignoring non-positive %s=%r', ENV_THREADS, raw)
    return DEFAULT_THREADS


def resolve_job_path(name_or_path) -> Path:
    """A job file on disk, or the bundled job with that name."""
    path = Path(name_or_path)
    if path.exists():
        return path.resolve()
    bundled = JOBS_DIR / (path.name if path.suffix == '.json' else f'{path.name}.json')
    if bundled.exists():
        logger.debug('using bundled job %s', bundled.name)
        return bundled
    raise ConfigError('job', f'job file not found: {name_or_path}')


def _grid(data, key, default) -> Tuple[float, ...]:
    raw = data.get(key, default)
    try:
        values = tuple(float(v) for v in raw)
    except (TypeError, ValueError) as e:
        raise ConfigError(key, 'must be a list of numbers') from e
    if not values or any(not v > 0 for v in values):
        raise ConfigError(key, 'must be a non-empty list of positive numbers')
    return tuple(sorted(values))


def _positive_int(data, key, default=None, minimum=1, field=None) -> int:
    field = field or key
    raw = data.get(key, default)
    if raw is None:
        raise ConfigError(field, 'is required')
    if isinstance(raw, bool) or not isinstance(raw, int) or raw < minimum:
        raise ConfigError(field, f'must be an integer >= {minimum}')
    return raw


@dataclass(frozen=True)
class FunctionSpec:
    name: Optional[str] = 'gaussian'
    k: int = 0
    csv: Optional[Path] = None

    def to_dict(self):
        return {'name': self.name, 'k': self.k, 'csv': self.csv.name if self.csv else None}


@dataclass
class JobConfig:
    """Validated job file contents. ``operator`` and ``weights`` stay as parsed JSON."""

    operator: Dict[str, Any]
    weights: Dict[str, Any]
    per_axis: int
    pad: Optional[int]
    quadrature_order: int
    test_function: FunctionSpec
    output_dir: Path
    lambda_grid: Tuple[float, ...] = DEFAULT_LAMBDA_GRID
    h_grid: Tuple[float, ...] = DEFAULT_H_GRID
    c_grid: Tuple[float, ...] = DEFAULT_C_GRID
    checks: Dict[str, bool] = field(default_factory=lambda: {k: True for k in CHECK_NAMES})
    seed: int = 0
    tol: float = 1e-8
    p_cap: int = 6
    s_cap: int = 8
    bound_cap: int = 4
    bound_j_max: int = 100
    kernel_policy: str = 'reject'
    sphere_samples: int = 256
    weyl_j_min: int = 20
    source_path: Optional[Path] = None

    @classmethod
    def load(cls, path, output_dir=None) -> 'JobConfig':
        path = resolve_job_path(path)
        try:
            data = json.loads(path.read_text(encoding='utf-8'))
        except json.JSONDecodeError as e:
            raise ConfigError('job', f'invalid JSON in {path.name}: {e}') from e
        config = cls.from_dict(data, base_dir=path.parent, output_dir=output_dir)
        config.source_path = path
        return config

    @classmethod
    def from_dict(cls, data, base_dir=None, output_dir=None) -> 'JobConfig':
        if not isinstance(data, dict):
            raise ConfigError('job', 'must be a JSON object')
        base = Path(base_dir or '.')
        version = data.get('schema_version', SCHEMA_VERSION)
        if version != SCHEMA_VERSION:
            raise ConfigError('schema_version', f'unsupported version {version!r}')
        for key in ('operator', 'weights'):
            if not isinstance(data.get(key), dict):
                raise ConfigError(key, 'must be a JSON object')

        trunc = data.get('truncation', {})
        if not isinstance(trunc, dict):
            raise ConfigError('truncation', 'must be a JSON object')
        per_axis = _positive_int(trunc, 'per_axis')
        pad = trunc.get('pad')
        if pad is not None and (isinstance(pad, bool) or not isinstance(pad, int) or pad < 0):
            raise ConfigError('truncation.pad', 'must be a non-negative integer')

        quad = _positive_int(data, 'quadrature_order', default=per_axis + 16)

        tf = data.get('test_function', {'name': 'gaussian'})
        if isinstance(tf, str):
            tf = {'name': tf}
        if not isinstance(tf, dict):
            raise ConfigError('test_function', 'must be a name or a JSON object')
        if tf.get('csv'):
            csv_path = (base / tf['csv']).resolve()
            if not csv_path.exists():
                raise ConfigError('test_function.csv', f'file not found: {csv_path}')
            spec = FunctionSpec(name=None, csv=csv_path)
        else:
            name = tf.get('name', 'gaussian')
            if name not in NAMED_FUNCTIONS:
                raise ConfigError('test_function.name', f'unknown function {name!r}')
            k = _positive_int(tf, 'k', default=0, minimum=0, field='test_function.k')
            spec = FunctionSpec(name=name, k=k)

        checks_raw = data.get('checks', {})
        if not isinstance(checks_raw, dict):
            raise ConfigError('checks', 'must be a JSON object')
        unknown = sorted(set(checks_raw) - set(CHECK_NAMES))
        if unknown:
            raise ConfigError('checks', f'unknown checks {unknown}')
        checks = {k: bool(checks_raw.get(k, True)) for k in CHECK_NAMES}

        policy = data.get('kernel_policy', 'reject')
        if policy not in KERNEL_POLICIES:
            raise ConfigError('kernel_policy', f'must be one of {KERNEL_POLICIES}')

        out = Path(output_dir) if output_dir else Path(data.get('output_dir', 'out'))
        tol = data.get('tol', 1e-8)
        if not isinstance(tol, (int, float)) or not tol > 0:
            raise ConfigError('tol', 'must be a positive number')

        return cls(
            operator=data['operator'],
            weights=data['weights'],
            per_axis=per_axis,
            pad=pad,
            quadrature_order=quad,
            test_function=spec,
            output_dir=out,
            lambda_grid=_grid(data, 'lambda_grid', DEFAULT_LAMBDA_GRID),
            h_grid=_grid(data, 'h_grid', DEFAULT_H_GRID),
            c_grid=_grid(data, 'c_grid', DEFAULT_C_GRID),
            checks=checks,
            seed=_positive_int(data, 'seed', default=0, minimum=0),
            tol=float(tol),
            p_cap=_positive_int(data, 'p_cap', default=6, minimum=0),
            s_cap=_positive_int(data, 's_cap', default=8, minimum=0),
            bound_cap=_positive_int(data, 'bound_cap', default=4, minimum=0),
            bound_j_max=_positive_int(data, 'bound_j_max', default=100),
            kernel_policy=policy,
            sphere_samples=_positive_int(data, 'sphere_samples', default=256),
            weyl_j_min=_positive_int(data, 'weyl_j_min', default=20),
        )

    def to_dict(self):
        """Normalized form used for the config hash (paths reduced to names)."""
        return {
            'schema_version': SCHEMA_VERSION,
            'operator': self.operator,
            'weights': self.weights,
            'truncation': {'per_axis': self.per_axis, 'pad': self.pad},
            'quadrature_order': self.quadrature_order,
            'test_function': self.test_function.to_dict(),
            'lambda_grid': list(self.lambda_grid),
            'h_grid': list(self.h_grid),
            'c_grid': list(self.c_grid),
            'checks': dict(self.checks),
            'seed': self.seed,
            'tol': self.tol,
            'p_cap': self.p_cap,
            's_cap': self.s_cap,
            'bound_cap': self.bound_cap,
            'bound_j_max': self.bound_j_max,
            'kernel_policy': self.kernel_policy,
            'sphere_samples': self.sphere_samples,
            'weyl_j_min': self.weyl_j_min,
        }

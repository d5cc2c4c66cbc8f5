"""Report files: JSON, CSV tables and SVG plots.

Every file is written to a temporary file in the target directory and moved
into place, so an interrupted run never leaves a half-written report. Output
is deterministic: JSON keys are sorted, floats use a fixed format, and SVG
files carry a fixed hash salt and no date.
"""

from __future__ import annotations

import hashlib
import io
import json
import logging
import math
import os
import tempfile
from pathlib import Path

import matplotlib
import numpy as np
import pandas as pd
from matplotlib.figure import Figure

from .errors import InvalidInputError
from .hermite import BasisTruncation, quadrature_grid
from .weights import AssociatedFunction, eval_associated_many

logger = logging.getLogger(__name__)

FLOAT_FORMAT = '%.17g'
SVG_SALT = 'shubin-spectra'


def atomic_write_bytes(path, data: bytes) -> Path:
    """Write data next to ``path`` in a temporary file, then rename over it."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, temp_path = tempfile.mkstemp(prefix=f'.{path.name}.', suffix='.tmp', dir=path.parent)
    try:
        with os.fdopen(fd, 'wb') as f:
            f.write(data)
        os.replace(temp_path, path)
    except Exception:
        try:
            os.unlink(temp_path)
        except OSError:
            pass
        raise
    logger.debug('wrote %s (%d bytes)', path, len(data))
    return path


def atomic_write_text(path, text: str) -> Path:
    return atomic_write_bytes(path, text.encode('utf-8'))


def sanitize(value):
    """Convert a report payload to plain JSON types; non-finite floats become None."""
    if isinstance(value, dict):
        return {str(k): sanitize(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [sanitize(v) for v in value]
    if isinstance(value, np.ndarray):
        return [sanitize(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return v if math.isfinite(v) else None
    if isinstance(value, (complex, np.complexfloating)):
        return {'re': sanitize(value.real), 'im': sanitize(value.imag)}
    if isinstance(value, Path):
        return value.name
    return value


def dumps(payload) -> str:
    return json.dumps(sanitize(payload), sort_keys=True, indent=2, allow_nan=False) + '\n'


def write_json(path, payload) -> Path:
    return atomic_write_text(path, dumps(payload))


def config_hash(config_dict) -> str:
    """SHA-256 of the normalized job configuration."""
    canonical = json.dumps(sanitize(config_dict), sort_keys=True, separators=(',', ':'))
    return hashlib.sha256(canonical.encode('utf-8')).hexdigest()


def write_csv(path, frame: pd.DataFrame) -> Path:
    text = frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator='\n')
    return atomic_write_text(path, text)


def spectrum_frame(s) -> pd.DataFrame:
    """Columns j, re, im, residual, trusted."""
    j = np.arange(1, s.eigenvalues.size + 1)
    return pd.DataFrame({
        'j': j,
        're': s.eigenvalues.real,
        'im': s.eigenvalues.imag,
        'residual': s.residuals,
        'trusted': j <= s.trusted,
    })


def _format_index(k) -> str:
    return ';'.join(str(int(v)) for v in k)


def coefficients_frame(c, trunc: BasisTruncation) -> pd.DataFrame:
    """Hermite coefficients as (index, multi_index, re, im) with multi-indices like '1;0'."""
    c = np.asarray(c, dtype=complex)
    return pd.DataFrame({
        'index': np.arange(c.size),
        'multi_index': [_format_index(k) for k in trunc.index_order[: c.size]],
        're': c.real,
        'im': c.imag,
    })


def expansion_frame(a) -> pd.DataFrame:
    """Eigen-coefficients as (j, re, im)."""
    a = np.asarray(a, dtype=complex)
    return pd.DataFrame({'j': np.arange(1, a.size + 1), 're': a.real, 'im': a.imag})


def read_coefficients_csv(path) -> np.ndarray:
    """Complex coefficients from a CSV with an ``re`` column and optional ``im`` column."""
    try:
        frame = pd.read_csv(path)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise InvalidInputError(f'cannot read coefficients from {path}: {e}') from e
    if 're' not in frame.columns:
        raise InvalidInputError(f"{path}: missing 're' column")
    im = frame['im'] if 'im' in frame.columns else 0.0
    values = frame['re'].to_numpy(dtype=float) + 1j * np.asarray(im, dtype=float)
    if not np.all(np.isfinite(values)):
        raise InvalidInputError(f'{path}: non-finite coefficients')
    return values


def read_samples_csv(path, dim: int, quad_order: int) -> np.ndarray:
    """Function samples on the Gauss-Hermite grid from columns x1..xn, re[, im].

    Rows must list the quadrature nodes in lexicographic order.
    """
    try:
        frame = pd.read_csv(path)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise InvalidInputError(f'cannot read samples from {path}: {e}') from e
    coords = [f'x{i + 1}' for i in range(dim)]
    missing = [c for c in coords + ['re'] if c not in frame.columns]
    if missing:
        raise InvalidInputError(f'{path}: missing columns {missing}')
    grid = quadrature_grid(dim, quad_order)
    if len(frame) != grid.shape[0]:
        raise InvalidInputError(
            f'{path}: expected {grid.shape[0]} rows for quadrature order {quad_order}, got {len(frame)}'
        )
    points = frame[coords].to_numpy(dtype=float)
    if not np.allclose(points, grid, atol=1e-10, rtol=0.0):
        raise InvalidInputError(f'{path}: sample points do not match the quadrature nodes')
    im = frame['im'] if 'im' in frame.columns else 0.0
    return frame['re'].to_numpy(dtype=float) + 1j * np.asarray(im, dtype=float)


def samples_frame(values, dim: int, quad_order: int) -> pd.DataFrame:
    """Inverse of read_samples_csv."""
    grid = quadrature_grid(dim, quad_order)
    values = np.asarray(values, dtype=complex)
    data = {f'x{i + 1}': grid[:, i] for i in range(dim)}
    data['re'] = values.real
    data['im'] = values.imag
    return pd.DataFrame(data)


def _save_svg(path, fig: Figure) -> Path:
    buf = io.BytesIO()
    with matplotlib.rc_context({'svg.hashsalt': SVG_SALT, 'svg.fonttype': 'none'}):
        fig.savefig(buf, format='svg', metadata={'Date': None})
    return atomic_write_bytes(path, buf.getvalue())


def plot_decay(path, decay, a, w=None, n: int = 1) -> Path:
    """|a_j| on a log scale with the envelopes S(lambda) e^{-M(lambda j^{1/(2n)})}.

    Envelopes are drawn for the passing lambdas when weights are given.
    """
    fig = Figure(figsize=(6.4, 4.0))
    ax = fig.subplots()
    mags = np.abs(np.asarray(a, dtype=complex))
    j = np.arange(1, mags.size + 1)
    nonzero = mags > 0
    ax.semilogy(j[nonzero], mags[nonzero], '.', ms=3, label='|a_j|')
    if w is not None and mags.size:
        assoc = AssociatedFunction(w)
        t = j.astype(float) ** (1.0 / (2 * n))
        floor = float(mags.max()) * 1e-18
        for row in decay.per_lambda:
            if not row.passed or not math.isfinite(row.log_s):
                continue
            values, _, _ = eval_associated_many(assoc, row.lam * t)
            envelope = np.exp(np.clip(row.log_s - values, -700.0, 700.0))
            keep = envelope > floor
            ax.semilogy(j[keep], envelope[keep], '-', lw=0.8, label=f'lambda = {row.lam:g}')
    ax.set_xlabel('j')
    ax.set_ylabel('|a_j|')
    passed = [row.lam for row in decay.per_lambda if row.passed]
    title = f'lambda* = {decay.lambda_star:g}' if passed else 'no lambda passes'
    ax.set_title(title)
    ax.legend(loc='upper right', fontsize='small')
    fig.tight_layout()
    return _save_svg(path, fig)


def plot_weyl(path, s, fit=None) -> Path:
    """log-log plot of |lambda_j| over the trusted range with the fitted law."""
    fig = Figure(figsize=(6.4, 4.0))
    ax = fig.subplots()
    j = np.arange(1, s.trusted + 1)
    mags = np.abs(s.eigenvalues[: s.trusted])
    keep = mags > 0
    ax.loglog(j[keep], mags[keep], '.', ms=3, label='|lambda_j|')
    if fit is not None:
        jj = np.arange(fit.j_min, fit.j_max + 1, dtype=float)
        ax.loglog(jj, fit.B * jj ** fit.expected_exponent, '-', lw=1,
                  label=f'{fit.B:.3f} j^{fit.expected_exponent:g}')
    ax.set_xlabel('j')
    ax.set_ylabel('|lambda_j|')
    ax.legend(loc='upper left')
    fig.tight_layout()
    return _save_svg(path, fig)


__all__ = [
    'atomic_write_bytes',
    'atomic_write_text',
    'coefficients_frame',
    'config_hash',
    'dumps',
    'expansion_frame',
    'plot_decay',
    'plot_weyl',
    'read_coefficients_csv',
    'read_samples_csv',
    'samples_frame',
    'sanitize',
    'spectrum_frame',
    'write_csv',
    'write_json',
]

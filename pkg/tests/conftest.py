"""Shared fixtures for the shubin-spectra test suite."""

import json

import pytest

from shubin_spectra.hermite import BasisTruncation, operator_matrix
from shubin_spectra.operators import harmonic_oscillator
from shubin_spectra.spectral import decompose
from shubin_spectra.weights import make_gevrey


@pytest.fixture
def oscillator():
    return harmonic_oscillator(1)


@pytest.fixture
def trunc64():
    return BasisTruncation(1, 64)


@pytest.fixture
def oscillator_spectrum(oscillator, trunc64):
    return decompose(operator_matrix(oscillator, trunc64), selfadjoint=True)


@pytest.fixture
def gevrey_half():
    return make_gevrey(0.5, 1024)


@pytest.fixture
def gevrey_one():
    return make_gevrey(1.0, 2048)


@pytest.fixture
def write_job(tmp_path):
    """Write a job dict to tmp_path and return its path."""
    def _write(data, name='job.json'):
        path = tmp_path / name
        path.write_text(json.dumps(data), encoding='utf-8')
        return path
    return _write


@pytest.fixture
def small_job():
    return {
        'operator': {'kind': 'oscillator', 'dim': 1},
        'weights': {'kind': 'gevrey', 'mu': 0.5, 'p_max': 64},
        'truncation': {'per_axis': 32},
        'test_function': {'name': 'gaussian'},
        'seed': 0,
    }

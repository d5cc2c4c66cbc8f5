"""shubin-spectra - eigenfunction expansions of Shubin operators and Gelfand-Shilov decay"""

__version__ = '0.1.0'

from .analysis import ExpansionCoefficients, classify_decay, expand, solve_eigen_division
from .config import JobConfig
from .errors import ShubinSpectraError
from .hermite import BasisTruncation, hermite_transform, operator_matrix
from .operators import ShubinOperator, compose, harmonic_oscillator
from .pipeline import SpectraJob
from .spectral import decompose, weyl_fit
from .weights import WeightSequence, check_conditions, make_gevrey

__all__ = [
    'BasisTruncation',
    'ExpansionCoefficients',
    'JobConfig',
    'ShubinOperator',
    'ShubinSpectraError',
    'SpectraJob',
    'WeightSequence',
    'check_conditions',
    'classify_decay',
    'compose',
    'decompose',
    'expand',
    'harmonic_oscillator',
    'hermite_transform',
    'make_gevrey',
    'operator_matrix',
    'solve_eigen_division',
    'weyl_fit',
]

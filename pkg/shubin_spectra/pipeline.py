"""Job pipeline: runs the analysis stages of a JobConfig and writes the report files."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Any, Dict, Optional

import numpy as np

from .analysis import (
    ExpansionCoefficients,
    classify_decay,
    compare_coefficients,
    expand,
    interpolation_check,
    norm_equivalence,
    prime_bound_check,
    sequence_norms,
    solve_eigen_division,
)
from .config import SCHEMA_VERSION, JobConfig
from .errors import (
    ConfigError,
    InvalidArgumentError,
    NotEllipticError,
    NotNormalError,
    ResourceLimitError,
)
from .hermite import BasisTruncation, hermite_transform, named_function, operator_matrix
from .operators import ShubinOperator, adjoint, ellipticity_test, is_normal
from .reports import (
    coefficients_frame,
    config_hash,
    expansion_frame,
    plot_decay,
    plot_weyl,
    read_samples_csv,
    spectrum_frame,
    write_csv,
    write_json,
)
from .spectral import decompose, eigen_bound_fit, eigen_constants_fit, weyl_fit
from .weights import WeightSequence, check_conditions, compare_m_mtilde

logger = logging.getLogger(__name__)

M_TILDE_GRID = tuple(float(t) for t in np.linspace(0.5, 8.0, 50))


class SpectraJob:
    """Holds the parsed objects of one job and the report accumulated by its stages."""

    def __init__(self, config: JobConfig, threads: Optional[int] = None):
        self.config = config
        self.threads = threads
        try:
            self.operator = ShubinOperator.from_dict(config.operator)
        except (InvalidArgumentError, KeyError, TypeError, ValueError) as e:
            raise ConfigError('operator', str(e)) from e
        try:
            self.weights = WeightSequence.from_dict(config.weights)
        except (InvalidArgumentError, TypeError, ValueError) as e:
            raise ConfigError('weights', str(e)) from e
        try:
            self.trunc = BasisTruncation(self.operator.dim, config.per_axis)
        except (InvalidArgumentError, ResourceLimitError) as e:
            raise ConfigError('truncation.per_axis', str(e)) from e
        self.m = self.operator.order
        self.n = self.operator.dim
        self.conditions = None
        self.matrix = None
        self.spectrum = None
        self.weyl = None
        self.f_coeffs = None
        self.source = ''
        self.expansion: Optional[ExpansionCoefficients] = None
        self.decay = None
        self.solution: Optional[ExpansionCoefficients] = None
        self.report: Dict[str, Any] = {
            'schema_version': SCHEMA_VERSION,
            'config_hash': config_hash(config.to_dict()),
            'job': config.to_dict(),
        }

    def check_weights(self):
        self.conditions = check_conditions(self.weights)
        section = self.conditions.to_dict()
        if self.conditions.m2prime_ok and self.m >= 1:
            rows = compare_m_mtilde(self.weights, self.m, M_TILDE_GRID, n=self.n,
                                    report=self.conditions)
            section['m_mtilde'] = [row.to_dict() for row in rows]
        self.report['weights'] = section
        return self.conditions

    def check_operator(self):
        """Normality and ellipticity; the section is recorded before any failure is raised."""
        section: Dict[str, Any] = {'order': self.m, 'dim': self.n}
        self.report['operator'] = section
        checks = self.config.checks
        if checks['normality']:
            normality = is_normal(self.operator)
            section['normality'] = normality.to_dict()
            if not normality.normal:
                self.report['failure'] = {'hypothesis': 'normality', 'discrepancy': normality.discrepancy}
                raise NotNormalError(normality.discrepancy)
        if checks['ellipticity']:
            ell = ellipticity_test(self.operator, self.config.sphere_samples, seed=self.config.seed)
            section['ellipticity'] = ell.to_dict()
            if not ell.elliptic:
                self.report['failure'] = {
                    'hypothesis': 'ellipticity',
                    'min_modulus': ell.min_modulus,
                    'argmin': list(ell.argmin),
                }
                raise NotEllipticError(ell.min_modulus, ell.argmin)
        return section

    def build_spectrum(self):
        self.matrix = operator_matrix(self.operator, self.trunc, self.config.pad)
        selfadjoint = adjoint(self.operator) == self.operator
        self.spectrum = decompose(self.matrix, selfadjoint=selfadjoint, tol=self.config.tol)
        section: Dict[str, Any] = {'summary': self.spectrum.summary()}
        if self.config.checks['weyl']:
            try:
                self.weyl = weyl_fit(self.spectrum, self.m, self.n, j_min=self.config.weyl_j_min)
                self.report['weyl'] = self.weyl.to_dict()
            except ResourceLimitError as e:
                logger.warning('Weyl fit skipped: %s', e)
                self.report['weyl'] = {'error': str(e)}
        self.report['spectrum'] = section
        return self.spectrum

    def load_function(self):
        spec = self.config.test_function
        quad = self.config.quadrature_order
        if spec.csv is not None:
            values = read_samples_csv(spec.csv, self.n, quad)
            source = spec.csv.name
        else:
            values = named_function(spec.name, self.n, spec.k)
            source = spec.name if spec.name != 'hermite_k' else f'hermite_{spec.k}'
        self.f_coeffs = hermite_transform(values, self.trunc, quad)
        self.source = source
        return self.f_coeffs

    def classify(self):
        if self.spectrum is None:
            self.build_spectrum()
        if self.f_coeffs is None:
            self.load_function()
        self.expansion = expand(self.f_coeffs, self.spectrum, source=self.source)
        self.decay = classify_decay(self.expansion, self.weights, self.n, self.config.lambda_grid)
        self.report['expansion'] = {
            'source': self.source,
            'count': len(self.expansion),
            'l2_mass': float(np.sum(np.abs(self.expansion.a) ** 2)),
        }
        self.report['classify'] = self.decay.to_dict()
        rows = sequence_norms(self.expansion, self.weights, self.n, max(self.m, 1),
                              self.config.h_grid, report=self.conditions)
        self.report['sequence_norms'] = [row.to_dict() for row in rows]
        return self.decay

    def norms(self):
        if self.spectrum is None:
            self.build_spectrum()
        if self.f_coeffs is None:
            self.load_function()
        cfg = self.config
        equivalence = norm_equivalence(self.matrix, self.f_coeffs, self.weights, self.m,
                                       cfg.h_grid, cfg.p_cap, cfg.s_cap)
        bound = prime_bound_check(self.f_coeffs, self.weights, cfg.h_grid, cfg.s_cap, self.m,
                                  self.trunc)
        self.report['norms'] = equivalence.to_dict()
        self.report['norms']['prime_bound'] = [row.to_dict() for row in bound]
        expansion = self.expansion
        if expansion is None:
            expansion = expand(self.f_coeffs, self.spectrum, source=self.source)
        rows = sequence_norms(expansion, self.weights, self.n, max(self.m, 1), cfg.h_grid,
                              report=self.conditions)
        coefficients = compare_coefficients(equivalence.table, rows)
        self.report['norms']['coefficients'] = coefficients.to_dict()
        if cfg.checks['interpolation']:
            interp = interpolation_check(self.f_coeffs, self.m, cfg.c_grid, self.trunc, cfg.s_cap)
            self.report['interpolation'] = interp.to_dict()
        return equivalence

    def bounds(self):
        if self.spectrum is None:
            self.build_spectrum()
        if self.weyl is None:
            self.report['bounds'] = {'error': 'Weyl fit unavailable'}
            return None
        cfg = self.config
        fit = eigen_bound_fit(self.spectrum, self.weyl, cfg.bound_cap, cfg.bound_j_max,
                              threads=self.threads)
        section = fit.to_dict()
        if cfg.bound_cap >= 1:
            constants = eigen_constants_fit(self.spectrum, self.m, cfg.bound_cap,
                                            cfg.bound_j_max, threads=self.threads)
            section['constants'] = constants.to_dict()
        self.report['bounds'] = section
        return fit

    def solve(self, kernel_policy: Optional[str] = None):
        if self.expansion is None:
            self.classify()
        policy = kernel_policy or self.config.kernel_policy
        solution = solve_eigen_division(self.spectrum, self.expansion, policy)
        decay = classify_decay(solution, self.weights, self.n, self.config.lambda_grid)
        self.report['solve'] = {
            'kernel_policy': policy,
            'dropped_mass': solution.dropped_mass,
            'decay': decay.to_dict(),
            'same_verdicts': (decay.verdict_roumieu == self.decay.verdict_roumieu
                              and decay.verdict_beurling == self.decay.verdict_beurling),
        }
        self.solution = solution
        return solution

    def run(self):
        checks = self.config.checks
        if checks['conditions']:
            self.check_weights()
        self.check_operator()
        self.build_spectrum()
        self.load_function()
        if checks['classify'] or checks['solve']:
            self.classify()
        if checks['norms']:
            self.norms()
        if checks['bounds']:
            self.bounds()
        if checks['solve']:
            self.solve()
        return self.report

    def write_outputs(self, output_dir=None) -> Path:
        """Write report.json plus whichever tables and plots the completed stages allow."""
        out = Path(output_dir or self.config.output_dir)
        write_json(out / 'report.json', self.report)
        if self.spectrum is not None:
            write_csv(out / 'spectrum.csv', spectrum_frame(self.spectrum))
            plot_weyl(out / 'weyl.svg', self.spectrum, self.weyl)
        if self.f_coeffs is not None:
            write_csv(out / 'coefficients.csv', coefficients_frame(self.f_coeffs, self.trunc))
        if self.expansion is not None:
            write_csv(out / 'expansion.csv', expansion_frame(self.expansion.a))
            if self.decay is not None:
                plot_decay(out / 'decay.svg', self.decay, self.expansion.a, self.weights, self.n)
        return out

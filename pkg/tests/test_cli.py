"""End-to-end tests for the shubin-spectra command line."""

import json

import numpy as np
import pandas as pd

from shubin_spectra.cli import EXIT_ERROR, EXIT_HYPOTHESIS, EXIT_OK, main


def _report(path):
    return json.loads((path / 'report.json').read_text(encoding='utf-8'))


class TestRun:
    def test_bundled_job(self, tmp_path, capsys):
        first, second = tmp_path / 'first', tmp_path / 'second'
        assert main(['run', 'ho1d_gevrey_half', '--output', str(first)]) == EXIT_OK
        report = _report(first)
        assert 1.9 <= report['weyl']['B'] <= 2.1
        assert report['classify']['verdict_roumieu'] is True
        for name in ('spectrum.csv', 'weyl.svg', 'coefficients.csv', 'expansion.csv', 'decay.svg'):
            assert (first / name).exists()
        assert 'Report written to' in capsys.readouterr().out

        assert main(['run', 'ho1d_gevrey_half', '--output', str(second)]) == EXIT_OK
        assert (first / 'report.json').read_bytes() == (second / 'report.json').read_bytes()

    def test_non_elliptic_operator(self, tmp_path, small_job, write_job, capsys):
        small_job['operator'] = {'dim': 1, 'terms': [{'beta': [0], 'alpha': [2], 're': 1}]}
        small_job['truncation'] = {'per_axis': 16}
        out = tmp_path / 'out'
        assert main(['run', str(write_job(small_job)), '--output', str(out)]) == EXIT_HYPOTHESIS
        failure = _report(out)['failure']
        assert failure['hypothesis'] == 'ellipticity'
        assert len(failure['argmin']) == 2
        assert 'Hypothesis failure' in capsys.readouterr().out

    def test_non_normal_operator(self, tmp_path, small_job, write_job):
        small_job['operator'] = {'kind': 'annihilation'}
        out = tmp_path / 'out'
        assert main(['check-operator', str(write_job(small_job)), '--output', str(out)]) == EXIT_HYPOTHESIS
        failure = _report(out)['failure']
        assert failure['hypothesis'] == 'normality'
        assert abs(failure['discrepancy'] - 1.0) <= 1e-12

    def test_missing_truncation(self, small_job, write_job, capsys):
        del small_job['truncation']
        assert main(['run', str(write_job(small_job))]) == EXIT_ERROR
        assert 'per_axis' in capsys.readouterr().out

    def test_bad_hermite_index(self, small_job, write_job, capsys):
        small_job['test_function'] = {'name': 'hermite_k', 'k': 'two'}
        assert main(['run', str(write_job(small_job))]) == EXIT_ERROR
        assert 'test_function.k' in capsys.readouterr().out

    def test_missing_job_file(self, tmp_path, capsys):
        assert main(['run', str(tmp_path / 'absent.json')]) == EXIT_ERROR
        assert 'not found' in capsys.readouterr().out


class TestSubcommands:
    def test_classify_coefficient_file(self, tmp_path, capsys):
        j = np.arange(1, 2001, dtype=float)
        coeffs = tmp_path / 'a.csv'
        pd.DataFrame({'j': j.astype(int), 're': np.exp(-np.sqrt(j))}).to_csv(coeffs, index=False)
        weights = tmp_path / 'w.json'
        weights.write_text(json.dumps({'kind': 'gevrey', 'mu': 1.0, 'p_max': 2048}), encoding='utf-8')
        out = tmp_path / 'out'
        code = main(['classify', '--coeffs', str(coeffs), '--weights', str(weights), '--output', str(out)])
        assert code == EXIT_OK
        text = capsys.readouterr().out
        assert 'Roumieu: ✓' in text
        assert 'Beurling: ❌' in text
        assert _report(out)['decay']['verdict_roumieu'] is True

    def test_classify_needs_weights(self, tmp_path):
        coeffs = tmp_path / 'a.csv'
        coeffs.write_text('re\n1\n', encoding='utf-8')
        assert main(['classify', '--coeffs', str(coeffs)]) == EXIT_ERROR

    def test_solve_kernel_obstruction(self, tmp_path, small_job, write_job, capsys):
        small_job['operator'] = {'kind': 'oscillator', 'dim': 1, 'shift': 1.0}
        code = main(['solve', str(write_job(small_job)), '--kernel-policy', 'reject',
                     '--output', str(tmp_path / 'out')])
        assert code == EXIT_ERROR
        assert 'kernel obstruction' in capsys.readouterr().out

    def test_solve_with_projection(self, tmp_path, small_job, write_job, capsys):
        small_job['operator'] = {'kind': 'oscillator', 'dim': 1, 'shift': 1.0}
        out = tmp_path / 'out'
        code = main(['solve', str(write_job(small_job)), '--kernel-policy', 'project',
                     '--output', str(out)])
        assert code == EXIT_OK
        assert _report(out)['solve']['dropped_mass'] > 1.0
        assert 'Projected away' in capsys.readouterr().out

    def test_check_weights_file(self, tmp_path, capsys):
        weights = tmp_path / 'w.json'
        weights.write_text(json.dumps({'kind': 'gevrey', 'mu': 0.5, 'p_max': 256}), encoding='utf-8')
        assert main(['check-weights', '--weights', str(weights)]) == EXIT_OK
        assert '(M.1)  ✓' in capsys.readouterr().out

    def test_check_weights_with_fast_growth(self, tmp_path, capsys):
        log_m = np.exp(np.arange(41, dtype=float) / 2.0) - 1.0
        weights = tmp_path / 'w.json'
        weights.write_text(json.dumps({'kind': 'explicit', 'log_m': log_m.tolist()}), encoding='utf-8')
        assert main(['check-weights', '--weights', str(weights)]) == EXIT_OK
        assert "(M.2)' ❌" in capsys.readouterr().out

    def test_norms_report_coefficient_constants(self, tmp_path, small_job, write_job):
        small_job['h_grid'] = [2.0, 4.0, 8.0]
        out = tmp_path / 'out'
        assert main(['norms', str(write_job(small_job)), '--output', str(out)]) == EXIT_OK
        norms = _report(out)['norms']
        assert [row['h'] for row in norms['coefficients']['rows']] == [2.0, 4.0, 8.0]
        assert norms['coefficients']['log_upper_max'] <= 1e-9
        assert norms['inclusion_scale'] > 1.0
        assert 'plain_implies_iterate' in norms

    def test_spectrum(self, tmp_path, small_job, write_job, capsys):
        out = tmp_path / 'out'
        assert main(['spectrum', str(write_job(small_job)), '--output', str(out)]) == EXIT_OK
        assert (out / 'spectrum.csv').exists()
        assert 'eigenpairs trusted' in capsys.readouterr().out

    def test_no_command(self, capsys):
        assert main([]) == EXIT_ERROR
        assert 'usage' in capsys.readouterr().out

"""Tests for job configuration loading and setting resolution."""

import json

import pytest

from shubin_spectra.config import (
    DEFAULT_H_GRID,
    ENV_THREADS,
    JobConfig,
    resolve_job_path,
    resolve_threads,
)
from shubin_spectra.errors import ConfigError, InvalidArgumentError


class TestResolveThreads:
    def test_user_value_wins(self, monkeypatch):
        monkeypatch.setenv(ENV_THREADS, '8')
        assert resolve_threads(3) == 3

    def test_environment(self, monkeypatch):
        monkeypatch.setenv(ENV_THREADS, '4')
        assert resolve_threads() == 4

    def test_default(self, monkeypatch):
        monkeypatch.delenv(ENV_THREADS, raising=False)
        assert resolve_threads() == 1

    def test_invalid_environment_falls_back(self, monkeypatch, caplog):
        monkeypatch.setenv(ENV_THREADS, 'many')
        assert resolve_threads() == 1
        assert ENV_THREADS in caplog.text

    def test_invalid_user_value(self):
        with pytest.raises(InvalidArgumentError):
            resolve_threads(0)


class TestJobConfig:
    def test_bundled_job_by_name(self):
        config = JobConfig.load('ho1d_gevrey_half')
        assert config.per_axis == 128
        assert config.pad == 2
        assert config.quadrature_order == 160
        assert config.operator == {'kind': 'oscillator', 'dim': 1}
        assert config.test_function.name == 'gaussian'
        assert all(config.checks.values())
        assert config.source_path.name == 'ho1d_gevrey_half.json'

    def test_defaults(self, small_job):
        config = JobConfig.from_dict(small_job)
        assert config.quadrature_order == 48
        assert config.pad is None
        assert config.h_grid == DEFAULT_H_GRID
        assert config.kernel_policy == 'reject'

    def test_output_dir_override(self, small_job, tmp_path):
        config = JobConfig.from_dict(small_job, output_dir=tmp_path / 'out')
        assert config.output_dir == tmp_path / 'out'

    def test_missing_truncation_names_field(self, small_job):
        del small_job['truncation']
        with pytest.raises(ConfigError) as exc:
            JobConfig.from_dict(small_job)
        assert exc.value.field == 'per_axis'

    def test_unknown_check(self, small_job):
        small_job['checks'] = {'spectrum': True}
        with pytest.raises(ConfigError, match='unknown checks'):
            JobConfig.from_dict(small_job)

    def test_bad_grid(self, small_job):
        small_job['h_grid'] = [1.0, -2.0]
        with pytest.raises(ConfigError) as exc:
            JobConfig.from_dict(small_job)
        assert exc.value.field == 'h_grid'

    def test_unknown_test_function(self, small_job):
        small_job['test_function'] = {'name': 'sinc'}
        with pytest.raises(ConfigError):
            JobConfig.from_dict(small_job)

    @pytest.mark.parametrize('k', ['two', -1, 2.5, True])
    def test_bad_hermite_index(self, small_job, k):
        small_job['test_function'] = {'name': 'hermite_k', 'k': k}
        with pytest.raises(ConfigError) as exc:
            JobConfig.from_dict(small_job)
        assert exc.value.field == 'test_function.k'

    @pytest.mark.parametrize('pad', [True, -1, 'two'])
    def test_bad_pad(self, small_job, pad):
        small_job['truncation']['pad'] = pad
        with pytest.raises(ConfigError) as exc:
            JobConfig.from_dict(small_job)
        assert exc.value.field == 'truncation.pad'

    def test_missing_csv(self, small_job, tmp_path):
        small_job['test_function'] = {'csv': 'samples.csv'}
        with pytest.raises(ConfigError) as exc:
            JobConfig.from_dict(small_job, base_dir=tmp_path)
        assert exc.value.field == 'test_function.csv'

    def test_schema_version(self, small_job):
        small_job['schema_version'] = 2
        with pytest.raises(ConfigError):
            JobConfig.from_dict(small_job)

    def test_invalid_json(self, tmp_path):
        path = tmp_path / 'broken.json'
        path.write_text('{"operator": ', encoding='utf-8')
        with pytest.raises(ConfigError):
            JobConfig.load(path)

    def test_missing_job(self, tmp_path):
        with pytest.raises(ConfigError):
            resolve_job_path(tmp_path / 'nothing.json')

    def test_to_dict_is_json_and_path_free(self, small_job, write_job):
        config = JobConfig.load(write_job(small_job))
        data = config.to_dict()
        json.dumps(data)
        assert 'output_dir' not in data
        assert JobConfig.from_dict(data).to_dict() == data

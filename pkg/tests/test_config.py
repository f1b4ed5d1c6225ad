import json

import pytest

from vdkit.config import settings
from vdkit.config.pipeline import EndpointConfig, PipelineConfig, load_pipeline_config
from vdkit.exceptions import ConfigError
from vdkit.schemas.perturb import NormalizationRule


def test_defaults():
    config = load_pipeline_config()
    assert config.budget == 512
    assert config.ratios == (8, 1, 1)
    assert config.seed == settings.DEFAULT_SEED
    assert config.normalization is NormalizationRule.NONE
    endpoint = config.endpoint
    assert (endpoint.top_p, endpoint.temperature, endpoint.max_new_tokens) == (0.9, 0.0, 10)


def test_file_then_overrides(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({
        "seed": 3, "budget": 256, "ratios": "7:2:1", "normalization": "PdbertCleaner",
        "endpoint": {"model": "m1", "max_retries": 5},
    }))
    config = load_pipeline_config(path, seed=9, workers=None, endpoint={"model": "m2", "url": None})
    assert config.seed == 9
    assert config.budget == 256
    assert config.ratios == (7, 2, 1)
    assert config.normalization is NormalizationRule.PDBERT
    assert config.endpoint.model == "m2"
    assert config.endpoint.max_retries == 5
    assert config.workers == settings.WORKERS


@pytest.mark.parametrize("data", [{"ratios": "8:1:2"}, {"ratios": [5, 5]}, {"budget": 0}, {"normalization": "Black"}])
def test_invalid_values(tmp_path, data):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(data))
    with pytest.raises(ConfigError):
        load_pipeline_config(path)


def test_unreadable_config(tmp_path):
    with pytest.raises(ConfigError):
        load_pipeline_config(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    with pytest.raises(ConfigError):
        load_pipeline_config(bad)
    listed = tmp_path / "list.json"
    listed.write_text("[]")
    with pytest.raises(ConfigError):
        load_pipeline_config(listed)


def test_endpoint_validation():
    with pytest.raises(ValueError):
        EndpointConfig(top_p=1.5)
    assert PipelineConfig(ratios=[8, 1, 1]).ratios == (8, 1, 1)


def test_api_key_from_environment(monkeypatch):
    monkeypatch.setenv(settings.API_KEY_ENV, "token-123")
    assert settings.get_api_key() == "token-123"
    monkeypatch.delenv(settings.API_KEY_ENV)
    assert settings.get_api_key() is None

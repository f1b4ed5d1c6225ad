import json
import logging
from pathlib import Path
from typing import Optional, Tuple, Union

from pydantic import BaseModel, Field, ValidationError, field_validator

from vdkit.config import settings
from vdkit.exceptions import ConfigError
from vdkit.schemas.perturb import NormalizationRule

logger = logging.getLogger(__name__)


class EndpointConfig(BaseModel):
    url: str = Field(default_factory=lambda: settings.ENDPOINT_URL)
    model: str = Field(default_factory=lambda: settings.MODEL_NAME)
    # Decodificação: top-p 0.9, temperatura 0, no máximo 10 tokens novos
    top_p: float = Field(0.9, ge=0.0, le=1.0)
    temperature: float = Field(0.0, ge=0.0)
    max_new_tokens: int = Field(10, gt=0)
    timeout: float = Field(60.0, gt=0)
    max_retries: int = Field(3, ge=0)
    backoff_base: float = Field(1.0, ge=0)
    concurrency: int = Field(default_factory=lambda: settings.CONCURRENCY, gt=0)


class PipelineConfig(BaseModel):
    seed: int = Field(default_factory=lambda: settings.DEFAULT_SEED)
    budget: int = Field(settings.DEFAULT_BUDGET, gt=0)
    ratios: Tuple[int, int, int] = settings.DEFAULT_RATIOS
    normalization: NormalizationRule = NormalizationRule.NONE
    workers: int = Field(default_factory=lambda: settings.WORKERS, gt=0)
    endpoint: EndpointConfig = Field(default_factory=EndpointConfig)

    @field_validator("ratios", mode="before")
    @classmethod
    def ler_proporcoes(cls, v):
        if isinstance(v, str):
            v = [part for part in v.replace(",", ":").split(":") if part.strip()]
        return v

    @field_validator("ratios")
    @classmethod
    def proporcoes_somam_dez(cls, v):
        if any(r < 0 for r in v) or sum(v) != 10:
            raise ValueError(f"as proporções devem somar 10: {v}")
        return v


def load_pipeline_config(path: Optional[Union[str, Path]] = None, **overrides) -> PipelineConfig:
    """Arquivo JSON opcional, sobrescrito pelos valores explícitos (flags do CLI)."""
    data: dict = {}
    if path is not None:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as e:
            raise ConfigError(f"Não foi possível ler a configuração {path}: {e}") from e
        except json.JSONDecodeError as e:
            raise ConfigError(f"Configuração {path} não é JSON válido: {e.msg}") from e
        if not isinstance(data, dict):
            raise ConfigError(f"Configuração {path} deve ser um objeto JSON")
    endpoint_overrides = overrides.pop("endpoint", None) or {}
    data.update({k: v for k, v in overrides.items() if v is not None})
    if endpoint_overrides:
        endpoint = dict(data.get("endpoint") or {})
        endpoint.update({k: v for k, v in endpoint_overrides.items() if v is not None})
        data["endpoint"] = endpoint
    try:
        config = PipelineConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"Configuração inválida: {e.errors()[0].get('msg', e)}") from e
    logger.debug(f"Configuração carregada: seed={config.seed}, budget={config.budget}, ratios={config.ratios}")
    return config

from enum import Enum
from typing import Dict, Optional

from pydantic import BaseModel, Field

from vdkit.schemas.function import Label


class Verdict(str, Enum):
    VULNERABLE = "Vulnerable"
    NON_VULNERABLE = "NonVulnerable"
    ABSTAIN = "Abstain"

    @property
    def predicted_int(self) -> int:
        # Abstenção conta como previsão NonVulnerable nas métricas principais
        return 1 if self is Verdict.VULNERABLE else 0


class ConfusionCounts(BaseModel):
    tp: int = Field(0, ge=0)
    fp: int = Field(0, ge=0)
    tn: int = Field(0, ge=0)
    fn: int = Field(0, ge=0)
    abstain: int = Field(0, ge=0, description="Abstenções, já contadas como NonVulnerable em tn/fn")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


class MetricsReport(BaseModel):
    """Métricas indefinidas (denominador zero) ficam como None, nunca 0."""

    counts: ConfusionCounts
    accuracy: Optional[float] = None
    balanced_accuracy: Optional[float] = None
    f1: Optional[float] = None
    precision: Optional[float] = None
    recall: Optional[float] = None
    tnr: Optional[float] = None
    fpr: Optional[float] = None
    fnr: Optional[float] = None
    support_vulnerable: int = 0
    support_non_vulnerable: int = 0
    per_cwe_recall: Dict[str, Optional[float]] = Field(default_factory=dict)
    per_cwe_support: Dict[str, int] = Field(default_factory=dict)


class InferenceRecord(BaseModel):
    """Uma linha do log de requisições/respostas (JSONL), usada também no replay."""

    record_id: str
    verdict: Verdict
    reply: Optional[str] = None
    label: Optional[Label] = None
    cwe: str = "NONE"
    prompt_type: Optional[str] = None
    setting: Optional[str] = None
    model: Optional[str] = None
    attempts: int = 0
    request: Optional[dict] = None
    error: Optional[str] = None
    tags: Dict[str, str] = Field(default_factory=dict)

from enum import Enum
from typing import Dict

from pydantic import BaseModel, Field


class NormalizationRule(str, Enum):
    CODEXGLUE = "CodexGlueCleaner"
    PDBERT = "PdbertCleaner"
    NONE = "NoNormalization"


class TransformKind(str, Enum):
    COND_NEGATE = "CondNegate"
    COND_EXPAND = "CondExpand"
    LOOP_CONVERT = "LoopConvert"
    REL_OP_REVERSE = "RelOpReverse"


class AbstractionMap(BaseModel):
    """Identificador/literal original -> nome abstrato (VARk, PARAMk, STRINGk)."""

    mapping: Dict[str, str] = Field(default_factory=dict)
    variables: Dict[str, str] = Field(default_factory=dict)
    parameters: Dict[str, str] = Field(default_factory=dict)
    strings: Dict[str, str] = Field(default_factory=dict)

    @property
    def is_injective(self) -> bool:
        return len(set(self.mapping.values())) == len(self.mapping)


class TransformVariant(BaseModel):
    origin_id: str
    kind: TransformKind
    site_index: int = Field(..., ge=0)
    code: str


class VariantReport(BaseModel):
    """Contagem de variantes geradas e descartadas por tipo de transformação."""

    functions: int = 0
    generated: Dict[str, int] = Field(default_factory=dict)
    discarded: Dict[str, int] = Field(default_factory=dict)
    skipped_functions: int = 0

    @property
    def total(self) -> int:
        return sum(self.generated.values())

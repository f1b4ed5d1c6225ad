from datetime import date
from enum import Enum
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator


class Language(str, Enum):
    C = "C"
    CPP = "CPP"


class Label(str, Enum):
    VULNERABLE = "Vulnerable"
    NON_VULNERABLE = "NonVulnerable"

    @property
    def opposite(self) -> "Label":
        return Label.NON_VULNERABLE if self is Label.VULNERABLE else Label.VULNERABLE

    @property
    def as_int(self) -> int:
        return 1 if self is Label.VULNERABLE else 0


_LABEL_ALIASES = {
    "vulnerable": Label.VULNERABLE,
    "1": Label.VULNERABLE,
    "true": Label.VULNERABLE,
    "nonvulnerable": Label.NON_VULNERABLE,
    "non-vulnerable": Label.NON_VULNERABLE,
    "non_vulnerable": Label.NON_VULNERABLE,
    "0": Label.NON_VULNERABLE,
    "false": Label.NON_VULNERABLE,
}


class SourceFunction(BaseModel):
    """Uma função C/C++ do corpus, com rótulo, metadados do commit e vínculo de par de patch."""

    # Campos desconhecidos são preservados no round-trip do corpus
    model_config = ConfigDict(extra="allow")

    id: str = Field(..., min_length=1, description="Identificador opaco do registro")
    code: str = Field(..., min_length=1, description="Texto UTF-8 da função")
    language: Language = Field(Language.C, description="Linguagem da função")
    project: str = Field("", description="Projeto de origem")
    commit_id: str = Field(..., min_length=1, description="Hash do commit")
    commit_date: Optional[date] = Field(None, description="Data do commit (ISO-8601)")
    cwe_ids: List[str] = Field(default_factory=list, description="CWEs no formato CWE-119")
    label: Label = Field(..., description="Vulnerable antes do patch, NonVulnerable depois")
    pair_id: Optional[str] = Field(None, description="Liga a função pré-patch à pós-patch")

    @field_validator("label", mode="before")
    @classmethod
    def normalizar_label(cls, v):
        if isinstance(v, Label):
            return v
        chave = str(v).strip().lower()
        if chave in _LABEL_ALIASES:
            return _LABEL_ALIASES[chave]
        return v

    @field_validator("language", mode="before")
    @classmethod
    def normalizar_linguagem(cls, v):
        if isinstance(v, str):
            chave = v.strip().upper()
            return "CPP" if chave in ("C++", "CXX", "CPP") else chave
        return v

    @field_validator("commit_id")
    @classmethod
    def commit_hexadecimal(cls, v):
        v = v.strip().lower()
        if not all(c in "0123456789abcdef" for c in v):
            raise ValueError(f"commit_id não é hexadecimal: {v!r}")
        return v

    @field_validator("cwe_ids", mode="before")
    @classmethod
    def formatar_cwe(cls, v):
        if v is None:
            return []
        if isinstance(v, str):
            v = [v]
        formatados = []
        for cwe in v:
            texto = str(cwe).strip().upper()
            if not texto:
                continue
            if texto.isdigit():
                texto = f"CWE-{texto}"
            formatados.append(texto)
        return formatados

    @property
    def primary_cwe(self) -> str:
        return self.cwe_ids[0] if self.cwe_ids else "NONE"

    @property
    def is_vulnerable(self) -> bool:
        return self.label is Label.VULNERABLE

    def to_record(self) -> dict:
        """Serializa no formato do corpus, incluindo os campos extras."""
        return self.model_dump(mode="json")

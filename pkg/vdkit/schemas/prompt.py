from enum import Enum
from typing import Dict, List, Optional

from pydantic import BaseModel, Field, model_validator

from vdkit.schemas.function import Label

FEW_SHOT_COUNT = 4


class PromptType(str, Enum):
    RAW_CODE = "RawCode"
    FLAT_AST = "FlatAst"
    API_CALLS = "ApiCalls"
    DATA_FLOW = "DataFlow"


class PromptSetting(str, Enum):
    ZERO_SHOT = "ZeroShot"
    FEW_SHOT = "FewShot"


class Shot(BaseModel):
    user: str
    assistant: str


class PromptBundle(BaseModel):
    """Mensagens com papel (system/user/assistant); o chat template fica a cargo do endpoint."""

    record_id: str = ""
    system: str
    shots: List[Shot] = Field(default_factory=list)
    user: str
    prompt_type: PromptType = PromptType.RAW_CODE
    setting: PromptSetting = PromptSetting.ZERO_SHOT
    label: Optional[Label] = None
    cwe: str = "NONE"
    tags: Dict[str, str] = Field(default_factory=dict, description="Campos do registro de origem usados para agrupar métricas")

    @model_validator(mode="after")
    def validar_shots(self):
        if self.setting is PromptSetting.ZERO_SHOT and self.shots:
            raise ValueError("ZeroShot não leva exemplos")
        if self.setting is PromptSetting.FEW_SHOT and len(self.shots) != FEW_SHOT_COUNT:
            raise ValueError(f"FewShot exige exatamente {FEW_SHOT_COUNT} exemplos")
        return self

    def to_messages(self) -> List[Dict[str, str]]:
        messages = [{"role": "system", "content": self.system}]
        for shot in self.shots:
            messages.append({"role": "user", "content": shot.user})
            messages.append({"role": "assistant", "content": shot.assistant})
        messages.append({"role": "user", "content": self.user})
        return messages

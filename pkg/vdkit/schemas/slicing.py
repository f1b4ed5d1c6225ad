from typing import List

from pydantic import BaseModel, Field


class SliceResult(BaseModel):
    record_id: str = ""
    anchor_lines: List[int] = Field(default_factory=list)
    selected_lines: List[int] = Field(default_factory=list, description="Linhas emitidas, em ordem do código")
    sliced_code: str
    token_count: int = Field(..., ge=0)
    budget: int = Field(..., gt=0)
    whole_function: bool = False
    counter: str = "core"

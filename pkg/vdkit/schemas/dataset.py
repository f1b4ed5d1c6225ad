from enum import Enum
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator


class Split(str, Enum):
    TRAIN = "Train"
    VALID = "Valid"
    TEST = "Test"


class SplitAssignment(BaseModel):
    """record_id -> partição; imutável depois de construída."""

    model_config = ConfigDict(frozen=True)

    assignments: Dict[str, Split] = Field(default_factory=dict)
    ratios: Tuple[int, int, int] = (8, 1, 1)

    def split_of(self, record_id: str) -> Optional[Split]:
        return self.assignments.get(record_id)

    def ids_in(self, split: Split) -> List[str]:
        return sorted(rid for rid, s in self.assignments.items() if s is split)

    def counts(self) -> Dict[str, int]:
        counts = {split.value: 0 for split in Split}
        for split in self.assignments.values():
            counts[split.value] += 1
        return counts


class RejectionReason(str, Enum):
    FORMAT_ERROR = "FormatError"
    PARSE_FAILURE = "ParseFailure"
    ENCODING_ERROR = "EncodingError"
    MISSING_DATE = "MissingDate"
    PAIR_LABEL_CONFLICT = "PairLabelConflict"
    DUPLICATE_ID = "DuplicateId"


class Rejection(BaseModel):
    line_number: int = Field(..., ge=1)
    record_id: Optional[str] = None
    reason: RejectionReason
    message: str = ""


class IngestReport(BaseModel):
    path: str = ""
    lines: int = 0
    accepted: int = 0
    rejections: List[Rejection] = Field(default_factory=list)

    @property
    def rejected(self) -> int:
        return len(self.rejections)

    def counts_by_reason(self) -> Dict[str, int]:
        counts: Dict[str, int] = {}
        for rejection in self.rejections:
            counts[rejection.reason.value] = counts.get(rejection.reason.value, 0) + 1
        return counts


class BalanceResult(BaseModel):
    assignment: SplitAssignment
    dropped_ids: List[str] = Field(default_factory=list)
    vulnerable: int = 0
    non_vulnerable: int = 0
    insufficient_negatives: bool = False
    seed: int = 0


class AuditReport(BaseModel):
    case1_violations: List[str] = Field(default_factory=list, description="pair_ids divididos entre partições")
    case2_violations: List[str] = Field(default_factory=list, description="commit_ids divididos entre partições")
    duplicate_hash_violations: List[Tuple[str, str]] = Field(default_factory=list)
    truncation_collisions: List[str] = Field(default_factory=list)
    total_records: int = 0
    total_pairs: int = 0
    total_commits: int = 0
    budget: Optional[int] = None

    @staticmethod
    def _ratio(count: int, total: int) -> float:
        return count / total if total else 0.0

    @property
    def case1_ratio(self) -> float:
        return self._ratio(len(self.case1_violations), self.total_pairs)

    @property
    def case2_ratio(self) -> float:
        return self._ratio(len(self.case2_violations), self.total_commits)

    @property
    def duplicate_ratio(self) -> float:
        return self._ratio(len(self.duplicate_hash_violations), self.total_records)

    @property
    def truncation_ratio(self) -> float:
        return self._ratio(len(self.truncation_collisions), self.total_pairs)

    @property
    def passed(self) -> bool:
        return not (
            self.case1_violations
            or self.case2_violations
            or self.duplicate_hash_violations
            or self.truncation_collisions
        )

    def to_document(self) -> dict:
        document = self.model_dump(mode="json")
        document.update(
            case1_ratio=self.case1_ratio,
            case2_ratio=self.case2_ratio,
            duplicate_ratio=self.duplicate_ratio,
            truncation_ratio=self.truncation_ratio,
            passed=self.passed,
        )
        return document


class SplitStats(BaseModel):
    vulnerable: int = 0
    non_vulnerable: int = 0

    @property
    def total(self) -> int:
        return self.vulnerable + self.non_vulnerable


class DatasetSummary(BaseModel):
    """Tabela de estatísticas: contagens por partição e rótulo, CWE e projeto."""

    total: int = 0
    splits: Dict[str, SplitStats] = Field(default_factory=dict)
    cwe_counts: Dict[str, int] = Field(default_factory=dict)
    project_counts: Dict[str, int] = Field(default_factory=dict)
    pairs: int = 0

    @field_validator("splits")
    @classmethod
    def ordenar_splits(cls, v):
        order = [s.value for s in Split] + ["Unassigned"]
        return {k: v[k] for k in sorted(v, key=lambda k: order.index(k) if k in order else len(order))}

import hashlib
import logging
from collections import defaultdict
from itertools import combinations
from typing import Dict, List, Optional, Sequence

from vdkit.config.settings import DEFAULT_BUDGET
from vdkit.schemas.dataset import AuditReport, SplitAssignment
from vdkit.schemas.function import SourceFunction
from vdkit.schemas.perturb import NormalizationRule
from vdkit.services.normalization import NormalizationService
from vdkit.services.tokens import CoreTokenCounter, TokenBudgetCounter

logger = logging.getLogger(__name__)


def code_hash(code: str) -> str:
    # Espaço nas pontas não distingue duas funções
    normalized = NormalizationService.normalize(code, NormalizationRule.CODEXGLUE).strip()
    return hashlib.sha256(normalized.encode("utf-8")).hexdigest()


def complete_pairs(records: Sequence[SourceFunction]) -> Dict[str, List[SourceFunction]]:
    """pair_id -> [vulnerável, não vulnerável], só para pares completos."""
    members: Dict[str, List[SourceFunction]] = defaultdict(list)
    for record in records:
        if record.pair_id is not None:
            members[record.pair_id].append(record)
    pairs = {}
    for pair_id, group in members.items():
        if len(group) == 2 and group[0].label is not group[1].label:
            pairs[pair_id] = sorted(group, key=lambda r: not r.is_vulnerable)
    return pairs


class AuditService:
    @staticmethod
    def audit_leakage(assignment: SplitAssignment, records: Sequence[SourceFunction]) -> AuditReport:
        """Case 1: par dividido entre partições; Case 2: commit dividido; mais clones por hash normalizado."""
        placed = [r for r in records if assignment.split_of(r.id) is not None]
        by_pair: Dict[str, set] = defaultdict(set)
        by_commit: Dict[str, set] = defaultdict(set)
        pair_sizes: Dict[str, int] = defaultdict(int)
        by_hash: Dict[str, List[SourceFunction]] = defaultdict(list)
        for record in placed:
            split = assignment.split_of(record.id)
            by_commit[record.commit_id].add(split)
            if record.pair_id is not None:
                by_pair[record.pair_id].add(split)
                pair_sizes[record.pair_id] += 1
            by_hash[code_hash(record.code)].append(record)

        duplicates = []
        for group in by_hash.values():
            for a, b in combinations(sorted(group, key=lambda r: r.id), 2):
                if assignment.split_of(a.id) is not assignment.split_of(b.id):
                    duplicates.append((a.id, b.id))

        report = AuditReport(
            case1_violations=sorted(p for p, splits in by_pair.items() if len(splits) > 1),
            case2_violations=sorted(c for c, splits in by_commit.items() if len(splits) > 1),
            duplicate_hash_violations=sorted(duplicates),
            total_records=len(placed),
            total_pairs=sum(1 for size in pair_sizes.values() if size >= 2),
            total_commits=len(by_commit),
        )
        if report.passed:
            logger.info(f"Auditoria de vazamento sem violações ({report.total_records} registros)")
        else:
            logger.warning(
                f"Vazamento: {len(report.case1_violations)} pares, {len(report.case2_violations)} commits, "
                f"{len(report.duplicate_hash_violations)} duplicatas entre partições"
            )
        return report

    @staticmethod
    def audit_truncation(
        records: Sequence[SourceFunction],
        budget: int = DEFAULT_BUDGET,
        tokenizer: Optional[TokenBudgetCounter] = None,
    ) -> AuditReport:
        """Pares cujas versões truncadas em `budget` tokens ficam idênticas apesar dos rótulos opostos."""
        pairs = complete_pairs(records)
        collisions = []
        for pair_id in sorted(pairs):
            vulnerable, patched = pairs[pair_id]
            counter = tokenizer or CoreTokenCounter(vulnerable.language)
            if counter.truncate(vulnerable.code, budget).encode("utf-8") == counter.truncate(patched.code, budget).encode("utf-8"):
                collisions.append(pair_id)
        report = AuditReport(
            truncation_collisions=collisions,
            total_records=len(records),
            total_pairs=len(pairs),
            budget=budget,
        )
        logger.info(
            f"Auditoria de truncamento ({budget} tokens): {len(collisions)} de {len(pairs)} pares "
            f"({report.truncation_ratio:.1%}) ficam idênticos"
        )
        return report

import logging
import math
import random
from collections import Counter, defaultdict
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import networkx as nx

from vdkit.config.settings import DEFAULT_RATIOS
from vdkit.exceptions import ConfigError, EmptyTrainingPositives, MissingDateError
from vdkit.schemas.dataset import BalanceResult, DatasetSummary, Split, SplitAssignment, SplitStats
from vdkit.schemas.function import SourceFunction

logger = logging.getLogger(__name__)


def _sort_key(record: SourceFunction) -> tuple:
    return (record.commit_date, record.commit_id, record.id)


def _round_half_up(value: float) -> int:
    return math.floor(value + 0.5)


def target_counts(n: int, ratios: Sequence[int]) -> Tuple[int, int, int]:
    """Tamanhos de Train/Valid/Test para um grupo com n registros."""
    if n == 1:
        return 1, 0, 0
    total = sum(ratios)
    n_train = _round_half_up(n * ratios[0] / total)
    n_valid = min(_round_half_up(n * ratios[1] / total), n - n_train)
    n_test = n - n_train - n_valid
    # Grupos pequenos: pelo menos um registro no Test
    if n_test == 0 and ratios[2] > 0:
        if n_train > 1:
            n_train -= 1
        elif n_valid > 0:
            n_valid -= 1
        n_test = n - n_train - n_valid
    return n_train, n_valid, n_test


def partition_units(records: Iterable[SourceFunction]) -> List[List[SourceFunction]]:
    """Componentes conexas de registros que compartilham commit_id ou pair_id."""
    graph = nx.Graph()
    by_key: Dict[tuple, List[str]] = defaultdict(list)
    index: Dict[str, SourceFunction] = {}
    for record in records:
        index[record.id] = record
        graph.add_node(record.id)
        by_key[("commit", record.commit_id)].append(record.id)
        if record.pair_id is not None:
            by_key[("pair", record.pair_id)].append(record.id)
    for members in by_key.values():
        nx.add_path(graph, members)
    units = [sorted((index[rid] for rid in component), key=_sort_key) for component in nx.connected_components(graph)]
    units.sort(key=lambda unit: _sort_key(unit[0]))
    return units


class PartitionService:
    @staticmethod
    def validate_ratios(ratios: Sequence[int]) -> Tuple[int, int, int]:
        ratios = tuple(int(r) for r in ratios)
        if len(ratios) != 3 or any(r < 0 for r in ratios) or sum(ratios) != 10:
            logger.error(f"Proporções inválidas: {ratios}")
            raise ConfigError(f"Proporções inválidas {ratios}: são três inteiros que somam 10")
        return ratios

    @staticmethod
    def split_by_cwe_time(records: Sequence[SourceFunction], ratios: Sequence[int] = DEFAULT_RATIOS) -> SplitAssignment:
        """Agrupa por CWE principal, ordena por data do commit e corta em Train/Valid/Test.

        Registros de um mesmo commit ou par formam uma unidade indivisível; o corte
        avança até o fim da unidade que o atravessa.
        """
        ratios = PartitionService.validate_ratios(ratios)
        missing = [r.id for r in records if r.commit_date is None]
        if missing:
            logger.error(f"Partição abortada: {len(missing)} registros sem commit_date")
            raise MissingDateError(f"{len(missing)} registros sem commit_date (ex.: {missing[0]})")

        groups: Dict[str, List[List[SourceFunction]]] = defaultdict(list)
        for unit in partition_units(records):
            groups[unit[0].primary_cwe].append(unit)

        assignments: Dict[str, Split] = {}
        for cwe in sorted(groups):
            units = groups[cwe]
            n = sum(len(unit) for unit in units)
            n_train, n_valid, _ = target_counts(n, ratios)
            seen = 0
            for unit in units:
                if seen < n_train:
                    split = Split.TRAIN
                elif seen < n_train + n_valid:
                    split = Split.VALID
                else:
                    split = Split.TEST
                for record in unit:
                    assignments[record.id] = split
                seen += len(unit)
            logger.debug(f"Grupo {cwe}: {n} registros, alvo {n_train}/{n_valid}/{n - n_train - n_valid}")

        assignment = SplitAssignment(assignments=assignments, ratios=ratios)
        logger.info(f"Partição de {len(records)} registros em {len(groups)} grupos de CWE: {assignment.counts()}")
        return assignment

    @staticmethod
    def balance_training(assignment: SplitAssignment, records: Sequence[SourceFunction], seed: int) -> BalanceResult:
        """Subamostragem 1:1 do Train; Valid e Test ficam intactos."""
        train_ids = set(assignment.ids_in(Split.TRAIN))
        train = [r for r in records if r.id in train_ids]
        positives = sorted(r.id for r in train if r.is_vulnerable)
        negatives = sorted(r.id for r in train if not r.is_vulnerable)
        if not positives:
            logger.error(f"Balanceamento abortado: nenhum vulnerável entre {len(train)} registros do Train")
            raise EmptyTrainingPositives("Train sem registros vulneráveis")

        insufficient = len(negatives) < len(positives)
        if insufficient:
            logger.warning(
                f"Negativos insuficientes no Train ({len(negatives)} < {len(positives)}); todos mantidos"
            )
            kept_negatives = set(negatives)
        else:
            kept_negatives = set(random.Random(seed).sample(negatives, len(positives)))

        dropped = sorted(set(negatives) - kept_negatives)
        dropped_set = set(dropped)
        balanced = SplitAssignment(
            assignments={rid: s for rid, s in assignment.assignments.items() if rid not in dropped_set},
            ratios=assignment.ratios,
        )
        logger.info(f"Train balanceado: {len(positives)} vulneráveis, {len(kept_negatives)} não vulneráveis")
        return BalanceResult(
            assignment=balanced,
            dropped_ids=dropped,
            vulnerable=len(positives),
            non_vulnerable=len(kept_negatives),
            insufficient_negatives=insufficient,
            seed=seed,
        )

    @staticmethod
    def summarize(records: Sequence[SourceFunction], assignment: Optional[SplitAssignment] = None) -> DatasetSummary:
        splits: Dict[str, SplitStats] = {}
        cwe_counts: Counter = Counter()
        project_counts: Counter = Counter()
        pair_ids = set()
        for record in records:
            split = assignment.split_of(record.id) if assignment is not None else None
            if assignment is not None and split is None:
                # Registro fora da partição (ex.: descartado pelo balanceamento)
                continue
            key = split.value if split is not None else "Unassigned"
            stats = splits.setdefault(key, SplitStats())
            if record.is_vulnerable:
                stats.vulnerable += 1
            else:
                stats.non_vulnerable += 1
            cwe_counts[record.primary_cwe] += 1
            project_counts[record.project or "unknown"] += 1
            if record.pair_id is not None:
                pair_ids.add(record.pair_id)
        return DatasetSummary(
            total=sum(s.total for s in splits.values()),
            splits=splits,
            cwe_counts=dict(sorted(cwe_counts.items())),
            project_counts=dict(sorted(project_counts.items())),
            pairs=len(pair_ids),
        )

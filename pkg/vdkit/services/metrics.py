import csv
import logging
from collections import defaultdict
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Union

from sklearn.metrics import confusion_matrix

from vdkit.exceptions import DatasetIOError, EmptyInputError, MisalignedInputError
from vdkit.schemas.evaluation import ConfusionCounts, InferenceRecord, MetricsReport, Verdict
from vdkit.schemas.function import Label

logger = logging.getLogger(__name__)

METRIC_NAMES = ("accuracy", "balanced_accuracy", "f1", "precision", "recall", "tnr", "fpr", "fnr")


def _ratio(numerator: int, denominator: int) -> Optional[float]:
    return numerator / denominator if denominator else None


def _primary(cwe) -> str:
    if isinstance(cwe, (list, tuple)):
        return cwe[0] if cwe else "NONE"
    return cwe or "NONE"


def metrics_from_counts(counts: ConfusionCounts) -> Dict[str, Optional[float]]:
    tp, fp, tn, fn = counts.tp, counts.fp, counts.tn, counts.fn
    precision = _ratio(tp, tp + fp)
    recall = _ratio(tp, tp + fn)
    tnr = _ratio(tn, tn + fp)
    f1 = None
    if precision is not None and recall is not None and precision + recall > 0:
        f1 = 2 * precision * recall / (precision + recall)
    return {
        "accuracy": _ratio(tp + tn, tp + tn + fp + fn),
        "balanced_accuracy": (recall + tnr) / 2 if recall is not None and tnr is not None else None,
        "f1": f1,
        "precision": precision,
        "recall": recall,
        "tnr": tnr,
        "fpr": _ratio(fp, fp + tn),
        "fnr": _ratio(fn, fn + tp),
    }


class MetricsService:
    @staticmethod
    def confusion(verdicts: Sequence[Verdict], labels: Sequence[Label]) -> ConfusionCounts:
        y_true = [Label(label).as_int for label in labels]
        y_pred = [Verdict(verdict).predicted_int for verdict in verdicts]
        tn, fp, fn, tp = confusion_matrix(y_true, y_pred, labels=[0, 1]).ravel()
        abstain = sum(1 for v in verdicts if Verdict(v) is Verdict.ABSTAIN)
        return ConfusionCounts(tp=int(tp), fp=int(fp), tn=int(tn), fn=int(fn), abstain=abstain)

    @staticmethod
    def score(
        verdicts: Sequence[Verdict],
        labels: Sequence[Label],
        cwe_tags: Optional[Sequence] = None,
    ) -> MetricsReport:
        """Seis métricas (mais fpr/fnr) a partir da matriz de confusão; abstenções contam como NonVulnerable."""
        if not verdicts:
            raise EmptyInputError("Nenhum veredito para pontuar")
        if len(verdicts) != len(labels) or (cwe_tags is not None and len(cwe_tags) != len(labels)):
            raise MisalignedInputError(
                f"Listas desalinhadas: {len(verdicts)} vereditos, {len(labels)} rótulos"
                + (f", {len(cwe_tags)} CWEs" if cwe_tags is not None else "")
            )
        counts = MetricsService.confusion(verdicts, labels)

        per_cwe_hits: Dict[str, int] = defaultdict(int)
        per_cwe_support: Dict[str, int] = defaultdict(int)
        if cwe_tags is not None:
            for verdict, label, cwe in zip(verdicts, labels, cwe_tags):
                if Label(label) is not Label.VULNERABLE:
                    continue
                group = _primary(cwe)
                per_cwe_support[group] += 1
                per_cwe_hits[group] += Verdict(verdict) is Verdict.VULNERABLE

        return MetricsReport(
            counts=counts,
            support_vulnerable=counts.tp + counts.fn,
            support_non_vulnerable=counts.tn + counts.fp,
            per_cwe_recall={cwe: _ratio(per_cwe_hits[cwe], n) for cwe, n in sorted(per_cwe_support.items())},
            per_cwe_support=dict(sorted(per_cwe_support.items())),
            **metrics_from_counts(counts),
        )

    @staticmethod
    def score_records(records: Sequence[InferenceRecord]) -> MetricsReport:
        missing = [r.record_id for r in records if r.label is None]
        if missing:
            raise MisalignedInputError(f"{len(missing)} respostas sem rótulo (ex.: {missing[0]})")
        return MetricsService.score(
            [r.verdict for r in records], [r.label for r in records], [r.cwe for r in records]
        )

    @staticmethod
    def score_by_group(
        records: Sequence[InferenceRecord],
        key: Union[str, Callable[[InferenceRecord], str]],
    ) -> Dict[str, MetricsReport]:
        """Um relatório por valor de um campo (ex.: prompt_type, transform_kind)."""
        getter = key if callable(key) else (lambda r: str(getattr(r, key, None) or r.tags.get(key)))
        groups: Dict[str, List[InferenceRecord]] = defaultdict(list)
        for record in records:
            groups[getter(record)].append(record)
        return {group: MetricsService.score_records(members) for group, members in sorted(groups.items())}

    @staticmethod
    def compare_reports(base: MetricsReport, perturbed: MetricsReport) -> Dict[str, Optional[float]]:
        """Variação de cada métrica (perturbado - original); None se alguma for indefinida."""
        deltas = {}
        for name in METRIC_NAMES:
            before, after = getattr(base, name), getattr(perturbed, name)
            deltas[name] = after - before if before is not None and after is not None else None
        return deltas

    @staticmethod
    def write_metrics_csv(report: MetricsReport, path: Union[str, Path]) -> None:
        rows = [("metric", "scope", "value")]
        rows.extend((name, "all", getattr(report, name)) for name in METRIC_NAMES)
        for field in ("tp", "fp", "tn", "fn", "abstain"):
            rows.append((field, "all", getattr(report.counts, field)))
        for cwe, recall in report.per_cwe_recall.items():
            rows.append(("recall", cwe, recall))
        try:
            target = Path(path)
            target.parent.mkdir(parents=True, exist_ok=True)
            with open(target, "w", newline="", encoding="utf-8") as handle:
                writer = csv.writer(handle)
                for metric, scope, value in rows:
                    writer.writerow([metric, scope, "" if value is None else value])
        except OSError as e:
            logger.error(f"Erro ao exportar métricas para {path}: {e}")
            raise DatasetIOError(f"Não foi possível escrever {path}: {e}") from e
        logger.info(f"Métricas exportadas para {path}")

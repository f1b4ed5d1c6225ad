import functools
import logging
from typing import List, Tuple

from vdkit.commands.common import add_output, emit_jsonl, load_records, print_summary
from vdkit.config.pipeline import PipelineConfig
from vdkit.exceptions import ConfigError, ParseFailure
from vdkit.schemas.function import SourceFunction
from vdkit.schemas.perturb import NormalizationRule, TransformKind, VariantReport
from vdkit.services.abstraction import AbstractionService
from vdkit.services.normalization import NormalizationService
from vdkit.services.transforms import TransformService
from vdkit.services.workers import parallel_map

logger = logging.getLogger(__name__)


def parse_kinds(text: str) -> Tuple[TransformKind, ...]:
    if text.strip().lower() == "all":
        return tuple(TransformKind)
    try:
        return tuple(TransformKind(part.strip()) for part in text.split(",") if part.strip())
    except ValueError as e:
        raise ConfigError(f"Transformação desconhecida em {text!r}; opções: all, {', '.join(k.value for k in TransformKind)}") from e


def variant_rows(record: SourceFunction, kinds: Tuple[TransformKind, ...]) -> Tuple[List[dict], VariantReport]:
    report = VariantReport()
    try:
        variants = TransformService.generate_variants(record, kinds, report)
    except ParseFailure as e:
        logger.warning(f"Registro {record.id} ignorado: {e}")
        report.skipped_functions += 1
        return [], report
    rows = []
    for variant in variants:
        row = record.to_record()
        row.update(
            id=f"{record.id}::{variant.kind.value}::{variant.site_index}",
            code=variant.code,
            transform_kind=variant.kind.value,
            site_index=variant.site_index,
            origin_id=record.id,
        )
        rows.append(row)
    return rows, report


def transform(args, config: PipelineConfig) -> int:
    kinds = parse_kinds(args.kind)
    records = load_records(args.input)
    results = parallel_map(functools.partial(variant_rows, kinds=kinds), records, config.workers, desc="transform")
    total = VariantReport()
    rows: List[dict] = []
    for record_rows, report in results:
        rows.extend(record_rows)
        total.functions += report.functions
        total.skipped_functions += report.skipped_functions
        for kind, count in report.generated.items():
            total.generated[kind] = total.generated.get(kind, 0) + count
        for kind, count in report.discarded.items():
            total.discarded[kind] = total.discarded.get(kind, 0) + count
    emit_jsonl(rows, args.output)
    logger.info(f"{total.total} variantes de {total.functions} funções; descartadas: {total.discarded}")
    if args.output is not None:
        print_summary({**total.model_dump(), "total": total.total})
    return 0


def abstract_record(record: SourceFunction) -> Tuple[dict, dict]:
    code, mapping = AbstractionService.abstract(record)
    row = record.to_record()
    row.update(code=code, abstracted=True)
    return row, {"id": record.id, **mapping.model_dump()}


def abstract(args, config: PipelineConfig) -> int:
    records = load_records(args.input)
    results = parallel_map(abstract_record, records, config.workers, desc="abstract")
    emit_jsonl((row for row, _ in results), args.output)
    if args.map_output:
        emit_jsonl((mapping for _, mapping in results), args.map_output)
    return 0


def normalize(args, config: PipelineConfig) -> int:
    rule = NormalizationRule(args.rule) if args.rule is not None else config.normalization
    rows = []
    for record in load_records(args.input):
        row = record.to_record()
        row.update(code=NormalizationService.normalize(record.code, rule), normalization=rule.value)
        rows.append(row)
    emit_jsonl(rows, args.output)
    logger.info(f"{len(rows)} registros normalizados com {rule.value}")
    return 0


def register(subparsers) -> None:
    parser = subparsers.add_parser("transform", help="Gera uma variante por sítio elegível de cada transformação")
    parser.add_argument("input", help="Corpus JSONL")
    parser.add_argument("--kind", default="all", help="all ou lista separada por vírgulas (CondNegate,CondExpand,LoopConvert,RelOpReverse)")
    add_output(parser, "Variantes como registros do corpus (JSONL)")
    parser.set_defaults(handler=transform)

    parser = subparsers.add_parser("abstract", help="Troca variáveis, parâmetros e strings por VARk/PARAMk/STRINGk")
    parser.add_argument("input", help="Corpus JSONL")
    parser.add_argument("--map-output", default=None, help="Arquivo lateral com os mapas de abstração (JSONL)")
    add_output(parser, "Corpus abstraído (JSONL)")
    parser.set_defaults(handler=abstract)

    parser = subparsers.add_parser("normalize", help="Normalização de espaços em branco")
    parser.add_argument("input", help="Corpus JSONL")
    parser.add_argument("--rule", choices=[r.value for r in NormalizationRule], default=None)
    add_output(parser, "Corpus normalizado (JSONL)")
    parser.set_defaults(handler=normalize)

import logging

from vdkit.commands.common import add_output, emit_document, emit_jsonl, load_assignment, load_records, print_summary, resolve
from vdkit.config.pipeline import PipelineConfig
from vdkit.services.audit import AuditService
from vdkit.services.corpus import CorpusService
from vdkit.services.partition import PartitionService
from vdkit.services.tokens import COUNTERS, get_counter

logger = logging.getLogger(__name__)


def _ratios(text: str):
    return tuple(int(part) for part in text.replace(",", ":").split(":"))


def ingest(args, config: PipelineConfig) -> int:
    records, report = CorpusService.ingest(args.input)
    emit_jsonl((record.to_record() for record in records), args.output)
    if args.report:
        CorpusService.write_document(args.report, report.model_dump(mode="json"))
    summary = {"accepted": report.accepted, "rejected": report.rejected, "reasons": report.counts_by_reason()}
    if args.output is not None:
        print_summary(summary)
    return 0


def split(args, config: PipelineConfig) -> int:
    ratios = args.ratios if args.ratios is not None else config.ratios
    records = load_records(args.input)
    assignment = PartitionService.split_by_cwe_time(records, ratios)
    emit_document(assignment.model_dump(mode="json"), args.output)
    if args.output is not None:
        print_summary(assignment.counts())
    return 0


def balance(args, config: PipelineConfig) -> int:
    assignment = load_assignment(args.splits)
    records = load_records(args.input)
    result = PartitionService.balance_training(assignment, records, resolve(args, config, "seed"))
    emit_document(result.assignment.model_dump(mode="json"), args.output)
    if args.output is not None:
        print_summary({
            "vulnerable": result.vulnerable,
            "non_vulnerable": result.non_vulnerable,
            "dropped": len(result.dropped_ids),
            "insufficient_negatives": result.insufficient_negatives,
        })
    return 0


def audit(args, config: PipelineConfig) -> int:
    assignment = load_assignment(args.splits)
    records = load_records(args.input)
    report = AuditService.audit_leakage(assignment, records)
    if args.truncation:
        budget = resolve(args, config, "budget")
        truncation = AuditService.audit_truncation(records, budget, get_counter(args.counter))
        report = report.model_copy(update={"truncation_collisions": truncation.truncation_collisions, "budget": budget})
    emit_document(report.to_document(), args.output)
    if not report.passed:
        logger.error(
            f"Auditoria reprovada: case1={report.case1_violations} case2={report.case2_violations} "
            f"duplicatas={len(report.duplicate_hash_violations)} truncamento={len(report.truncation_collisions)}"
        )
        return 1
    return 0


def stats(args, config: PipelineConfig) -> int:
    records = load_records(args.input)
    assignment = load_assignment(args.splits) if args.splits else None
    summary = PartitionService.summarize(records, assignment)
    document = summary.model_dump(mode="json")
    for name, split_stats in summary.splits.items():
        document["splits"][name]["total"] = split_stats.total
    emit_document(document, args.output)
    return 0


def register(subparsers) -> None:
    parser = subparsers.add_parser("ingest", help="Valida um corpus JSONL e separa os registros rejeitados")
    parser.add_argument("input", help="Corpus JSONL")
    parser.add_argument("--report", default=None, help="Grava o relatório de rejeições (JSON)")
    add_output(parser, "Registros aceitos (JSONL)")
    parser.set_defaults(handler=ingest)

    parser = subparsers.add_parser("split", help="Partição por CWE e data do commit")
    parser.add_argument("input", help="Corpus JSONL")
    parser.add_argument("--ratios", type=_ratios, default=None, help="Proporções Train:Valid:Test (padrão 8:1:1)")
    add_output(parser, "Arquivo de partição (JSON)")
    parser.set_defaults(handler=split)

    parser = subparsers.add_parser("balance", help="Subamostragem 1:1 do Train")
    parser.add_argument("splits", help="Arquivo de partição (JSON)")
    parser.add_argument("input", help="Corpus JSONL")
    parser.add_argument("--seed", type=int, default=None)
    add_output(parser, "Partição balanceada (JSON)")
    parser.set_defaults(handler=balance)

    parser = subparsers.add_parser("audit", help="Auditoria de vazamento (Case 1/2, duplicatas) e truncamento")
    parser.add_argument("splits", help="Arquivo de partição (JSON)")
    parser.add_argument("input", help="Corpus JSONL")
    parser.add_argument("--truncation", action="store_true", help="Inclui a auditoria de colisão por truncamento")
    parser.add_argument("--budget", type=int, default=None, help="Orçamento de tokens (padrão 512)")
    parser.add_argument("--counter", choices=sorted(COUNTERS), default="core")
    add_output(parser, "Relatório de auditoria (JSON)")
    parser.set_defaults(handler=audit)

    parser = subparsers.add_parser("stats", help="Estatísticas do corpus por partição, CWE e projeto")
    parser.add_argument("input", help="Corpus JSONL")
    parser.add_argument("--splits", default=None, help="Arquivo de partição (JSON)")
    add_output(parser)
    parser.set_defaults(handler=stats)

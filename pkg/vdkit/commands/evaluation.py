import logging
from typing import List

from vdkit.commands.common import add_output, emit_document, emit_jsonl
from vdkit.config.pipeline import PipelineConfig
from vdkit.exceptions import ConfigError, FormatError
from vdkit.schemas.evaluation import InferenceRecord, MetricsReport
from vdkit.schemas.prompt import PromptBundle
from vdkit.services.corpus import CorpusService
from vdkit.services.inference import ChatEndpointClient, InferenceService
from vdkit.services.metrics import MetricsService

logger = logging.getLogger(__name__)


def _load_bundles(path: str) -> List[PromptBundle]:
    bundles = []
    for data in CorpusService.iter_dicts(path):
        data.pop("messages", None)
        try:
            bundles.append(PromptBundle.model_validate(data))
        except ValueError as e:
            raise FormatError(f"{path}: bundle inválido ({e})") from e
    return bundles


def _load_verdicts(path: str) -> List[InferenceRecord]:
    try:
        return [InferenceRecord.model_validate(data) for data in CorpusService.iter_dicts(path)]
    except ValueError as e:
        raise FormatError(f"{path}: veredito inválido ({e})") from e


def _load_report(path: str) -> MetricsReport:
    try:
        return MetricsReport.model_validate(CorpusService.read_document(path))
    except ValueError as e:
        raise FormatError(f"{path}: relatório de métricas inválido ({e})") from e


def run(args, config: PipelineConfig) -> int:
    if args.replay:
        records = InferenceService.replay(args.replay)
    else:
        if args.bundles is None:
            raise ConfigError("Informe o arquivo de bundles ou --replay")
        endpoint = config.endpoint
        if args.url or args.model or args.concurrency:
            endpoint = endpoint.model_copy(update={
                k: v for k, v in (("url", args.url), ("model", args.model), ("concurrency", args.concurrency)) if v
            })
        bundles = _load_bundles(args.bundles)
        records = InferenceService.run_inference(bundles, client=ChatEndpointClient(endpoint), log_path=args.log)
    emit_jsonl((r.model_dump(mode="json") for r in records), args.output)
    return 0


def score(args, config: PipelineConfig) -> int:
    records = _load_verdicts(args.verdicts)
    report = MetricsService.score_records(records)
    document = report.model_dump(mode="json")
    if args.group_by:
        groups = MetricsService.score_by_group(records, args.group_by)
        document["groups"] = {name: r.model_dump(mode="json") for name, r in groups.items()}
    emit_document(document, args.output)
    if args.csv:
        MetricsService.write_metrics_csv(report, args.csv)
    logger.info(
        f"Acurácia balanceada {report.balanced_accuracy}, F1 {report.f1} "
        f"({report.counts.total} registros, {report.counts.abstain} abstenções)"
    )
    return 0


def compare(args, config: PipelineConfig) -> int:
    base, perturbed = _load_report(args.base), _load_report(args.perturbed)
    emit_document(MetricsService.compare_reports(base, perturbed), args.output)
    return 0


def register(subparsers) -> None:
    parser = subparsers.add_parser("run", help="Envia os prompts ao endpoint de chat e extrai os vereditos")
    parser.add_argument("bundles", nargs="?", default=None, help="Bundles de prompt (JSONL)")
    parser.add_argument("--log", default=None, help="Log JSONL de requisições e respostas")
    parser.add_argument("--replay", default=None, help="Reaproveita um log anterior sem chamar o endpoint")
    parser.add_argument("--url", default=None, help="URL do endpoint (padrão VDKIT_ENDPOINT_URL)")
    parser.add_argument("--model", default=None)
    parser.add_argument("--concurrency", type=int, default=None, help="Requisições simultâneas")
    add_output(parser, "Vereditos (JSONL)")
    parser.set_defaults(handler=run)

    parser = subparsers.add_parser("score", help="Métricas globais e recall por CWE")
    parser.add_argument("verdicts", help="Vereditos (JSONL) produzidos por run")
    parser.add_argument("--group-by", default=None, help="Campo para relatórios por grupo (ex.: transform_kind)")
    parser.add_argument("--csv", default=None, help="Exporta as métricas em CSV")
    add_output(parser, "Relatório de métricas (JSON)")
    parser.set_defaults(handler=score)

    parser = subparsers.add_parser("compare", help="Variação das métricas entre dois relatórios")
    parser.add_argument("base", help="Relatório original (JSON)")
    parser.add_argument("perturbed", help="Relatório perturbado (JSON)")
    add_output(parser)
    parser.set_defaults(handler=compare)

import logging

from vdkit.commands.common import add_output, emit_jsonl, load_records
from vdkit.config.pipeline import PipelineConfig
from vdkit.schemas.function import SourceFunction
from vdkit.services.parser import ParserService
from vdkit.services.views import StructViewService
from vdkit.services.workers import parallel_map

logger = logging.getLogger(__name__)


def render_record(record: SourceFunction) -> dict:
    tree = ParserService.parse_function(record)
    row = record.to_record()
    row.update(StructViewService.render_all(tree))
    return row


def views(args, config: PipelineConfig) -> int:
    records = load_records(args.input)
    rows = parallel_map(render_record, records, config.workers, desc="views")
    count = emit_jsonl(rows, args.output)
    logger.info(f"Visões estruturais geradas para {count} registros")
    return 0


def register(subparsers) -> None:
    parser = subparsers.add_parser("views", help="Acrescenta view_flat_ast, view_api_calls e view_data_flow")
    parser.add_argument("input", help="Corpus JSONL")
    add_output(parser, "Corpus com as visões (JSONL)")
    parser.set_defaults(handler=views)

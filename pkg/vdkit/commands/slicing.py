import functools
import logging

from vdkit.commands.common import add_output, emit_jsonl, load_records, resolve
from vdkit.config.pipeline import PipelineConfig
from vdkit.exceptions import EmptySlice
from vdkit.schemas.function import SourceFunction
from vdkit.services.slicing import SlicingService
from vdkit.services.tokens import COUNTERS, get_counter
from vdkit.services.workers import parallel_map

logger = logging.getLogger(__name__)


def slice_record(record: SourceFunction, budget: int, counter_name: str, as_corpus: bool) -> dict:
    counter = get_counter(counter_name, record.language)
    try:
        result = SlicingService.slice_function(record, budget, counter)
    except EmptySlice as e:
        logger.warning(f"Registro {record.id} sem fatia: {e}")
        return {"id": record.id, "error": "EmptySlice", "message": str(e)} if not as_corpus else {}
    if not as_corpus:
        return result.model_dump()
    row = record.to_record()
    row.update(code=result.sliced_code, sliced=True, selected_lines=result.selected_lines, token_count=result.token_count)
    return row


def slice_corpus(args, config: PipelineConfig) -> int:
    budget = resolve(args, config, "budget")
    records = load_records(args.input)
    worker = functools.partial(slice_record, budget=budget, counter_name=args.counter, as_corpus=args.as_corpus)
    rows = [row for row in parallel_map(worker, records, config.workers, desc="slice") if row]
    emit_jsonl(rows, args.output)
    logger.info(f"{len(rows)} fatias com orçamento de {budget} tokens")
    return 0


def register(subparsers) -> None:
    parser = subparsers.add_parser("slice", help="Fatiamento a partir de linhas âncora sob orçamento de tokens")
    parser.add_argument("input", help="Corpus JSONL")
    parser.add_argument("--budget", type=int, default=None, help="Orçamento de tokens (padrão 512)")
    parser.add_argument("--counter", choices=sorted(COUNTERS), default="core", help="Contador de tokens")
    parser.add_argument("--as-corpus", action="store_true", help="Emite registros do corpus com o código fatiado")
    add_output(parser, "Resultados do fatiamento (JSONL)")
    parser.set_defaults(handler=slice_corpus)

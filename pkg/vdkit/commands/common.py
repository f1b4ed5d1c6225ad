import json
import logging
import sys
from typing import Iterable, List, Optional

from vdkit.config.pipeline import PipelineConfig
from vdkit.schemas.dataset import SplitAssignment
from vdkit.schemas.function import SourceFunction
from vdkit.services.corpus import CorpusService

logger = logging.getLogger(__name__)


def add_output(parser, help_text: str = "Arquivo de saída (padrão: stdout)") -> None:
    parser.add_argument("-o", "--output", default=None, help=help_text)


def emit_jsonl(rows: Iterable[dict], output: Optional[str]) -> int:
    if output is None:
        count = 0
        for row in rows:
            sys.stdout.write(json.dumps(row, ensure_ascii=False) + "\n")
            count += 1
        return count
    return CorpusService.write_jsonl(output, rows)


def emit_document(document, output: Optional[str]) -> None:
    if output is None:
        sys.stdout.write(json.dumps(document, indent=2, ensure_ascii=False) + "\n")
    else:
        CorpusService.write_document(output, document)


def print_summary(summary: dict) -> None:
    sys.stdout.write(json.dumps(summary, ensure_ascii=False, sort_keys=True) + "\n")


def load_records(path: str) -> List[SourceFunction]:
    return CorpusService.read_records(path)


def load_assignment(path: str) -> SplitAssignment:
    return SplitAssignment.model_validate(CorpusService.read_document(path))


def resolve(args, config: PipelineConfig, name: str):
    """Flag explícita do subcomando vence o valor da configuração."""
    value = getattr(args, name, None)
    return value if value is not None else getattr(config, name)



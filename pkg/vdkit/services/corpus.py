import json
import logging
from collections import defaultdict
from pathlib import Path
from typing import Dict, Iterable, Iterator, List, Tuple, Union

from pydantic import ValidationError

from vdkit.exceptions import DatasetIOError, EncodingError, FormatError, ParseFailure
from vdkit.schemas.dataset import IngestReport, Rejection, RejectionReason
from vdkit.schemas.function import SourceFunction
from vdkit.services.parser import ParserService

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def _first_error(e: ValidationError) -> str:
    error = e.errors()[0]
    location = ".".join(str(part) for part in error.get("loc", ()))
    return f"{location}: {error.get('msg', '')}" if location else error.get("msg", "")


class CorpusService:
    @staticmethod
    def iter_lines(path: PathLike) -> Iterator[Tuple[int, bytes]]:
        """(número da linha, bytes) de cada linha não vazia do arquivo."""
        try:
            with open(path, "rb") as handle:
                for number, raw in enumerate(handle, start=1):
                    if raw.strip():
                        yield number, raw
        except OSError as e:
            logger.error(f"Erro ao ler {path}: {e}")
            raise DatasetIOError(f"Não foi possível ler {path}: {e}") from e

    @staticmethod
    def parse_line(raw: bytes, line_number: int) -> dict:
        try:
            text = raw.decode("utf-8")
        except UnicodeDecodeError as e:
            raise EncodingError(f"linha {line_number}: UTF-8 inválido ({e})") from e
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise FormatError(f"linha {line_number}: JSON inválido ({e.msg})", line_number) from e
        if not isinstance(data, dict):
            raise FormatError(f"linha {line_number}: o registro deve ser um objeto", line_number)
        return data

    @staticmethod
    def iter_dicts(path: PathLike) -> Iterator[dict]:
        for number, raw in CorpusService.iter_lines(path):
            yield CorpusService.parse_line(raw, number)

    @staticmethod
    def read_records(path: PathLike) -> List[SourceFunction]:
        """Leitura estrita: qualquer linha inválida interrompe com FormatError."""
        records = []
        for number, raw in CorpusService.iter_lines(path):
            data = CorpusService.parse_line(raw, number)
            try:
                records.append(SourceFunction.model_validate(data))
            except ValidationError as e:
                raise FormatError(f"linha {number}: {_first_error(e)}", number) from e
        logger.info(f"Lidos {len(records)} registros de {path}")
        return records

    @staticmethod
    def write_jsonl(path: PathLike, rows: Iterable[dict]) -> int:
        count = 0
        try:
            target = Path(path)
            target.parent.mkdir(parents=True, exist_ok=True)
            with open(target, "w", encoding="utf-8") as handle:
                for row in rows:
                    handle.write(json.dumps(row, ensure_ascii=False) + "\n")
                    count += 1
        except OSError as e:
            logger.error(f"Erro ao escrever {path}: {e}")
            raise DatasetIOError(f"Não foi possível escrever {path}: {e}") from e
        return count

    @staticmethod
    def write_records(path: PathLike, records: Iterable[SourceFunction]) -> int:
        count = CorpusService.write_jsonl(path, (record.to_record() for record in records))
        logger.info(f"Gravados {count} registros em {path}")
        return count

    @staticmethod
    def write_document(path: PathLike, document) -> None:
        try:
            target = Path(path)
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_text(json.dumps(document, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
        except OSError as e:
            logger.error(f"Erro ao escrever {path}: {e}")
            raise DatasetIOError(f"Não foi possível escrever {path}: {e}") from e

    @staticmethod
    def read_document(path: PathLike):
        try:
            return json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as e:
            raise DatasetIOError(f"Não foi possível ler {path}: {e}") from e
        except json.JSONDecodeError as e:
            raise FormatError(f"{path}: JSON inválido ({e.msg})", e.lineno) from e

    @staticmethod
    def ingest(path: PathLike) -> Tuple[List[SourceFunction], IngestReport]:
        """Valida esquema, data, parse e consistência dos pares; registros inválidos viram rejeições."""
        report = IngestReport(path=str(path))
        accepted: Dict[str, Tuple[int, SourceFunction]] = {}

        def reject(number: int, reason: RejectionReason, message: str, record_id=None):
            report.rejections.append(Rejection(line_number=number, record_id=record_id, reason=reason, message=message))
            logger.warning(f"Registro rejeitado (linha {number}, {reason.value}): {message}")

        for number, raw in CorpusService.iter_lines(path):
            report.lines += 1
            try:
                data = CorpusService.parse_line(raw, number)
            except EncodingError as e:
                reject(number, RejectionReason.ENCODING_ERROR, str(e))
                continue
            except FormatError as e:
                reject(number, RejectionReason.FORMAT_ERROR, str(e))
                continue
            record_id = data.get("id") if isinstance(data.get("id"), str) else None
            try:
                record = SourceFunction.model_validate(data)
            except ValidationError as e:
                reject(number, RejectionReason.FORMAT_ERROR, _first_error(e), record_id)
                continue
            if record.commit_date is None:
                reject(number, RejectionReason.MISSING_DATE, "commit_date ausente", record.id)
                continue
            if record.id in accepted:
                reject(number, RejectionReason.DUPLICATE_ID, f"id repetido (linha {accepted[record.id][0]})", record.id)
                continue
            try:
                ParserService.parse_function(record)
            except ParseFailure as e:
                reject(number, RejectionReason.PARSE_FAILURE, str(e), record.id)
                continue
            except EncodingError as e:
                reject(number, RejectionReason.ENCODING_ERROR, str(e), record.id)
                continue
            accepted[record.id] = (number, record)

        pairs: Dict[str, List[Tuple[int, SourceFunction]]] = defaultdict(list)
        for number, record in accepted.values():
            if record.pair_id is not None:
                pairs[record.pair_id].append((number, record))
        for pair_id, members in pairs.items():
            first, *rest = [record.label for _, record in members]
            if len(rest) > 1 or any(label is not first.opposite for label in rest):
                for number, record in members:
                    reject(number, RejectionReason.PAIR_LABEL_CONFLICT, f"par {pair_id} sem rótulos opostos", record.id)
                    del accepted[record.id]

        records = [record for _, record in sorted(accepted.values(), key=lambda item: item[0])]
        report.accepted = len(records)
        report.rejections.sort(key=lambda r: r.line_number)
        logger.info(f"Ingestão de {path}: {report.accepted} aceitos, {report.rejected} rejeitados")
        return records, report

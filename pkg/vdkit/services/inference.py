import json
import logging
import re
import threading
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import requests

from vdkit.config import settings
from vdkit.config.pipeline import EndpointConfig
from vdkit.exceptions import AuthError, DatasetIOError, EndpointError, FormatError
from vdkit.schemas.evaluation import InferenceRecord, Verdict
from vdkit.schemas.prompt import PromptBundle

logger = logging.getLogger(__name__)

_VERDICT = re.compile(r"\b(yes|no)\b", re.IGNORECASE)
_TRANSIENT_STATUS = frozenset({408, 429, 500, 502, 503, 504})


def parse_verdict(reply: Optional[str]) -> Verdict:
    """Primeiro "yes"/"no" isolado da resposta, sem diferenciar maiúsculas; senão Abstain."""
    match = _VERDICT.search(reply or "")
    if match is None:
        return Verdict.ABSTAIN
    return Verdict.VULNERABLE if match.group(1).lower() == "yes" else Verdict.NON_VULNERABLE


class ChatEndpointClient:
    def __init__(
        self,
        config: Optional[EndpointConfig] = None,
        api_key: Optional[str] = None,
        session: Optional[requests.Session] = None,
        sleep: Callable[[float], None] = time.sleep,
    ):
        # Valores do arquivo de config, que podem ser sobrescritos por variáveis de ambiente
        self.config = config or EndpointConfig()
        self.api_key = api_key if api_key is not None else settings.get_api_key()
        self.session = session or requests.Session()
        self.sleep = sleep

    def build_request(self, messages: List[Dict[str, str]]) -> dict:
        return {
            "model": self.config.model,
            "messages": messages,
            "top_p": self.config.top_p,
            "temperature": self.config.temperature,
            "max_tokens": self.config.max_new_tokens,
        }

    def _headers(self) -> dict:
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        return headers

    @staticmethod
    def _reply_text(body: dict, attempts: int = 0) -> str:
        try:
            choice = body["choices"][0]
            if "message" in choice:
                return choice["message"].get("content") or ""
            return choice.get("text") or ""
        except (KeyError, IndexError, TypeError, AttributeError) as e:
            raise EndpointError(f"Resposta do endpoint fora do formato chat-completion: {e}", attempts) from e

    def complete(self, messages: List[Dict[str, str]]) -> Tuple[str, int]:
        """Envia uma requisição; retorna (texto da resposta, tentativas usadas)."""
        payload = self.build_request(messages)
        last_error = ""
        for attempt in range(self.config.max_retries + 1):
            if attempt:
                wait = self.config.backoff_base * 2 ** (attempt - 1)
                logger.warning(f"Nova tentativa {attempt}/{self.config.max_retries} em {wait:.1f}s: {last_error}")
                self.sleep(wait)
            try:
                response = self.session.post(
                    self.config.url, json=payload, headers=self._headers(), timeout=self.config.timeout
                )
            except (requests.ConnectionError, requests.Timeout) as e:
                last_error = f"falha de conexão ({e})"
                continue
            if response.status_code in (401, 403):
                raise AuthError(f"Endpoint recusou a autenticação (HTTP {response.status_code})", attempt + 1)
            if response.status_code in _TRANSIENT_STATUS:
                last_error = f"HTTP {response.status_code}"
                continue
            try:
                response.raise_for_status()
                body = response.json()
            except requests.HTTPError as e:
                raise EndpointError(f"Erro do endpoint: {e}", attempt + 1) from e
            except ValueError as e:
                raise EndpointError(f"Resposta do endpoint não é JSON: {e}", attempt + 1) from e
            return self._reply_text(body, attempt + 1), attempt + 1
        logger.error(f"Endpoint indisponível após {self.config.max_retries + 1} tentativas: {last_error}")
        raise EndpointError(
            f"Endpoint indisponível após {self.config.max_retries + 1} tentativas: {last_error}",
            self.config.max_retries + 1,
        )


class InferenceLog:
    """Log JSONL em modo append; cada linha é gravada e descarregada assim que chega."""

    def __init__(self, path: Optional[Union[str, Path]] = None):
        self.path = Path(path) if path is not None else None
        self._handle = None

    def __enter__(self) -> "InferenceLog":
        if self.path is not None:
            try:
                self.path.parent.mkdir(parents=True, exist_ok=True)
                self._handle = open(self.path, "a", encoding="utf-8")
            except OSError as e:
                logger.error(f"Erro ao abrir o log de inferência {self.path}: {e}")
                raise DatasetIOError(f"Não foi possível gravar {self.path}: {e}") from e
        return self

    def append(self, record: InferenceRecord) -> None:
        if self._handle is None:
            return
        try:
            self._handle.write(json.dumps(record.model_dump(mode="json"), ensure_ascii=False) + "\n")
            self._handle.flush()
        except OSError as e:
            logger.error(f"Erro ao gravar o log de inferência {self.path}: {e}")
            raise DatasetIOError(f"Não foi possível gravar {self.path}: {e}") from e

    def __exit__(self, *exc_info) -> bool:
        if self._handle is not None:
            self._handle.close()
            self._handle = None
        return False


class InferenceService:
    @staticmethod
    def infer_one(client: ChatEndpointClient, bundle: PromptBundle) -> InferenceRecord:
        messages = bundle.to_messages()
        reply, attempts = client.complete(messages)
        return InferenceRecord(
            record_id=bundle.record_id,
            verdict=parse_verdict(reply),
            reply=reply,
            label=bundle.label,
            cwe=bundle.cwe,
            prompt_type=bundle.prompt_type.value,
            setting=bundle.setting.value,
            model=client.config.model,
            attempts=attempts,
            request=client.build_request(messages),
            tags=bundle.tags,
        )

    @staticmethod
    def failure_record(client: ChatEndpointClient, bundle: PromptBundle, error: EndpointError) -> InferenceRecord:
        """Linha de log de uma requisição que falhou; sem resposta, o veredito fica Abstain."""
        return InferenceRecord(
            record_id=bundle.record_id,
            verdict=Verdict.ABSTAIN,
            label=bundle.label,
            cwe=bundle.cwe,
            prompt_type=bundle.prompt_type.value,
            setting=bundle.setting.value,
            model=client.config.model,
            attempts=error.attempts,
            request=client.build_request(bundle.to_messages()),
            error=f"{type(error).__name__}: {error}",
            tags=bundle.tags,
        )

    @staticmethod
    def run_inference(
        bundles: Sequence[PromptBundle],
        endpoint_config: Optional[EndpointConfig] = None,
        client: Optional[ChatEndpointClient] = None,
        log_path: Optional[Union[str, Path]] = None,
    ) -> List[InferenceRecord]:
        """Uma requisição por bundle, com no máximo `concurrency` em voo; resultado na ordem de entrada.

        Cada resposta, ou falha, entra no log assim que termina. Depois de um
        AuthError nenhuma requisição nova é enviada.
        """
        client = client or ChatEndpointClient(endpoint_config)
        stop = threading.Event()

        def guarded(bundle: PromptBundle) -> Optional[Union[InferenceRecord, EndpointError]]:
            if stop.is_set():
                return None
            try:
                return InferenceService.infer_one(client, bundle)
            except AuthError as e:
                stop.set()
                return e
            except EndpointError as e:
                return e

        outcomes: Dict[int, Union[InferenceRecord, EndpointError]] = {}
        with InferenceLog(log_path) as log, ThreadPoolExecutor(max_workers=client.config.concurrency) as pool:
            futures = {pool.submit(guarded, bundle): index for index, bundle in enumerate(bundles)}
            for future in as_completed(futures):
                outcome = future.result()
                if outcome is None:
                    continue
                index = futures[future]
                outcomes[index] = outcome
                if isinstance(outcome, InferenceRecord):
                    log.append(outcome)
                else:
                    logger.error(f"Requisição {bundles[index].record_id} falhou: {outcome}")
                    log.append(InferenceService.failure_record(client, bundles[index], outcome))

        ordered = [outcomes[index] for index in sorted(outcomes)]
        records = [o for o in ordered if isinstance(o, InferenceRecord)]
        failures = [o for o in ordered if not isinstance(o, InferenceRecord)]
        skipped = len(bundles) - len(outcomes)
        if skipped:
            logger.error(f"Autenticação recusada; {skipped} requisições não foram enviadas")
        if failures:
            logger.error(f"{len(failures)} de {len(bundles)} requisições falharam")
            raise next((f for f in failures if isinstance(f, AuthError)), failures[0])
        abstains = sum(1 for r in records if r.verdict is Verdict.ABSTAIN)
        logger.info(f"Inferência concluída: {len(records)} respostas, {abstains} abstenções")
        return records

    @staticmethod
    def replay(path: Union[str, Path]) -> List[InferenceRecord]:
        """Relê um log anterior; o veredito é recalculado a partir da resposta gravada.

        Linhas de requisições que falharam ficam de fora.
        """
        records = []
        failed = 0
        try:
            with open(path, encoding="utf-8") as handle:
                for number, line in enumerate(handle, start=1):
                    if not line.strip():
                        continue
                    try:
                        record = InferenceRecord.model_validate(json.loads(line))
                    except ValueError as e:
                        raise FormatError(f"{path} linha {number}: registro de log inválido ({e})", number) from e
                    if record.error is not None:
                        failed += 1
                        continue
                    records.append(record.model_copy(update={"verdict": parse_verdict(record.reply)}))
        except OSError as e:
            raise DatasetIOError(f"Não foi possível ler {path}: {e}") from e
        if failed:
            logger.warning(f"{failed} requisições com erro ignoradas no replay de {path}")
        logger.info(f"Replay de {len(records)} respostas de {path}")
        return records

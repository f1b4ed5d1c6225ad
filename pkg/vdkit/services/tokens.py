import logging
import math
import re
from typing import List, Optional, Protocol, Tuple, runtime_checkable

from vdkit.schemas.function import Language
from vdkit.services.parser import ParserService

logger = logging.getLogger(__name__)


@runtime_checkable
class TokenBudgetCounter(Protocol):
    name: str

    def count(self, text: str) -> int:
        ...

    def truncate(self, text: str, budget: int) -> str:
        """Prefixo do texto que contém exatamente os primeiros `budget` tokens."""
        ...


class CoreTokenCounter:
    """Conta os tokens do parser (identificadores, literais, operadores, pontuação)."""

    name = "core"

    def __init__(self, language: Language = Language.C):
        self.language = language

    def _spans(self, text: str) -> List[Tuple[int, int]]:
        if not text.strip():
            return []
        tree = ParserService.parse_code(text, self.language)
        return [token.span for token in ParserService.tokens_of(tree)]

    def count(self, text: str) -> int:
        return len(self._spans(text))

    def truncate(self, text: str, budget: int) -> str:
        spans = self._spans(text)
        if budget <= 0 or not spans:
            return ""
        if budget >= len(spans):
            return text
        end = spans[budget - 1][1]
        return text.encode("utf-8")[:end].decode("utf-8")


# Palavras, números e símbolos isolados; identificadores quebram em camelCase e '_'
_PIECE = re.compile(r"[A-Z]+(?![a-z])|[A-Z]?[a-z]+|\d+|[^\sA-Za-z\d_]")


class SubwordApproxCounter:
    """Aproximação de tokenizadores de subpalavras (BPE): pedaços longos viram vários tokens."""

    name = "subword"

    def __init__(self, chunk: int = 4):
        if chunk <= 0:
            raise ValueError("chunk deve ser positivo")
        self.chunk = chunk

    def _pieces(self, text: str) -> List[Tuple[int, int]]:
        pieces = []
        for match in _PIECE.finditer(text):
            start, end = match.span()
            for offset in range(start, end, self.chunk):
                pieces.append((offset, min(offset + self.chunk, end)))
        return pieces

    def count(self, text: str) -> int:
        return sum(math.ceil((m.end() - m.start()) / self.chunk) for m in _PIECE.finditer(text))

    def truncate(self, text: str, budget: int) -> str:
        pieces = self._pieces(text)
        if budget <= 0 or not pieces:
            return ""
        if budget >= len(pieces):
            return text
        return text[:pieces[budget - 1][1]]


COUNTERS = {
    CoreTokenCounter.name: CoreTokenCounter,
    SubwordApproxCounter.name: SubwordApproxCounter,
}


def get_counter(name: str = "core", language: Language = Language.C) -> TokenBudgetCounter:
    if name not in COUNTERS:
        raise ValueError(f"Contador de tokens desconhecido: {name}")
    if name == CoreTokenCounter.name:
        return CoreTokenCounter(language)
    return COUNTERS[name]()


def count_tokens(text: str, tokenizer: Optional[TokenBudgetCounter] = None) -> int:
    return (tokenizer or CoreTokenCounter()).count(text)

import logging
import threading
from collections import Counter
from typing import List, Optional, Union

import tree_sitter_c as tsc
import tree_sitter_cpp as tscpp
from tree_sitter import Language as TSLanguage
from tree_sitter import Parser

from vdkit.exceptions import EncodingError, ParseFailure
from vdkit.models.syntax import AstNode, SyntaxTree, Token
from vdkit.schemas.function import Language, SourceFunction

logger = logging.getLogger(__name__)

# Nós tratados como folhas opacas: o conteúdo vira um único token
ATOMIC_KINDS = frozenset({
    "string_literal",
    "char_literal",
    "raw_string_literal",
    "number_literal",
    "user_defined_literal",
    "system_lib_string",
    "comment",
})

DECLARATOR_WRAPPERS = frozenset({
    "pointer_declarator",
    "array_declarator",
    "parenthesized_declarator",
    "reference_declarator",
    "attributed_declarator",
    "init_declarator",
})

_GRAMMARS = {
    Language.C: TSLanguage(tsc.language()),
    Language.CPP: TSLanguage(tscpp.language()),
}

# Um parser por thread/processo; instâncias do tree-sitter não são compartilhadas
_local = threading.local()


def _get_parser(language: Language) -> Parser:
    parsers = getattr(_local, "parsers", None)
    if parsers is None:
        parsers = _local.parsers = {}
    if language not in parsers:
        parsers[language] = Parser(_GRAMMARS[language])
    return parsers[language]


def _line_starts(source: bytes) -> tuple:
    starts = [0]
    for i, byte in enumerate(source):
        if byte == 0x0A:
            starts.append(i + 1)
    return tuple(starts)


def _convert(ts_tree) -> AstNode:
    """Converte a árvore do tree-sitter em AstNode, iterativamente (funções longas estouram a recursão)."""
    cursor = ts_tree.walk()
    pending: list = []
    accumulators: list = [[]]

    def build(node, field_name, children) -> AstNode:
        return AstNode(
            kind=node.type,
            start=node.start_byte,
            end=node.end_byte,
            start_line=node.start_point[0] + 1,
            end_line=node.end_point[0] + 1,
            children=tuple(children),
            field=field_name,
            named=node.is_named,
            is_error=node.type == "ERROR",
            is_missing=node.is_missing,
        )

    while True:
        node = cursor.node
        field_name = cursor.field_name
        if node.type not in ATOMIC_KINDS and cursor.goto_first_child():
            pending.append((node, field_name))
            accumulators.append([])
            continue
        accumulators[-1].append(build(node, field_name, ()))
        while not cursor.goto_next_sibling():
            if not cursor.goto_parent():
                return accumulators[0][0]
            parent, parent_field = pending.pop()
            children = accumulators.pop()
            accumulators[-1].append(build(parent, parent_field, children))


def _encode(code: Union[str, bytes]) -> tuple:
    try:
        if isinstance(code, bytes):
            return code.decode("utf-8"), code
        return code, code.encode("utf-8")
    except (UnicodeDecodeError, UnicodeEncodeError) as e:
        raise EncodingError(f"Texto não é UTF-8 válido: {e}") from e


class ParserService:
    @staticmethod
    def parse_code(code: Union[str, bytes], language: Language = Language.C) -> SyntaxTree:
        """Faz o parse de um trecho qualquer (sem exigir definição de função).

        Usado pelo contador de tokens e pela validação de variantes.
        """
        text, source = _encode(code)
        ts_tree = _get_parser(language).parse(source)
        raw_root = _convert(ts_tree)
        root = AstNode(
            kind=raw_root.kind,
            start=0,
            end=len(source),
            start_line=1,
            end_line=source.count(b"\n") + 1,
            children=raw_root.children,
            field=None,
            named=raw_root.named,
            is_error=raw_root.is_error,
            is_missing=raw_root.is_missing,
        )
        errors = sum(1 for n in root.walk() if n.is_error or n.is_missing)
        function = next((n for n in root.walk() if n.kind == "function_definition"), root)
        return SyntaxTree(
            code=text,
            source=source,
            language=language,
            root=root,
            function=function,
            error_count=errors,
            line_starts=_line_starts(source),
        )

    @staticmethod
    def parse_function(func: Union[SourceFunction, str], language: Optional[Language] = None) -> SyntaxTree:
        """Faz o parse de uma função isolada (sem headers nem expansão de macros).

        Subárvores com erro de parse permanecem na árvore e são contadas em
        `error_count`; só falha quando nenhuma definição de função é reconhecida.
        """
        if isinstance(func, SourceFunction):
            code, language = func.code, language or func.language
        else:
            code, language = func, language or Language.C
        if not code or not code.strip():
            raise ParseFailure("Código vazio")
        tree = ParserService.parse_code(code, language)
        if tree.function.kind != "function_definition":
            raise ParseFailure("Nenhuma definição de função reconhecida")
        if tree.error_count:
            logger.debug(f"Parse com {tree.error_count} nós de erro")
        return tree

    @staticmethod
    def tokens_of(tree: SyntaxTree, include_comments: bool = False) -> List[Token]:
        """Tokens (folhas não vazias) em ordem de posição, com índice de ocorrência por texto."""
        seen: Counter = Counter()
        tokens = []
        for leaf in tree.root.leaves():
            if leaf.start == leaf.end or leaf is tree.root:
                continue
            if leaf.kind == "comment" and not include_comments:
                continue
            text = tree.text(leaf)
            # Diretivas de pré-processador carregam o "\n" final como folha anônima
            if not text.strip():
                continue
            seen[text] += 1
            tokens.append(Token(
                text=text,
                start=leaf.start,
                end=leaf.end,
                line=leaf.start_line,
                occurrence_index_by_name=seen[text],
                kind=leaf.kind,
            ))
        return tokens

    @staticmethod
    def tokenize(func: Union[SourceFunction, str], include_comments: bool = False) -> List[Token]:
        tree = ParserService.parse_function(func)
        return ParserService.tokens_of(tree, include_comments=include_comments)

    @staticmethod
    def declared_name(node: Optional[AstNode]) -> Optional[AstNode]:
        """Identificador declarado por um declarator (atravessa ponteiros, arrays, parênteses e init)."""
        while node is not None:
            if node.kind == "identifier":
                return node
            if node.kind not in DECLARATOR_WRAPPERS:
                return None
            inner = node.child_by_field("declarator")
            if inner is None:
                inner = next((c for c in node.named_children if c.kind == "identifier" or c.kind.endswith("declarator")), None)
            node = inner
        return None

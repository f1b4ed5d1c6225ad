import logging
from collections import Counter
from typing import Dict, List, Optional, Tuple, Union

from vdkit.models.syntax import AstNode, Declaration, SyntaxTree
from vdkit.schemas.function import Language, SourceFunction
from vdkit.schemas.perturb import AbstractionMap
from vdkit.services.parser import ParserService

logger = logging.getLogger(__name__)

_STRING_KINDS = ("string_literal", "raw_string_literal")


def _variable_name(declarator: Optional[AstNode]) -> Optional[AstNode]:
    """Nome de variável declarado; protótipos de função (`int g(int);`) não contam."""
    node = declarator
    while node is not None and node.kind == "init_declarator":
        node = node.child_by_field("declarator")
    if node is not None and node.kind == "function_declarator":
        inner = node.child_by_field("declarator")
        # Ponteiro para função: int (*cb)(int)
        if inner is None or inner.kind != "parenthesized_declarator":
            return None
        node = inner
    return ParserService.declared_name(node)


def _function_declarator(function: AstNode) -> Optional[AstNode]:
    node = function.child_by_field("declarator")
    while node is not None and node.kind != "function_declarator":
        node = node.child_by_field("declarator")
    return node


_SCOPES = frozenset({
    "compound_statement",
    "for_statement",
    "for_range_loop",
    "if_statement",
    "while_statement",
    "switch_statement",
    "catch_clause",
})


def _declaration(tree: SyntaxTree, name: AstNode, is_parameter: bool) -> Declaration:
    line = tree.line_of(name.start)
    return Declaration(
        name=tree.text(name),
        start=name.start,
        line=line,
        column=name.start - tree.line_starts[line - 1] + 1,
        is_parameter=is_parameter,
    )


class AbstractionService:
    @staticmethod
    def declarations(tree: SyntaxTree) -> List[Declaration]:
        """Parâmetros (na ordem da lista) seguidos das variáveis locais (na ordem do texto)."""
        function = tree.function
        found: List[Declaration] = []
        declarator = _function_declarator(function)
        parameter_list = declarator.child_by_field("parameters") if declarator is not None else None
        for parameter in parameter_list.named_children if parameter_list is not None else []:
            name = _variable_name(parameter.child_by_field("declarator"))
            if name is not None:
                found.append(_declaration(tree, name, is_parameter=True))

        body = function.child_by_field("body")
        for node in body.walk() if body is not None else []:
            if node.kind == "declaration":
                declarators = node.children_by_field("declarator")
            elif node.kind == "for_range_loop":
                declarators = [node.child_by_field("declarator")]
            else:
                continue
            for child in declarators:
                name = _variable_name(child)
                if name is not None:
                    found.append(_declaration(tree, name, is_parameter=False))
        return found

    @staticmethod
    def resolve(tree: SyntaxTree, declarations: Optional[List[Declaration]] = None) -> Dict[int, Declaration]:
        """Offset de cada identificador -> declaração visível naquele ponto (escopo de bloco)."""
        if declarations is None:
            declarations = AbstractionService.declarations(tree)
        declared = {d.start: d for d in declarations}
        bindings: Dict[int, Declaration] = {}
        scopes: List[Dict[str, Declaration]] = [{}]
        # None marca o fim de um escopo
        stack: List[Optional[AstNode]] = [tree.function]
        while stack:
            node = stack.pop()
            if node is None:
                scopes.pop()
                continue
            if node.kind == "identifier":
                text = tree.text(node)
                if node.start in declared:
                    scopes[-1][text] = declared[node.start]
                    bindings[node.start] = declared[node.start]
                else:
                    visible = next((scope[text] for scope in reversed(scopes) if text in scope), None)
                    if visible is not None:
                        bindings[node.start] = visible
                continue
            if node.kind in _SCOPES:
                scopes.append({})
                stack.append(None)
            stack.extend(reversed(node.children))
        return bindings

    @staticmethod
    def abstract_tree(tree: SyntaxTree) -> Tuple[str, AbstractionMap]:
        declarations = AbstractionService.declarations(tree)
        bindings = AbstractionService.resolve(tree, declarations)
        # Nome repetido em declarações distintas ganha a posição na chave
        repeated = {name for name, count in Counter(d.name for d in declarations).items() if count > 1}

        def key_of(declaration: Declaration) -> str:
            if declaration.name in repeated:
                return f"{declaration.name}@{declaration.line}:{declaration.column}"
            return declaration.name

        result = AbstractionMap()
        edits: List[Tuple[int, int, str]] = []

        def assign(table: Dict[str, str], prefix: str, key: str) -> str:
            if key not in table:
                table[key] = f"{prefix}{len(table)}"
                result.mapping[key] = table[key]
            return table[key]

        # Numeração por primeira aparição no texto, por categoria
        for node in tree.function.walk():
            if node.kind == "identifier" and node.start in bindings:
                declaration = bindings[node.start]
                if declaration.is_parameter:
                    edits.append((node.start, node.end, assign(result.parameters, "PARAM", key_of(declaration))))
                else:
                    edits.append((node.start, node.end, assign(result.variables, "VAR", key_of(declaration))))
            elif node.kind in _STRING_KINDS:
                text = tree.text(node)
                name = assign(result.strings, "STRING", text)
                if node.kind == "raw_string_literal":
                    prefix = text[:text.index('R"')]
                    edits.append((node.start, node.end, f'{prefix}R"({name})"'))
                else:
                    prefix = text[:text.index('"')] if '"' in text else ""
                    edits.append((node.start, node.end, f'{prefix}"{name}"'))

        source = tree.source
        pieces: List[bytes] = []
        cursor = 0
        for start, end, replacement in sorted(edits):
            pieces.append(source[cursor:start])
            pieces.append(replacement.encode("utf-8"))
            cursor = end
        pieces.append(source[cursor:])
        return b"".join(pieces).decode("utf-8"), result

    @staticmethod
    def abstract(func: Union[SourceFunction, str], language: Optional[Language] = None) -> Tuple[str, AbstractionMap]:
        """Troca variáveis locais por VARk, parâmetros por PARAMk e strings por "STRINGk".

        Nomes de função, tipos, palavras-chave e literais numéricos ficam intactos.
        """
        tree = ParserService.parse_function(func, language)
        text, mapping = AbstractionService.abstract_tree(tree)
        logger.debug(
            f"Abstração: {len(mapping.parameters)} parâmetros, "
            f"{len(mapping.variables)} variáveis, {len(mapping.strings)} strings"
        )
        return text, mapping

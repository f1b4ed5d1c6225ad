"""Fatiamento bidirecional a partir de linhas âncora, limitado por orçamento de tokens."""

import logging
from collections import defaultdict
from typing import Dict, Iterable, List, Optional, Set, Tuple, Union

from vdkit.config.settings import DEFAULT_BUDGET
from vdkit.exceptions import EmptySlice
from vdkit.models.flow import LineDependenceGraph
from vdkit.models.syntax import AstNode, SyntaxTree, Token
from vdkit.schemas.function import SourceFunction
from vdkit.schemas.slicing import SliceResult
from vdkit.services.dataflow import DataFlowService
from vdkit.services.parser import ParserService
from vdkit.services.tokens import CoreTokenCounter, TokenBudgetCounter

logger = logging.getLogger(__name__)

ARITHMETIC = frozenset({"+", "-", "*", "/", "%"})

_CONTROL = ("if_statement", "while_statement", "for_statement", "do_statement", "switch_statement", "for_range_loop")
_BODY_FIELDS = ("consequence", "alternative", "body")
_HEADED = _CONTROL + ("function_definition", "catch_clause")
_BLOCKS = ("compound_statement", "field_declaration_list")
_STATEMENTS = frozenset({
    "expression_statement", "declaration", "return_statement", "break_statement", "continue_statement",
    "goto_statement", "type_definition", "throw_statement", "comment",
})
_PREPROC_CONDITIONALS = ("preproc_if", "preproc_ifdef", "preproc_elif", "preproc_elifdef")


def _operator(tree: SyntaxTree, node: AstNode) -> Optional[str]:
    operator = node.child_by_field("operator")
    if operator is None:
        # field_expression não rotula o operador
        operator = next((c for c in node.children if not c.named), None)
    return tree.text(operator) if operator is not None else None


def _is_anchor_node(tree: SyntaxTree, node: AstNode) -> bool:
    if node.kind in ("call_expression", "subscript_expression"):
        return True
    if node.kind == "pointer_expression":
        return True
    if node.kind == "field_expression":
        return _operator(tree, node) == "->"
    if node.kind == "binary_expression":
        return _operator(tree, node) in ARITHMETIC
    return False


class SlicingService:
    @staticmethod
    def detect_anchors(tree: SyntaxTree) -> Set[int]:
        """Linhas com chamada, acesso a array, operação de ponteiro ou aritmética binária."""
        body = tree.function.child_by_field("body") or tree.function
        return {node.start_line for node in body.walk() if _is_anchor_node(tree, node)}

    @staticmethod
    def build_ldg(tree: SyntaxTree, tokens: Optional[List[Token]] = None) -> LineDependenceGraph:
        if tokens is None:
            tokens = ParserService.tokens_of(tree)
        function = tree.function
        nodes = tuple(
            line for line in range(function.start_line, function.end_line + 1)
            if tree.line_text(line).strip()
        )
        node_set = set(nodes)

        facts = DataFlowService.analyze(tree, tokens)
        data_edges = set()
        for use_idx, (var, defs) in facts.uses.items():
            use_line = tokens[use_idx].line
            for def_idx in defs:
                def_line = tokens[def_idx].line
                if def_line != use_line and def_line in node_set and use_line in node_set:
                    data_edges.add((def_line, use_line, var))

        # Pré-ordem: cabeçalhos internos sobrescrevem os externos (o mais próximo vence)
        header_of: Dict[int, int] = {}
        for node in function.walk():
            if node.kind not in _CONTROL:
                continue
            condition = node.child_by_field("condition")
            header = condition.start_line if condition is not None else node.start_line
            for field in _BODY_FIELDS:
                for part in node.children_by_field(field):
                    for line in range(part.start_line, part.end_line + 1):
                        if line != header and line in node_set:
                            header_of[line] = header
        control_edges = {(header, line) for line, header in header_of.items()}

        return LineDependenceGraph(nodes=nodes, data_edges=frozenset(data_edges), control_edges=frozenset(control_edges))

    @staticmethod
    def expansion_order(graph: LineDependenceGraph, anchors: Iterable[int]) -> List[int]:
        """Ordem de admissão: BFS simultânea das âncoras, por (profundidade, linha).

        Em cada rodada, cada linha da fronteira contribui primeiro as linhas das
        quais depende e depois as que dependem dela.
        """
        frontier = sorted(a for a in set(anchors) if a in graph.graph)
        depth_of = {line: 0 for line in frontier}
        depth = 0
        while frontier:
            depth += 1
            discovered: List[int] = []
            for line in frontier:
                for neighbor in graph.backward(line) + graph.forward(line):
                    if neighbor not in depth_of:
                        depth_of[neighbor] = depth
                        discovered.append(neighbor)
            frontier = sorted(discovered)
        return sorted(depth_of, key=lambda line: (depth_of[line], line))

    @staticmethod
    def companions(tree: SyntaxTree) -> Dict[int, Set[int]]:
        """Linhas que cada linha arrasta para a fatia continuar parseável.

        Chaves de abertura e fechamento andam juntas, instruções de várias linhas
        entram inteiras, um cabeçalho de controle exige o início do seu corpo e um
        `else` exige o `if` correspondente.
        """
        needs: Dict[int, Set[int]] = defaultdict(set)

        def pull(line: int, other: int) -> None:
            if line != other:
                needs[line].add(other)

        def tie(line: int, other: int) -> None:
            pull(line, other)
            pull(other, line)

        for node in tree.function.walk():
            if node.kind in _STATEMENTS:
                for line in range(node.start_line + 1, node.end_line + 1):
                    tie(node.start_line, line)
            elif node.kind in _BLOCKS:
                tie(node.start_line, node.end_line)
            elif node.kind == "labeled_statement" and node.named_children:
                pull(node.start_line, node.named_children[-1].start_line)
            elif node.kind in _PREPROC_CONDITIONALS:
                for child in node.children:
                    if child.kind == "#endif" or child.field == "alternative":
                        tie(node.start_line, child.start_line)

            if node.kind not in _HEADED:
                continue
            header_end = node.start_line
            for child in node.children:
                if child.field in _BODY_FIELDS:
                    break
                header_end = max(header_end, child.end_line)
            for line in range(node.start_line + 1, header_end + 1):
                tie(node.start_line, line)
            for part in node.children_by_field("consequence") + node.children_by_field("body"):
                pull(node.start_line, part.start_line)
            for part in node.children_by_field("alternative"):
                statement = part.named_children[0] if part.kind == "else_clause" and part.named_children else part
                pull(part.start_line, node.start_line)
                pull(part.start_line, statement.start_line)
            if node.kind == "do_statement":
                tail = next((c for c in node.children if c.kind == "while"), None)
                if tail is not None:
                    for line in range(tail.start_line, node.end_line + 1):
                        tie(node.start_line, line)
        return dict(needs)

    @staticmethod
    def render(
        tree: SyntaxTree,
        lines: Iterable[int],
        companions: Optional[Dict[int, Set[int]]] = None,
    ) -> Tuple[List[int], str]:
        """Linhas escolhidas mais o fecho das suas companheiras, em ordem de linha."""
        if companions is None:
            companions = SlicingService.companions(tree)
        chosen: Set[int] = set()
        stack = list(lines)
        while stack:
            line = stack.pop()
            if line in chosen:
                continue
            chosen.add(line)
            stack.extend(companions.get(line, ()))
        ordered = [line for line in sorted(chosen) if tree.line_text(line).strip()]
        return ordered, "\n".join(tree.line_text(line) for line in ordered)

    @staticmethod
    def slice(
        tree: SyntaxTree,
        graph: LineDependenceGraph,
        anchors: Iterable[int],
        budget: int = DEFAULT_BUDGET,
        counter: Optional[TokenBudgetCounter] = None,
        record_id: str = "",
    ) -> SliceResult:
        if budget <= 0:
            raise ValueError("budget deve ser positivo")
        counter = counter or CoreTokenCounter(tree.language)
        anchors = set(anchors)
        whole = tree.text(tree.function)
        whole_count = counter.count(whole)
        if whole_count <= budget:
            return SliceResult(
                record_id=record_id,
                anchor_lines=sorted(anchors),
                selected_lines=list(graph.nodes),
                sliced_code=whole,
                token_count=whole_count,
                budget=budget,
                whole_function=True,
                counter=counter.name,
            )

        companions = SlicingService.companions(tree)
        admitted: List[int] = []
        selected: List[int] = []
        text, token_count = "", 0
        for line in SlicingService.expansion_order(graph, anchors):
            candidate_lines, candidate_text = SlicingService.render(tree, admitted + [line], companions)
            candidate_count = counter.count(candidate_text)
            if candidate_count > budget:
                break
            admitted.append(line)
            selected, text, token_count = candidate_lines, candidate_text, candidate_count

        if not admitted:
            logger.warning(f"Fatia vazia para '{record_id}' com orçamento de {budget} tokens")
            raise EmptySlice(f"Nenhuma linha cabe no orçamento de {budget} tokens ({len(anchors)} âncoras)")
        logger.debug(f"Fatia com {len(selected)} linhas e {token_count} tokens (orçamento {budget})")
        return SliceResult(
            record_id=record_id,
            anchor_lines=sorted(anchors),
            selected_lines=selected,
            sliced_code=text,
            token_count=token_count,
            budget=budget,
            counter=counter.name,
        )

    @staticmethod
    def slice_function(
        func: Union[SourceFunction, str],
        budget: int = DEFAULT_BUDGET,
        counter: Optional[TokenBudgetCounter] = None,
    ) -> SliceResult:
        tree = ParserService.parse_function(func)
        tokens = ParserService.tokens_of(tree)
        graph = SlicingService.build_ldg(tree, tokens)
        anchors = SlicingService.detect_anchors(tree)
        record_id = func.id if isinstance(func, SourceFunction) else ""
        return SlicingService.slice(tree, graph, anchors, budget, counter, record_id=record_id)

import logging
from typing import List, Optional, Tuple

from vdkit.models.flow import DataFlowEdge
from vdkit.models.syntax import AstNode, SyntaxTree, Token
from vdkit.services.dataflow import DataFlowService
from vdkit.services.parser import ParserService

logger = logging.getLogger(__name__)

NO_CALLS = "The program makes no calls."
NO_DATA_FLOW = "No data flow."


def ordinal(n: int) -> str:
    if 10 <= n % 100 <= 20:
        suffix = "th"
    else:
        suffix = {1: "st", 2: "nd", 3: "rd"}.get(n % 10, "th")
    return f"{n}{suffix}"


def _visible(node: AstNode) -> bool:
    return node.start != node.end and node.kind != "comment"


class StructViewService:
    @staticmethod
    def flatten_ast(tree: SyntaxTree, node: Optional[AstNode] = None) -> str:
        """AST achatada: marcadores <AST#tipo#Left>/<AST#tipo#Right> em volta de cada nó não-folha.

        As folhas saem literalmente; por padrão o percurso começa na definição da função.
        """
        parts: List[str] = []
        start = node if node is not None else tree.function
        # Pilha explícita: (nó, fechando?)
        stack: List[Tuple[AstNode, bool]] = [(start, False)]
        while stack:
            current, closing = stack.pop()
            if closing:
                parts.append(f"<AST#{current.kind}#Right>")
                continue
            if current.is_leaf:
                if _visible(current):
                    text = tree.text(current)
                    if text.strip():
                        parts.append(text)
                continue
            parts.append(f"<AST#{current.kind}#Left>")
            stack.append((current, True))
            for child in reversed(current.children):
                stack.append((child, False))
        return " ".join(parts)

    @staticmethod
    def call_sites(tree: SyntaxTree) -> List[Tuple[str, Tuple[int, int]]]:
        """(nome chamado, span) de cada call_expression, em ordem de início do span."""
        calls = []
        for node in tree.function.walk():
            if node.kind != "call_expression":
                continue
            callee = node.child_by_field("function")
            name = " ".join(tree.text(callee).split()) if callee is not None else ""
            calls.append((name, node.span))
        calls.sort(key=lambda c: c[1][0])
        return calls

    @staticmethod
    def render_calls(names: List[str]) -> str:
        if not names:
            return NO_CALLS
        if len(names) == 1:
            return f"The program calls {names[0]}."
        if len(names) == 2:
            return f"The program first calls {names[0]}, then calls {names[1]}."
        middle = "".join(f", then calls {name}" for name in names[1:-1])
        return f"The program first calls {names[0]}{middle}, and finally calls {names[-1]}."

    @staticmethod
    def api_call_view(tree: SyntaxTree) -> str:
        return StructViewService.render_calls([name for name, _ in StructViewService.call_sites(tree)])

    @staticmethod
    def render_data_flow(edges: List[DataFlowEdge]) -> str:
        if not edges:
            return NO_DATA_FLOW
        sentences = [
            f"The {ordinal(e.use_occurrence)} {e.var} comes from the {ordinal(e.def_occurrence)} {e.src_var}"
            for e in edges
        ]
        return "; ".join(sentences) + "."

    @staticmethod
    def data_flow_view(tree: SyntaxTree, tokens: Optional[List[Token]] = None) -> Tuple[List[DataFlowEdge], str]:
        if tokens is None:
            tokens = ParserService.tokens_of(tree)
        facts = DataFlowService.analyze(tree, tokens)
        edges = DataFlowService.edges(facts, tokens)
        return edges, StructViewService.render_data_flow(edges)

    @staticmethod
    def render_all(tree: SyntaxTree) -> dict:
        """Os três campos de visão emitidos junto ao registro no corpus."""
        tokens = ParserService.tokens_of(tree)
        _, flow = StructViewService.data_flow_view(tree, tokens)
        return {
            "view_flat_ast": StructViewService.flatten_ast(tree),
            "view_api_calls": StructViewService.api_call_view(tree),
            "view_data_flow": flow,
        }

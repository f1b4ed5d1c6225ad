"""Definições alcançantes intra-procedurais sobre a AstNode.

Sensível ao fluxo e insensível a caminhos: nos desvios as definições de
todos os ramos chegam à junção; laços são reavaliados até o estado da
cabeça estabilizar. Arrays e campos usam o identificador base como variável
(atualização fraca); escrita via ponteiro (`*p = x`) é apenas um uso de `p`.
"""

import logging
from typing import Dict, FrozenSet, List, Optional, Tuple

from vdkit.models.flow import DataFlowEdge, FlowFacts
from vdkit.models.syntax import AstNode, SyntaxTree, Token
from vdkit.services.parser import ParserService

logger = logging.getLogger(__name__)

State = Dict[str, FrozenSet[int]]
Read = Tuple[str, int, FrozenSet[int]]

_EMPTY: FrozenSet[int] = frozenset()

# Subárvores sem variáveis relevantes
_OPAQUE = frozenset({
    "parameter_list",
    "type_descriptor",
    "goto_statement",
    "preproc_def",
    "preproc_function_def",
    "preproc_include",
    "preproc_call",
    "qualified_identifier",
    "lambda_expression",
    "template_argument_list",
    "statement_identifier",
})


def _merge(*states: State) -> State:
    merged: State = {}
    for state in states:
        for var, defs in state.items():
            merged[var] = merged.get(var, _EMPTY) | defs
    return merged


class _ReachingDefinitions:
    def __init__(self, tree: SyntaxTree, tokens: List[Token]):
        self.tree = tree
        self.token_at = {t.start: i for i, t in enumerate(tokens)}
        self.facts = FlowFacts()

    # -- registro de fatos ---------------------------------------------------

    def use(self, node: AstNode, state: State) -> List[Read]:
        idx = self.token_at.get(node.start)
        if idx is None:
            return []
        var = self.tree.text(node)
        defs = state.get(var, _EMPTY)
        self.facts.uses.setdefault(idx, (var, set()))[1].update(defs)
        return [(var, idx, defs)]

    def define(self, node: AstNode, reads: List[Read], state: State, strong: bool = True) -> Tuple[State, List[Read]]:
        idx = self.token_at.get(node.start)
        if idx is None:
            return state, reads
        var = self.tree.text(node)
        sources = self.facts.def_sources.setdefault(idx, (var, set()))[1]
        sources.update((rv, d) for rv, _, defs in reads for d in defs if d != idx)
        new_state = dict(state)
        new_state[var] = frozenset({idx}) if strong else state.get(var, _EMPTY) | {idx}
        return new_state, [(var, idx, frozenset({idx}))]

    # -- percurso --------------------------------------------------------------

    def visit(self, node: Optional[AstNode], state: State) -> Tuple[State, List[Read]]:
        if node is None or node.kind in _OPAQUE:
            return state, []
        handler = getattr(self, f"_visit_{node.kind}", None)
        if handler is not None:
            return handler(node, state)
        return self._sequence(node.named_children, state)

    def _sequence(self, nodes: List[AstNode], state: State) -> Tuple[State, List[Read]]:
        reads: List[Read] = []
        for child in nodes:
            state, child_reads = self.visit(child, state)
            reads.extend(child_reads)
        return state, reads

    def _loop(self, state: State, *parts: Optional[AstNode]) -> State:
        """Reavalia o corpo do laço até o estado na cabeça não crescer mais."""
        head = state
        while True:
            current = head
            for part in parts:
                current, _ = self.visit(part, current)
            merged = _merge(head, current)
            if merged == head:
                return head
            head = merged

    def _visit_identifier(self, node, state):
        return state, self.use(node, state)

    def _visit_function_definition(self, node, state):
        return self.visit(node.child_by_field("body"), state)

    def _visit_call_expression(self, node, state):
        reads: List[Read] = []
        function = node.child_by_field("function")
        # Nome da função chamada não é variável
        if function is not None and function.kind not in ("identifier", "template_function"):
            state, reads = self.visit(function, state)
        state, arg_reads = self.visit(node.child_by_field("arguments"), state)
        return state, reads + arg_reads

    def _visit_field_expression(self, node, state):
        return self.visit(node.child_by_field("argument"), state)

    def _visit_cast_expression(self, node, state):
        return self.visit(node.child_by_field("value"), state)

    def _lvalue(self, node: AstNode, state: State) -> Tuple[Optional[AstNode], bool, State, List[Read]]:
        if node.kind == "identifier":
            return node, True, state, []
        if node.kind == "parenthesized_expression" and len(node.named_children) == 1:
            return self._lvalue(node.named_children[0], state)
        if node.kind in ("subscript_expression", "field_expression"):
            base = node.child_by_field("argument")
            others = [c for c in node.named_children if c is not base and c.kind != "field_identifier"]
            state, index_reads = self._sequence(others, state)
            if base is None:
                return None, False, state, index_reads
            target, _, state, base_reads = self._lvalue(base, state)
            return target, False, state, index_reads + base_reads
        return None, False, state, []

    def _assign(self, target: AstNode, value_reads: List[Read], state: State, compound: bool) -> Tuple[State, List[Read]]:
        base, strong, state, side_reads = self._lvalue(target, state)
        if base is None:
            state, target_reads = self.visit(target, state)
            return state, value_reads + target_reads
        reads = list(value_reads)
        if compound:
            reads.extend(self.use(base, state))
        state, result = self.define(base, reads, state, strong=strong)
        return state, result + side_reads

    def _visit_assignment_expression(self, node, state):
        state, value_reads = self.visit(node.child_by_field("right"), state)
        operator = node.child_by_field("operator")
        compound = operator is not None and self.tree.text(operator) != "="
        return self._assign(node.child_by_field("left"), value_reads, state, compound)

    def _visit_update_expression(self, node, state):
        return self._assign(node.child_by_field("argument"), [], state, compound=True)

    def _visit_init_declarator(self, node, state):
        state, reads = self.visit(node.child_by_field("value"), state)
        name = ParserService.declared_name(node.child_by_field("declarator"))
        if name is not None:
            state, _ = self.define(name, reads, state)
        return state, []

    def _visit_declaration(self, node, state):
        for child in node.children_by_field("declarator"):
            if child.kind == "init_declarator":
                state, _ = self.visit(child, state)
        return state, []

    def _visit_if_statement(self, node, state):
        state, _ = self.visit(node.child_by_field("condition"), state)
        then_state, _ = self.visit(node.child_by_field("consequence"), state)
        alternative = node.child_by_field("alternative")
        else_state = self.visit(alternative, state)[0] if alternative is not None else state
        return _merge(then_state, else_state), []

    def _visit_while_statement(self, node, state):
        condition = node.child_by_field("condition")
        head = self._loop(state, condition, node.child_by_field("body"))
        return self.visit(condition, head)[0], []

    def _visit_do_statement(self, node, state):
        body, condition = node.child_by_field("body"), node.child_by_field("condition")
        head = self._loop(state, body, condition)
        after_body, _ = self.visit(body, head)
        return self.visit(condition, after_body)[0], []

    def _visit_for_statement(self, node, state):
        state, _ = self.visit(node.child_by_field("initializer"), state)
        condition = node.child_by_field("condition")
        head = self._loop(state, condition, node.child_by_field("body"), node.child_by_field("update"))
        return self.visit(condition, head)[0], []

    def _visit_for_range_loop(self, node, state):
        state, reads = self.visit(node.child_by_field("right"), state)
        name = ParserService.declared_name(node.child_by_field("declarator"))
        if name is not None:
            state, _ = self.define(name, reads, state)
        head = self._loop(state, node.child_by_field("body"))
        return head, []

    def _visit_switch_statement(self, node, state):
        entry, _ = self.visit(node.child_by_field("condition"), state)
        body = node.child_by_field("body")
        current = entry
        for child in body.named_children if body is not None else []:
            if child.kind == "case_statement":
                current = _merge(current, entry)
                for stmt in child.named_children:
                    if stmt.field != "value":
                        current, _ = self.visit(stmt, current)
            else:
                current, _ = self.visit(child, current)
        return _merge(current, entry), []

    def _visit_conditional_expression(self, node, state):
        state, cond_reads = self.visit(node.child_by_field("condition"), state)
        then_state, then_reads = self.visit(node.child_by_field("consequence"), state)
        else_state, else_reads = self.visit(node.child_by_field("alternative"), state)
        return _merge(then_state, else_state), cond_reads + then_reads + else_reads

    def _visit_binary_expression(self, node, state):
        operator = node.child_by_field("operator")
        left_state, left_reads = self.visit(node.child_by_field("left"), state)
        if operator is not None and self.tree.text(operator) in ("&&", "||"):
            right_state, right_reads = self.visit(node.child_by_field("right"), left_state)
            return _merge(left_state, right_state), left_reads + right_reads
        right_state, right_reads = self.visit(node.child_by_field("right"), left_state)
        return right_state, left_reads + right_reads

    def _visit_preproc_ifdef(self, node, state):
        return self._sequence([c for c in node.named_children if c.field != "name"], state)

    def _visit_preproc_if(self, node, state):
        return self._sequence([c for c in node.named_children if c.field != "condition"], state)

    _visit_preproc_elif = _visit_preproc_if


class DataFlowService:
    @staticmethod
    def analyze(tree: SyntaxTree, tokens: List[Token]) -> FlowFacts:
        analysis = _ReachingDefinitions(tree, tokens)
        try:
            analysis.visit(tree.function, {})
        except RecursionError:
            logger.warning("Função profunda demais para a análise de fluxo; fatos parciais descartados")
            return FlowFacts()
        return analysis.facts

    @staticmethod
    def edges(facts: FlowFacts, tokens: List[Token]) -> List[DataFlowEdge]:
        """Arestas "comesFrom" nos pontos de definição, ordenadas pela posição do alvo."""
        edges = []
        for def_idx, (var, sources) in facts.def_sources.items():
            for src_var, src_idx in sources:
                edges.append(DataFlowEdge(
                    var=var,
                    use_occurrence=tokens[def_idx].occurrence_index_by_name,
                    src_var=src_var,
                    def_occurrence=tokens[src_idx].occurrence_index_by_name,
                    use_token=def_idx,
                    def_token=src_idx,
                ))
        edges.sort(key=lambda e: (e.use_token, e.def_token, e.src_var))
        return edges

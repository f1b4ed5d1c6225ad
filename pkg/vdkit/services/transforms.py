"""Transformações que preservam a semântica, aplicadas sítio a sítio.

Cada regra reescreve exatamente uma posição do texto; a variante é
re-parseada e descartada se ganhar nós de erro.
"""

import logging
from typing import Callable, Dict, Iterable, List, Optional, Tuple, Union

from vdkit.exceptions import IneligibleSite, RewriteProducedParseError
from vdkit.models.syntax import AstNode, SyntaxTree
from vdkit.schemas.function import Language, SourceFunction
from vdkit.schemas.perturb import TransformKind, TransformVariant, VariantReport
from vdkit.services.parser import ParserService

logger = logging.getLogger(__name__)

Edit = Tuple[int, int, str]

_LOOPS = ("for_statement", "while_statement", "do_statement", "for_range_loop")

_MIRRORED = {"<": ">", "<=": ">=", ">": "<", ">=": "<=", "==": "==", "!=": "!="}
_RELATIONAL = frozenset({"<", "<=", ">", ">="})
_EQUALITY = frozenset({"==", "!="})

# Operandos com efeito colateral (ou desconhecido) impedem a troca de ordem
_IMPURE = frozenset({
    "call_expression",
    "update_expression",
    "assignment_expression",
    "comma_expression",
    "ERROR",
    "lambda_expression",
    "new_expression",
    "delete_expression",
    "co_await_expression",
    "throw_expression",
})


def _operator_text(tree: SyntaxTree, node: AstNode) -> Optional[str]:
    operator = node.child_by_field("operator")
    return tree.text(operator) if operator is not None else None


def _condition(tree: SyntaxTree, statement: AstNode) -> Optional[AstNode]:
    """Expressão dentro dos parênteses da condição; None quando a condição declara algo."""
    if any(not c.named and c.kind == "constexpr" for c in statement.children):
        return None
    condition = statement.child_by_field("condition")
    if condition is None:
        return None
    if condition.kind == "condition_clause":
        if condition.child_by_field("initializer") is not None:
            return None
        value = condition.child_by_field("value")
        if value is None or value.kind in ("condition_declaration", "declaration"):
            return None
        return value
    if condition.kind == "parenthesized_expression":
        inner = condition.named_children
        return inner[0] if len(inner) == 1 else None
    return None


def _else_statement(statement: AstNode) -> Optional[AstNode]:
    alternative = statement.child_by_field("alternative")
    if alternative is None:
        return None
    if alternative.kind == "else_clause":
        inner = alternative.named_children
        return inner[0] if inner else None
    return alternative


def _opens_dangling_if(node: AstNode) -> bool:
    """True se um `else` escrito logo depois do comando se ligaria a um if interno."""
    while node is not None:
        if node.kind == "if_statement":
            tail = _else_statement(node)
            if tail is None:
                return True
            node = tail
        elif node.kind in ("while_statement", "for_statement", "for_range_loop", "switch_statement"):
            node = node.child_by_field("body")
        elif node.kind == "labeled_statement":
            inner = node.named_children
            node = inner[-1] if inner else None
        else:
            return False
    return False


def _braced(tree: SyntaxTree, node: AstNode) -> str:
    text = tree.text(node)
    return "{ " + text + " }" if _opens_dangling_if(node) else text


def _loop_jumps(body: AstNode, kind: str) -> bool:
    """Procura `continue`/`break` que pertençam ao laço dono de `body`."""
    stack = [body]
    while stack:
        node = stack.pop()
        if node.kind == kind:
            return True
        if node is not body and node.kind in _LOOPS:
            continue
        # `break` dentro de switch pertence ao switch
        if kind == "break_statement" and node is not body and node.kind == "switch_statement":
            continue
        stack.extend(node.children)
    return False


def _contains_any(node: AstNode, kinds: Iterable[str]) -> bool:
    kinds = frozenset(kinds)
    return any(n.kind in kinds for n in node.walk())


def _has_static_local(tree: SyntaxTree, node: AstNode) -> bool:
    return any(
        n.kind == "storage_class_specifier" and tree.text(n) == "static"
        for n in node.walk()
    )


# -- regras ----------------------------------------------------------------------


def _cond_negate(tree: SyntaxTree, node: AstNode) -> Optional[List[Edit]]:
    if node.kind != "if_statement":
        return None
    condition = _condition(tree, node)
    consequence = node.child_by_field("consequence")
    if condition is None or consequence is None:
        return None
    edits = [(condition.start, condition.end, "!(" + tree.text(condition) + ")")]
    alternative = _else_statement(node)
    if alternative is not None:
        edits.append((consequence.start, consequence.end, _braced(tree, alternative)))
        edits.append((alternative.start, alternative.end, _braced(tree, consequence)))
    else:
        edits.append((consequence.start, consequence.end, "{} else " + _braced(tree, consequence)))
    return edits


def _cond_expand(tree: SyntaxTree, node: AstNode) -> Optional[List[Edit]]:
    if node.kind != "if_statement" or node.child_by_field("alternative") is not None:
        return None
    condition = _condition(tree, node)
    consequence = node.child_by_field("consequence")
    if condition is None or consequence is None or condition.kind != "binary_expression":
        return None
    operator = _operator_text(tree, condition)
    if operator not in ("&&", "||"):
        return None
    left = tree.text(condition.child_by_field("left"))
    right = tree.text(condition.child_by_field("right"))
    body = tree.text(consequence)
    if operator == "&&":
        return [(node.start, node.end, f"if ({left}) {{ if ({right}) {body} }}")]
    # `||` duplica o corpo: rótulos e estáticos duplicados mudariam o programa
    if _contains_any(consequence, ("labeled_statement", "case_statement")) or _has_static_local(tree, consequence):
        return None
    return [(node.start, node.end, f"if ({left}) {_braced(tree, consequence)} else if ({right}) {body}")]


def _loop_convert(tree: SyntaxTree, node: AstNode) -> Optional[List[Edit]]:
    if node.kind == "while_statement":
        condition = _condition(tree, node)
        head = node.child_by_field("condition")
        if condition is None or head is None:
            return None
        return [(node.start, head.end, "for (;" + tree.text(condition) + ";)")]
    if node.kind != "for_statement":
        return None
    body = node.child_by_field("body")
    if body is None or _loop_jumps(body, "continue_statement"):
        return None
    initializer = node.child_by_field("initializer")
    condition = node.child_by_field("condition")
    update = node.child_by_field("update")
    if condition is None and update is not None and _loop_jumps(body, "break_statement"):
        return None
    parts = ["{"]
    if initializer is not None:
        init_text = tree.text(initializer)
        # A declaração já inclui o ';'
        parts.append(init_text if initializer.kind == "declaration" else init_text + ";")
    parts.append("while (" + (tree.text(condition) if condition is not None else "1") + ") {")
    parts.append(tree.text(body))
    if update is not None:
        parts.append(tree.text(update) + ";")
    parts.append("} }")
    return [(node.start, node.end, " ".join(parts))]


def _pure(node: AstNode) -> bool:
    return not _contains_any(node, _IMPURE)


def _rel_op_reverse(tree: SyntaxTree, node: AstNode) -> Optional[List[Edit]]:
    if node.kind != "binary_expression":
        return None
    operator_node = node.child_by_field("operator")
    operator = tree.text(operator_node) if operator_node is not None else None
    if operator not in _MIRRORED:
        return None
    left, right = node.child_by_field("left"), node.child_by_field("right")
    if left is None or right is None or not (_pure(left) and _pure(right)):
        return None
    # Mesmo nível de precedência à esquerda: a troca mudaria o agrupamento
    level = _RELATIONAL if operator in _RELATIONAL else _EQUALITY
    for operand in (left, right):
        if operand.kind == "binary_expression" and _operator_text(tree, operand) in level:
            return None
    before = tree.slice_text(left.end, operator_node.start)
    after = tree.slice_text(operator_node.end, right.start)
    text = tree.text(right) + before + _MIRRORED[operator] + after + tree.text(left)
    return [(node.start, node.end, text)]


_RULES: Dict[TransformKind, Callable[[SyntaxTree, AstNode], Optional[List[Edit]]]] = {
    TransformKind.COND_NEGATE: _cond_negate,
    TransformKind.COND_EXPAND: _cond_expand,
    TransformKind.LOOP_CONVERT: _loop_convert,
    TransformKind.REL_OP_REVERSE: _rel_op_reverse,
}


def _splice(source: bytes, edits: List[Edit]) -> str:
    pieces: List[bytes] = []
    cursor = 0
    for start, end, replacement in sorted(edits):
        pieces.append(source[cursor:start])
        pieces.append(replacement.encode("utf-8"))
        cursor = end
    pieces.append(source[cursor:])
    return b"".join(pieces).decode("utf-8")


class TransformService:
    @staticmethod
    def enumerate_sites(tree: SyntaxTree, kind: TransformKind) -> List[AstNode]:
        """Posições elegíveis para a regra, em ordem de início no texto."""
        rule = _RULES[TransformKind(kind)]
        return [node for node in tree.function.walk() if not node.is_error and rule(tree, node) is not None]

    @staticmethod
    def rewrite(tree: SyntaxTree, kind: TransformKind, site_index: int) -> str:
        kind = TransformKind(kind)
        sites = TransformService.enumerate_sites(tree, kind)
        if not 0 <= site_index < len(sites):
            logger.warning(f"{kind.value}: sítio {site_index} pedido, {len(sites)} elegíveis")
            raise IneligibleSite(f"{kind.value}: sítio {site_index} inexistente ({len(sites)} elegíveis)")
        return TransformService._rewrite_site(tree, kind, sites[site_index], site_index)

    @staticmethod
    def _rewrite_site(tree: SyntaxTree, kind: TransformKind, site: AstNode, site_index: int) -> str:
        code = _splice(tree.source, _RULES[kind](tree, site))
        check = ParserService.parse_code(code, tree.language)
        if check.function.kind != "function_definition" or check.error_count > tree.error_count:
            raise RewriteProducedParseError(
                f"{kind.value} no sítio {site_index} gerou {check.error_count} erros de parse"
            )
        return code

    @staticmethod
    def apply_transform(
        func: Union[SourceFunction, str],
        kind: TransformKind,
        site_index: int,
        language: Optional[Language] = None,
    ) -> TransformVariant:
        tree = ParserService.parse_function(func, language)
        origin_id = func.id if isinstance(func, SourceFunction) else ""
        try:
            code = TransformService.rewrite(tree, kind, site_index)
        except RewriteProducedParseError as e:
            logger.error(f"Transformação de '{origin_id}' falhou: {e}")
            raise
        return TransformVariant(origin_id=origin_id, kind=kind, site_index=site_index, code=code)

    @staticmethod
    def generate_variants(
        func: SourceFunction,
        kinds: Iterable[TransformKind] = tuple(TransformKind),
        report: Optional[VariantReport] = None,
    ) -> List[TransformVariant]:
        """Uma variante por sítio elegível de cada regra pedida."""
        tree = ParserService.parse_function(func)
        variants: List[TransformVariant] = []
        for kind in kinds:
            kind = TransformKind(kind)
            for site_index, site in enumerate(TransformService.enumerate_sites(tree, kind)):
                try:
                    code = TransformService._rewrite_site(tree, kind, site, site_index)
                except RewriteProducedParseError as e:
                    logger.warning(f"Variante descartada de {func.id}: {e}")
                    if report is not None:
                        report.discarded[kind.value] = report.discarded.get(kind.value, 0) + 1
                    continue
                variants.append(TransformVariant(origin_id=func.id, kind=kind, site_index=site_index, code=code))
                if report is not None:
                    report.generated[kind.value] = report.generated.get(kind.value, 0) + 1
        if report is not None:
            report.functions += 1
        return variants

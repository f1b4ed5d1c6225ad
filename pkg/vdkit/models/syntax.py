from dataclasses import dataclass, field
from typing import Iterator, List, Optional, Tuple

from vdkit.schemas.function import Language


@dataclass(frozen=True, slots=True)
class AstNode:
    """Nó da árvore sintática, independente do tree-sitter (serializável entre processos)."""

    kind: str
    start: int
    end: int
    start_line: int
    end_line: int
    children: Tuple["AstNode", ...] = ()
    field: Optional[str] = None
    named: bool = True
    is_error: bool = False
    is_missing: bool = False

    @property
    def span(self) -> Tuple[int, int]:
        return (self.start, self.end)

    @property
    def is_leaf(self) -> bool:
        return not self.children

    @property
    def named_children(self) -> List["AstNode"]:
        # Comentários são "extras" e não participam da estrutura
        return [c for c in self.children if c.named and c.kind != "comment"]

    def child_by_field(self, name: str) -> Optional["AstNode"]:
        for child in self.children:
            if child.field == name:
                return child
        return None

    def children_by_field(self, name: str) -> List["AstNode"]:
        return [c for c in self.children if c.field == name]

    def walk(self) -> Iterator["AstNode"]:
        """Percurso em pré-ordem (ordem do texto)."""
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def find_all(self, *kinds: str) -> List["AstNode"]:
        return [n for n in self.walk() if n.kind in kinds]

    def contains(self, kind: str) -> bool:
        return any(n.kind == kind for n in self.walk())

    def leaves(self) -> Iterator["AstNode"]:
        for node in self.walk():
            if node.is_leaf:
                yield node


@dataclass(frozen=True, slots=True)
class SyntaxTree:
    code: str
    source: bytes
    language: Language
    root: AstNode
    function: AstNode
    error_count: int = 0
    line_starts: Tuple[int, ...] = field(default=(0,), repr=False)

    def text(self, node: AstNode) -> str:
        return self.source[node.start:node.end].decode("utf-8")

    def slice_text(self, start: int, end: int) -> str:
        return self.source[start:end].decode("utf-8")

    def line_of(self, offset: int) -> int:
        """Linha (1-based) do byte `offset`."""
        lo, hi = 0, len(self.line_starts) - 1
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if self.line_starts[mid] <= offset:
                lo = mid
            else:
                hi = mid - 1
        return lo + 1

    def line_text(self, line: int) -> str:
        start = self.line_starts[line - 1]
        end = self.line_starts[line] if line < len(self.line_starts) else len(self.source)
        return self.source[start:end].decode("utf-8").rstrip("\r\n")


@dataclass(frozen=True, slots=True)
class Token:
    text: str
    start: int
    end: int
    line: int
    occurrence_index_by_name: int
    kind: str = ""

    @property
    def span(self) -> Tuple[int, int]:
        return (self.start, self.end)


@dataclass(frozen=True, slots=True)
class Declaration:
    """Declaração de parâmetro ou variável local; `start` é o offset do identificador declarado."""

    name: str
    start: int
    line: int
    column: int
    is_parameter: bool = False

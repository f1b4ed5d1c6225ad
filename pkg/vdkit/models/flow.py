from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Set, Tuple

import networkx as nx

COMES_FROM = "ComesFrom"


@dataclass(frozen=True, slots=True)
class DataFlowEdge:
    """`var` (na sua ocorrência `use_occurrence`) recebe valor de `src_var` na ocorrência `def_occurrence`."""

    var: str
    use_occurrence: int
    src_var: str
    def_occurrence: int
    relation: str = COMES_FROM
    use_token: int = -1
    def_token: int = -1


@dataclass
class FlowFacts:
    """Resultado das definições alcançantes, indexado pela posição do token.

    uses: token de uso -> (variável, tokens de definição que o alcançam)
    def_sources: token de definição -> (variável, {(variável fonte, token de definição fonte)})
    """

    uses: Dict[int, Tuple[str, Set[int]]] = field(default_factory=dict)
    def_sources: Dict[int, Tuple[str, Set[Tuple[str, int]]]] = field(default_factory=dict)


@dataclass
class LineDependenceGraph:
    nodes: Tuple[int, ...]
    data_edges: FrozenSet[Tuple[int, int, str]]
    control_edges: FrozenSet[Tuple[int, int]]
    _graph: nx.DiGraph = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        graph = nx.DiGraph()
        graph.add_nodes_from(self.nodes)
        for def_line, use_line, var in self.data_edges:
            graph.add_edge(def_line, use_line)
            graph.edges[def_line, use_line].setdefault("vars", set()).add(var)
        for header, body in self.control_edges:
            graph.add_edge(header, body)
            graph.edges[header, body]["control"] = True
        self._graph = graph

    @property
    def graph(self) -> nx.DiGraph:
        return self._graph

    def backward(self, line: int) -> List[int]:
        """Linhas das quais `line` depende."""
        if line not in self._graph:
            return []
        return sorted(self._graph.predecessors(line))

    def forward(self, line: int) -> List[int]:
        """Linhas que dependem de `line`."""
        if line not in self._graph:
            return []
        return sorted(self._graph.successors(line))

import random
import re
from collections import Counter

from vdkit.services.dataflow import DataFlowService
from vdkit.services.parser import ParserService

_IDENT = re.compile(r"[A-Za-z_]\w*|\d+|\S")
VARIABLES = ["v0", "v1", "v2", "v3", "v4"]


def random_straight_line(rng: random.Random) -> str:
    statements = []
    declared = set()
    for _ in range(rng.randint(1, 15)):
        target = rng.choice(VARIABLES)
        operands = [rng.choice(VARIABLES + ["1", "2", "7"]) for _ in range(rng.randint(1, 3))]
        expression = " + ".join(operands)
        if target not in declared and rng.random() < 0.5:
            declared.add(target)
            statements.append(f"int {target} = {expression};")
        else:
            statements.append(f"{target} = {expression};")
    return "void f() {\n    " + "\n    ".join(statements) + "\n}"


def brute_force_edges(code: str):
    """Definições alcançantes em código sem desvios, por varredura de tokens."""
    body = code[code.index("{") + 1:code.rindex("}")]
    occurrences = Counter()
    last_def = {}
    edges = set()
    for statement in body.split(";"):
        tokens = _IDENT.findall(statement)
        if "=" not in tokens:
            continue
        split = tokens.index("=")
        left = [t for t in tokens[:split] if t in VARIABLES]
        right = [t for t in tokens[split + 1:] if t in VARIABLES]
        target = left[-1]
        # Ocorrências contam na ordem do texto: alvo antes dos operandos
        occurrences[target] += 1
        target_occ = occurrences[target]
        sources = []
        for var in right:
            occurrences[var] += 1
            if var in last_def:
                sources.append((var, last_def[var]))
        for src_var, def_occ in sources:
            edges.add((target, target_occ, src_var, def_occ))
        last_def[target] = target_occ
    return edges


def analyzed_edges(code: str):
    tree = ParserService.parse_function(code)
    tokens = ParserService.tokens_of(tree)
    facts = DataFlowService.analyze(tree, tokens)
    return {(e.var, e.use_occurrence, e.src_var, e.def_occurrence) for e in DataFlowService.edges(facts, tokens)}


def test_straight_line_matches_brute_force():
    rng = random.Random(1234)
    for _ in range(200):
        code = random_straight_line(rng)
        assert analyzed_edges(code) == brute_force_edges(code), code


def test_use_facts_point_to_latest_definition():
    code = "void f() { int a = 1; a = 2; int b = a; }"
    tree = ParserService.parse_function(code)
    tokens = ParserService.tokens_of(tree)
    facts = DataFlowService.analyze(tree, tokens)
    use_idx = max(i for i, t in enumerate(tokens) if t.text == "a")
    var, defs = facts.uses[use_idx]
    assert var == "a"
    assert [tokens[d].occurrence_index_by_name for d in defs] == [2]


def test_loop_carries_definition_back_to_head():
    code = "void f(int n) { int s = 0; while (n) { s = s + n; n--; } }"
    edges = analyzed_edges(code)
    assert ("s", 2, "s", 1) in edges
    # Parâmetros não têm definição dentro do corpo
    assert not any(var == "n" for var, _, _, _ in edges)


def test_array_element_is_weak_update():
    code = "void f(int i) { int a[4]; a[i] = 1; a[0] = 2; int x = a[1]; }"
    edges = analyzed_edges(code)
    assert {(s, d) for v, _, s, d in edges if v == "x"} == {("a", 2), ("a", 3)}


def test_compound_assignment_reads_target():
    edges = analyzed_edges("void f() { int t = 1; t += 2; }")
    assert edges == {("t", 2, "t", 1)}


def test_callee_name_is_not_a_variable():
    edges = analyzed_edges("void f() { int g = 1; int r = g + h(g); }")
    assert {(s, d) for v, _, s, d in edges if v == "r"} == {("g", 1)}

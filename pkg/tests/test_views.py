import pytest

from vdkit.services.parser import ParserService
from vdkit.services.views import NO_CALLS, NO_DATA_FLOW, StructViewService, ordinal


def test_flatten_expression_statement():
    tree = ParserService.parse_function("void f(){c=a+b;}")
    statement = tree.function.find_all("expression_statement")[0]
    assert StructViewService.flatten_ast(tree, statement) == (
        "<AST#expression_statement#Left> <AST#assignment_expression#Left> c = "
        "<AST#binary_expression#Left> a + b <AST#binary_expression#Right> "
        "<AST#assignment_expression#Right> ; <AST#expression_statement#Right>"
    )


def test_flatten_markers_are_balanced(sample_tree):
    flat = StructViewService.flatten_ast(sample_tree)
    stack = []
    for part in flat.split(" "):
        if part.startswith("<AST#") and part.endswith("#Left>"):
            stack.append(part[len("<AST#"):-len("#Left>")])
        elif part.startswith("<AST#") and part.endswith("#Right>"):
            assert stack.pop() == part[len("<AST#"):-len("#Right>")]
    assert stack == []
    assert flat.startswith("<AST#function_definition#Left>")
    assert flat.endswith("<AST#function_definition#Right>")


def test_flatten_keeps_leaf_text_in_order(sample_tree):
    flat = StructViewService.flatten_ast(sample_tree)
    leaves = [p for p in flat.split(" ") if not p.startswith("<AST#")]
    tokens = [t.text for t in ParserService.tokens_of(sample_tree)]
    assert " ".join(leaves).split() == " ".join(tokens).split()


def test_api_calls_in_order(sample_tree):
    assert StructViewService.api_call_view(sample_tree) == "The program first calls memcpy, then calls free."


def test_api_calls_none():
    tree = ParserService.parse_function("int f(int x) { return x * 2; }")
    assert StructViewService.api_call_view(tree) == NO_CALLS


def test_api_calls_nested_outer_first():
    tree = ParserService.parse_function("void h(int x) { f(g(x)); }")
    assert [name for name, _ in StructViewService.call_sites(tree)] == ["f", "g"]


def test_api_calls_three_or_more():
    assert StructViewService.render_calls(["a", "b", "c"]) == (
        "The program first calls a, then calls b, and finally calls c."
    )
    assert StructViewService.render_calls(["a"]) == "The program calls a."


@pytest.mark.parametrize("n,expected", [
    (1, "1st"), (2, "2nd"), (3, "3rd"), (4, "4th"), (11, "11th"), (12, "12th"), (13, "13th"), (21, "21st"), (102, "102nd"),
])
def test_ordinal(n, expected):
    assert ordinal(n) == expected


def test_data_flow_declaration_chain():
    tree = ParserService.parse_function("void f() { int a=1; int b=a; }")
    edges, text = StructViewService.data_flow_view(tree)
    assert text == "The 1st b comes from the 1st a."
    assert [(e.var, e.use_occurrence, e.src_var, e.def_occurrence) for e in edges] == [("b", 1, "a", 1)]


def test_data_flow_without_prior_definition():
    tree = ParserService.parse_function("void f() { a = a + 1; }")
    edges, text = StructViewService.data_flow_view(tree)
    assert edges == []
    assert text == NO_DATA_FLOW


def test_data_flow_multiple_edges_joined():
    tree = ParserService.parse_function("void f() { int a=1; int b=2; int c=a+b; }")
    _, text = StructViewService.data_flow_view(tree)
    assert text == "The 1st c comes from the 1st a; The 1st c comes from the 1st b."


def test_data_flow_branches_merge():
    code = "void f(int k) { int x = 1; if (k) { x = 2; } int y = x; }"
    tree = ParserService.parse_function(code)
    edges, _ = StructViewService.data_flow_view(tree)
    sources = {(e.src_var, e.def_occurrence) for e in edges if e.var == "y"}
    assert sources == {("x", 1), ("x", 2)}


def test_render_all_fields(sample_tree):
    views = StructViewService.render_all(sample_tree)
    assert set(views) == {"view_flat_ast", "view_api_calls", "view_data_flow"}
    assert views["view_data_flow"].endswith(".")

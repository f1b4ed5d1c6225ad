import pytest

from vdkit.exceptions import EncodingError, ParseFailure
from vdkit.schemas.function import Language
from vdkit.services.parser import ParserService

from tests.conftest import SAMPLE_FUNCTION, make_record


def test_parse_minimal_function():
    tree = ParserService.parse_function("int f(){return 0;}")
    assert tree.function.kind == "function_definition"
    assert tree.function.contains("return_statement")
    assert tree.root.span == (0, len("int f(){return 0;}"))
    assert tree.error_count == 0


@pytest.mark.parametrize("code", ["", "   \n\t"])
def test_parse_empty_fails(code):
    with pytest.raises(ParseFailure):
        ParserService.parse_function(code)


def test_parse_without_function_fails():
    with pytest.raises(ParseFailure):
        ParserService.parse_function("int x = 1;")


def test_invalid_utf8_is_encoding_error():
    with pytest.raises(EncodingError):
        ParserService.parse_code(b"int f() { return '\xff'; }")


def test_expression_statement_nesting():
    tree = ParserService.parse_function("void f() { c=a+b; }")
    statement = tree.function.find_all("expression_statement")[0]
    assignment = statement.named_children[0]
    assert assignment.kind == "assignment_expression"
    assert assignment.child_by_field("right").kind == "binary_expression"


def test_parse_errors_are_reported_not_dropped():
    tree = ParserService.parse_function("int f(int a) { int x = a @ 2; return x; }")
    assert tree.function.kind == "function_definition"
    assert tree.error_count > 0


def test_cpp_function():
    record = make_record("cpp", "int f(std::vector<int> &v) { for (auto x : v) { g(x); } return 0; }", language="C++")
    tree = ParserService.parse_function(record)
    assert tree.language is Language.CPP
    assert tree.function.contains("for_range_loop")


def test_tokenize_occurrence_index():
    tokens = ParserService.tokenize("void f() { a = a + 1; }")
    body = [t.text for t in tokens][5:-1]
    assert body == ["a", "=", "a", "+", "1", ";"]
    a_tokens = [t for t in tokens if t.text == "a"]
    assert [t.occurrence_index_by_name for t in a_tokens] == [1, 2]


def test_statement_token_count():
    tokens = ParserService.tokenize("void f() { c=a+b; }")
    # void f ( ) { } ficam de fora
    assert len(tokens) - 6 == 6


def test_token_lines_match_newline_scan():
    code = "int f(int a)\n{\n  return a;\n}"
    tree = ParserService.parse_function(code)
    for token in ParserService.tokens_of(tree):
        assert token.line == code.encode()[:token.start].count(b"\n") + 1


def test_token_spans_and_leaf_tiling():
    tree = ParserService.parse_function(SAMPLE_FUNCTION)
    tokens = ParserService.tokens_of(tree, include_comments=True)
    for token in tokens:
        assert tree.source[token.start:token.end].decode() == token.text
    rebuilt = bytearray()
    cursor = 0
    for token in tokens:
        rebuilt += tree.source[cursor:token.start]
        rebuilt += token.text.encode()
        cursor = token.end
    rebuilt += tree.source[cursor:]
    assert bytes(rebuilt) == tree.source
    assert all(a.start < b.start for a, b in zip(tokens, tokens[1:]))


def test_comments_excluded_by_default():
    code = "int f() { /* note */ return 0; }"
    assert "/* note */" not in [t.text for t in ParserService.tokenize(code)]
    assert "/* note */" in [t.text for t in ParserService.tokenize(code, include_comments=True)]


def test_tokenize_is_deterministic():
    assert ParserService.tokenize(SAMPLE_FUNCTION) == ParserService.tokenize(SAMPLE_FUNCTION)


def test_child_spans_nested_and_ordered(sample_tree):
    for node in sample_tree.root.walk():
        previous_end = node.start
        for child in node.children:
            assert node.start <= child.start <= child.end <= node.end
            assert child.start >= previous_end
            previous_end = child.end

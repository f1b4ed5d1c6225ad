import pytest

from vdkit.services.tokens import (
    CoreTokenCounter,
    SubwordApproxCounter,
    TokenBudgetCounter,
    count_tokens,
    get_counter,
)

from tests.conftest import SAMPLE_FUNCTION


@pytest.mark.parametrize("text,expected", [("a+b", 3), ("", 0), ("   \n", 0), ("int x = 10;", 5)])
def test_core_count(text, expected):
    assert count_tokens(text) == expected


def test_comments_do_not_count():
    assert count_tokens("x = 1; /* longo comentário */") == count_tokens("x = 1;")


def test_count_grows_with_statements():
    statements = ["int a = 1;", "a += 2;", "f(a, 3);", "return a;"]
    counts = [count_tokens("void f() { " + " ".join(statements[:k]) + " }") for k in range(len(statements) + 1)]
    assert counts == sorted(counts)
    assert counts[-1] == 6 + sum(count_tokens(s) for s in statements)


def test_core_truncate_keeps_exact_prefix():
    counter = CoreTokenCounter()
    assert counter.truncate("int  x = 10;", 2) == "int  x"
    assert counter.truncate("int x = 10;", 99) == "int x = 10;"
    assert counter.truncate("int x = 10;", 0) == ""


def test_truncate_then_count():
    sample_function = SAMPLE_FUNCTION
    counter = CoreTokenCounter()
    total = counter.count(sample_function)
    for budget in (1, 5, 17, total - 1):
        prefix = counter.truncate(sample_function, budget)
        assert sample_function.startswith(prefix)
        assert counter.count(prefix) <= budget


def test_subword_splits_long_identifiers():
    counter = SubwordApproxCounter()
    assert counter.count("a+b") == 3
    assert counter.count("bufferLength") == 4  # buff er Leng th
    assert counter.count("") == 0
    assert counter.truncate("alpha beta", 2) == "alpha"


def test_subword_rejects_bad_chunk():
    with pytest.raises(ValueError):
        SubwordApproxCounter(chunk=0)


def test_get_counter():
    assert isinstance(get_counter("core"), TokenBudgetCounter)
    assert get_counter("subword").name == "subword"
    with pytest.raises(ValueError):
        get_counter("gpt")

from vdkit.schemas.dataset import Split, SplitAssignment
from vdkit.schemas.function import Label
from vdkit.services.audit import AuditService, code_hash, complete_pairs
from vdkit.services.partition import PartitionService
from vdkit.services.tokens import CoreTokenCounter, SubwordApproxCounter

from tests.conftest import make_pair, make_record, synthetic_corpus


def test_split_pair_is_case1():
    vulnerable, patched = make_pair(1)
    patched = patched.model_copy(update={"commit_id": "beef"})
    assignment = SplitAssignment(assignments={vulnerable.id: Split.TEST, patched.id: Split.TRAIN})
    report = AuditService.audit_leakage(assignment, [vulnerable, patched])
    assert report.case1_violations == ["pair1"]
    assert report.case2_violations == []
    assert report.case1_ratio == 1.0
    assert not report.passed


def test_commit_in_one_split_is_clean():
    records = [make_record(f"r{i}", f"int f{i}(void) {{ return {i}; }}", commit="cafe") for i in range(4)]
    assignment = SplitAssignment(assignments={r.id: Split.TRAIN for r in records})
    report = AuditService.audit_leakage(assignment, records)
    assert report.case2_violations == []
    assert report.passed
    assert report.total_commits == 1


def test_commit_across_splits_is_case2():
    records = [make_record("a", "int f(void) { return 1; }", commit="cafe"), make_record("b", "int g(void) { return 2; }", commit="cafe")]
    assignment = SplitAssignment(assignments={"a": Split.TRAIN, "b": Split.VALID})
    assert AuditService.audit_leakage(assignment, records).case2_violations == ["cafe"]


def test_formatting_clones_across_splits():
    a = make_record("a", "int f(int x) { return x; }", commit="a1")
    b = make_record("b", "int f(int x)\n{\n    return x;\n}", commit="b1")
    assert code_hash(a.code) == code_hash(b.code)
    assert code_hash(a.code) == code_hash("\n" + a.code + "\n\n")
    assignment = SplitAssignment(assignments={"a": Split.TRAIN, "b": Split.TEST})
    report = AuditService.audit_leakage(assignment, [a, b])
    assert report.duplicate_hash_violations == [("a", "b")]
    same_split = SplitAssignment(assignments={"a": Split.TRAIN, "b": Split.TRAIN})
    assert AuditService.audit_leakage(same_split, [a, b]).duplicate_hash_violations == []


def test_split_output_passes_audit():
    records = synthetic_corpus(25, ["CWE-119", "CWE-787"], seed=3)
    assert len(records) == 50
    assignment = PartitionService.split_by_cwe_time(records)
    report = AuditService.audit_leakage(assignment, records)
    assert report.case1_violations == [] and report.case2_violations == []
    assert report.total_pairs == 25


def _long_pair(tail_vulnerable: str, tail_patched: str, head: str = "int f(int x) {\n"):
    body = "    x = x + 1;\n" * 110  # 660 tokens
    vulnerable = make_record("v", head + body + tail_vulnerable + "}\n", Label.VULNERABLE, pair="pp")
    patched = make_record("n", head + body + tail_patched + "}\n", Label.NON_VULNERABLE, pair="pp")
    return [vulnerable, patched]


def test_truncation_collision_after_budget():
    records = _long_pair("    return x;\n", "    if (x < 0) return 0;\n    return x;\n")
    assert CoreTokenCounter().count(records[0].code) > 600
    report = AuditService.audit_truncation(records, budget=512)
    assert report.truncation_collisions == ["pp"]
    assert report.truncation_ratio == 1.0
    assert not report.passed


def test_truncation_early_difference_not_flagged():
    vulnerable, _ = _long_pair("    return x;\n", "")
    patched = make_record("n", vulnerable.code.replace("int f(int x)", "int f(long x)", 1), Label.NON_VULNERABLE, pair="pp")
    report = AuditService.audit_truncation([vulnerable, patched], budget=512)
    assert report.truncation_collisions == []
    assert report.total_pairs == 1


def test_truncation_whitespace_only_difference_is_not_collision():
    vulnerable, patched = _long_pair("    return x;\n", "    return x;\n")
    patched = patched.model_copy(update={"code": patched.code.replace("x = x + 1;", "x = x  + 1;", 1)})
    report = AuditService.audit_truncation([vulnerable, patched], budget=512)
    assert report.truncation_collisions == []


def test_truncation_with_subword_counter():
    records = _long_pair("    return x;\n", "    return -x;\n")
    report = AuditService.audit_truncation(records, budget=100, tokenizer=SubwordApproxCounter())
    assert report.truncation_collisions == ["pp"]


def test_incomplete_pairs_are_ignored():
    vulnerable, _ = make_pair(1)
    assert complete_pairs([vulnerable]) == {}
    assert AuditService.audit_truncation([vulnerable]).total_pairs == 0


def test_report_document():
    document = AuditService.audit_truncation(_long_pair("", "    x++;\n"), budget=512).to_document()
    assert document["passed"] is False
    assert document["truncation_collisions"] == ["pp"]
    assert document["budget"] == 512

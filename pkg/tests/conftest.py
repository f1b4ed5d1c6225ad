import json
import random
import threading
from datetime import date, timedelta
from pathlib import Path

import pytest
import requests

from vdkit.schemas.function import Label, SourceFunction
from vdkit.services.parser import ParserService

FIXTURES = Path(__file__).parent / "fixtures"

SAMPLE_FUNCTION = """int copy(char *dst, const char *src, int n) {
    int i = 0;
    int total = 0;
    if (n > 0) {
        total = n;
    }
    while (i < n) {
        dst[i] = src[i];
        i++;
    }
    memcpy(dst, src, total);
    free(dst);
    return total;
}
"""


def make_record(
    rid: str,
    code: str = "int f(int x) { return x + 1; }",
    label: Label = Label.NON_VULNERABLE,
    commit: str = "abc1",
    day: int = 1,
    cwe: str = "CWE-119",
    pair: str = None,
    **extra,
) -> SourceFunction:
    return SourceFunction(
        id=rid,
        code=code,
        commit_id=commit,
        commit_date=date(2020, 1, 1) + timedelta(days=day),
        cwe_ids=[cwe] if cwe else [],
        label=label,
        pair_id=pair,
        project="proj",
        **extra,
    )


def make_pair(index: int, cwe: str = "CWE-119", day: int = 1, commit: str = None):
    commit = commit or f"{index:08x}"
    vulnerable = make_record(
        f"p{index}-v", f"int f{index}(char *b, int n) {{ return b[n]; }}", Label.VULNERABLE,
        commit, day, cwe, pair=f"pair{index}",
    )
    patched = make_record(
        f"p{index}-n", f"int f{index}(char *b, int n) {{ if (n < 0) return 0; return b[n]; }}", Label.NON_VULNERABLE,
        commit, day, cwe, pair=f"pair{index}",
    )
    return [vulnerable, patched]


def synthetic_corpus(n_pairs: int, cwes, seed: int = 7, singles: int = 0):
    rng = random.Random(seed)
    records = []
    for i in range(n_pairs):
        records.extend(make_pair(i, rng.choice(cwes), rng.randint(0, 2000)))
    for j in range(singles):
        records.append(make_record(
            f"s{j}", f"int g{j}(int a) {{ return a * {j}; }}", Label.NON_VULNERABLE,
            f"{n_pairs + j:08x}", rng.randint(0, 2000), rng.choice(cwes),
        ))
    return records


def response(status: int, body=None) -> requests.Response:
    resp = requests.Response()
    resp.status_code = status
    resp.url = "http://endpoint.test/v1/chat/completions"
    resp._content = json.dumps(body).encode() if body is not None else b"not json"
    return resp


def chat(content: str) -> requests.Response:
    return response(200, {"choices": [{"message": {"role": "assistant", "content": content}}]})


class ScriptedSession:
    """Responde na ordem do roteiro, ou por função da última mensagem do usuário."""

    def __init__(self, script=None, responder=None):
        self.script = list(script or [])
        self.responder = responder
        self.calls = []
        self._lock = threading.Lock()

    def post(self, url, json=None, headers=None, timeout=None):
        with self._lock:
            self.calls.append({"url": url, "json": json, "headers": headers, "timeout": timeout})
            item = self.responder(json["messages"][-1]["content"]) if self.responder else self.script.pop(0)
        if isinstance(item, Exception):
            raise item
        return item


def write_jsonl(path: Path, rows) -> Path:
    with open(path, "w", encoding="utf-8") as handle:
        for row in rows:
            if isinstance(row, SourceFunction):
                row = row.to_record()
            handle.write(json.dumps(row) + "\n")
    return path


@pytest.fixture
def sample_tree():
    return ParserService.parse_function(SAMPLE_FUNCTION)


@pytest.fixture
def corpus_file(tmp_path):
    records = synthetic_corpus(20, ["CWE-119", "CWE-20", "CWE-476"], singles=10)
    return write_jsonl(tmp_path / "corpus.jsonl", records), records

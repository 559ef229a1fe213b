"""Shared fixtures plus one pass/fail summary line per acceptance criterion."""

from __future__ import annotations

import json

import pytest

_ACCEPTANCE_RESULTS: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    if "test_acceptance.py" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    _ACCEPTANCE_RESULTS[name] = "PASS" if report.passed else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for name, outcome in _ACCEPTANCE_RESULTS.items():
        terminalreporter.write_line(f"[{outcome}] {name}")


@pytest.fixture
def write_corpus(tmp_path):
    """Write records as a JSONL corpus file and return its path."""

    def _write(records, name="corpus.jsonl"):
        path = tmp_path / name
        with open(path, "w", encoding="utf-8") as fh:
            for record in records:
                fh.write(json.dumps(record) + "\n")
        return path

    return _write


def make_record(cid, description=None, score=5, **overrides):
    record = {
        "id": cid,
        "platform": "GoFundMe",
        "title": f"Campaign {cid}",
        "description": description
        or "Our neighbour needs help with hospital bills after the storm. "
           "Every donation counts and will be passed on directly.",
        "category": "Medical",
        "created_at": "2019-06-01T10:30:00+00:00",
        "score": score,
    }
    record.update(overrides)
    return record

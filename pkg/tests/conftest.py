import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from c3index.corpus import Corpus, PaperRecord  # noqa: E402


def make_corpus(rows):
    """rows: (id, year, authors, refs) tuples; every paper gets venue "V"."""
    return Corpus({pid: PaperRecord(pid, year, "V", tuple(authors), tuple(refs)) for pid, year, authors, refs in rows})


@pytest.fixture
def corpus_factory():
    return make_corpus


_CRITERIA: list[str] = []


@pytest.fixture
def criterion(request):
    """Record one acceptance line; call ``check(ok, detail)`` exactly once."""
    label = request.node.get_closest_marker("criterion").args[0]

    called = []

    def check(ok, detail=""):
        called.append(ok)
        line = f"{label:<44} {'PASS' if ok else 'FAIL'}  {detail}"
        _CRITERIA.append(line)
        print(line)
        assert ok, line

    yield check
    if not called:
        _CRITERIA.append(f"{label:<44} FAIL  (raised before reaching its check)")


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label): acceptance criterion reported in the summary")


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in _CRITERIA:
            terminalreporter.write_line(line)

from collections import defaultdict

import pytest

_CRITERIA = defaultdict(list)


@pytest.fixture
def report():
    """Record an acceptance check; several checks may share one criterion number."""

    def record(number, ok, detail):
        ok = bool(ok)
        _CRITERIA[number].append((ok, detail))
        print(f"criterion {number}: {'PASS' if ok else 'FAIL'} ({detail})")
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        checks = _CRITERIA[number]
        ok = all(c for c, _ in checks)
        detail = "; ".join(d for _, d in checks)
        terminalreporter.write_line(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}")

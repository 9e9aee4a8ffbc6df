import pytest

_CRITERIA = {}


@pytest.fixture
def record():
    """Store ``(passed, detail)`` for an acceptance criterion; printed in the summary."""

    def _record(number, passed, detail):
        _CRITERIA[number] = (bool(passed), detail)

    return _record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        ok, detail = _CRITERIA[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")

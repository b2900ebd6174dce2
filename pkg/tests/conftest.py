import pytest

_ACCEPTANCE = {}


def record(criterion, passed, detail):
    """Store one acceptance verdict; sub-checks of a criterion are merged."""
    prev = _ACCEPTANCE.get(criterion)
    if prev is None:
        _ACCEPTANCE[criterion] = (bool(passed), [detail])
    else:
        _ACCEPTANCE[criterion] = (prev[0] and bool(passed), prev[1] + [detail])


@pytest.fixture
def acceptance():
    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_ACCEPTANCE, key=lambda k: (int(k.split()[0]), k)):
        ok, details = _ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key}: {'PASS' if ok else 'FAIL'} | " + "; ".join(details))

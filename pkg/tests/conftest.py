import pytest

_ACCEPTANCE = []


@pytest.fixture
def criterion():
    """Record one acceptance line; the test still asserts on its own."""

    def record(number, title, ok, detail=""):
        line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {title}" + (f" ({detail})" if detail else "")
        _ACCEPTANCE.append((number, line))
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance")
    for _, line in sorted(_ACCEPTANCE):
        terminalreporter.write_line(line)

import pytest

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance():
    """Record and print one pass/fail line per acceptance criterion."""

    def _report(cid: str, ok: bool, detail: str = "", skip: bool = False):
        verdict = "skip" if skip else ("pass" if ok else "FAIL")
        line = f"{cid} {verdict}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        if skip:
            pytest.skip(line)
        assert ok, line

    return _report


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

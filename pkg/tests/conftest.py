import pytest

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def record(capsys):
    """Print one verdict line per acceptance criterion and keep it for the summary."""

    def _record(criterion: str, ok: bool | None, detail: str) -> None:
        verdict = "SKIP" if ok is None else "PASS" if ok else "FAIL"
        line = f"criterion {criterion}: {verdict} | {detail}"
        ACCEPTANCE_LINES.append(line)
        with capsys.disabled():
            print(f"\n{line}")

    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

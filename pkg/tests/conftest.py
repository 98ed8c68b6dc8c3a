"""Shared test plumbing: the acceptance suite records one verdict line per
criterion; they are echoed in the terminal summary so the pass/fail ledger is
visible regardless of output capture."""

CRITERION_LINES: dict[int, str] = {}


def record_criterion(number: int, passed: bool, detail: str) -> None:
    verdict = "PASS" if passed else "FAIL"
    line = f"CRITERION {number}: {verdict} - {detail}"
    CRITERION_LINES[number] = line
    print(line, flush=True)


def pytest_terminal_summary(terminalreporter):
    if not CRITERION_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(CRITERION_LINES):
        terminalreporter.write_line(CRITERION_LINES[number])

"""Shared test plumbing: the acceptance tests record one summary line per
criterion, echoed after the run so they stay visible under capture."""

ACCEPTANCE_LINES: list[str] = []


def record_acceptance(num: int, desc: str, failures: list[str]) -> None:
    status = "FAIL" if failures else "PASS"
    line = f"ACCEPTANCE {num}: {status} - {desc}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert not failures, f"criterion {num}: " + "; ".join(failures)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("-", "acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)

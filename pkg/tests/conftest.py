import pytest

#: filled by the acceptance tests, printed once at the end of the session
ACCEPTANCE_LINES: dict[int, str] = {}


def record(criterion: int, title: str, reports) -> bool:
    ok = all(r.passed for r in reports)
    worst = max(reports, key=lambda r: r.statistic / r.threshold if r.threshold else r.statistic)
    ACCEPTANCE_LINES[criterion] = (
        f"criterion {criterion:2d} {'PASS' if ok else 'FAIL'}  {title}  "
        f"[{len(reports)} checks; tightest: {worst.test_name} {worst.statistic:.3g} <= {worst.threshold:.3g}]")
    return ok


@pytest.fixture
def recorder():
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])

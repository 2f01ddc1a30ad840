import pytest

CRITERIA = {}


def record(number, passed, detail):
    """Store one acceptance verdict and echo it; printed again in the run summary."""
    line = f"CRITERION {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
    CRITERIA[number] = line
    print(line)
    return passed


@pytest.fixture
def criterion():
    return record


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(CRITERIA):
        terminalreporter.write_line(CRITERIA[number])

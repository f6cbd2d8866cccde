"""Collects one PASS/FAIL line per acceptance criterion and prints them at the end."""

import pytest

CRITERIA: dict[int, tuple[str, bool, str]] = {}


@pytest.fixture
def criterion():
    def report(number: int, title: str, passed: bool, detail: str) -> bool:
        CRITERIA[number] = (title, bool(passed), detail)
        line = f"CRITERION {number:2d} {'PASS' if passed else 'FAIL'}: {title} -- {detail}"
        print(line)
        return bool(passed)

    return report


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA):
        title, passed, detail = CRITERIA[n]
        terminalreporter.write_line(f"CRITERION {n:2d} {'PASS' if passed else 'FAIL'}: {title} -- {detail}")

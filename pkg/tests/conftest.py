import pytest

# criterion number -> (passed, detail), filled by test_acceptance
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def record():
    def _record(number: int, passed: bool, detail: str) -> None:
        ACCEPTANCE[number] = (passed, detail)

    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if passed else 'FAIL'} ({detail})")

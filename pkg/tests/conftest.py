from contextlib import contextmanager

import pytest

_LINES = []


@pytest.fixture
def criterion():
    """Context manager printing one PASS/FAIL line for an acceptance criterion."""

    @contextmanager
    def run(number, title):
        try:
            yield
        except BaseException as exc:
            line = f"FAIL {number:>2}  {title}  ({type(exc).__name__})"
            print(line)
            _LINES.append(line)
            raise
        line = f"PASS {number:>2}  {title}"
        print(line)
        _LINES.append(line)

    return run


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in _LINES:
            terminalreporter.write_line(line)

import re

ACCEPTANCE_LINES: list[str] = []


def _order(line: str):
    num = re.match(r"criterion (\d+)", line)
    return (int(num.group(1)) if num else 0, line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=_order):
            terminalreporter.write_line(line)

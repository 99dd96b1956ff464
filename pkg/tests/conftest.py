import sys


def pytest_terminal_summary(terminalreporter):
    lines = [line for mod in list(sys.modules.values())
             for line in getattr(mod, "ACCEPTANCE_RESULTS", [])]
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)

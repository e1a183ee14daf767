import sys
from pathlib import Path

# oracles.py sits next to the tests and is imported by name
sys.path.insert(0, str(Path(__file__).parent))

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)

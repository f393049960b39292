"""Collects the acceptance verdicts and prints them at the end of the run."""

VERDICTS: dict[str, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(VERDICTS, key=lambda k: int(k.split()[1])):
        terminalreporter.write_line(VERDICTS[key])

import re

_AC_LINE = re.compile(r"^AC\d+ (PASS|FAIL):")
_ac_lines = []


def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    for line in report.capstdout.splitlines():
        if _AC_LINE.match(line):
            _ac_lines.append(line)


def pytest_terminal_summary(terminalreporter):
    if not _ac_lines:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(_ac_lines, key=lambda s: int(s[2 : s.index(" ")])):
        terminalreporter.write_line(line)

import sys


def pytest_terminal_summary(terminalreporter):
    # acceptance tests record one PASS/FAIL line per criterion; echo them
    # after the run so they are visible even when output capture is on
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "LINES", ()) if mod else ()
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)

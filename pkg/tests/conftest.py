import sys


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Echo the one-line-per-criterion verdicts from the acceptance gate."""
    mod = next(
        (m for name, m in sys.modules.items()
         if name.rsplit(".", 1)[-1] == "test_acceptance" and m is not None),
        None,
    )
    lines = getattr(mod, "CRITERION_LINES", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)

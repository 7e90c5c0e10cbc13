def pytest_terminal_summary(terminalreporter):
    """Echo the per-criterion pass/fail lines after any run that executed
    the acceptance suite, regardless of output capture mode."""
    import sys

    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "CRITERION_LINES", None) if module else None
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)

_acceptance_results = []


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        _acceptance_results.append((name, report.outcome))


def pytest_terminal_summary(terminalreporter):
    if _acceptance_results:
        terminalreporter.write_sep("=", "acceptance criteria")
        for name, outcome in _acceptance_results:
            status = "PASS" if outcome == "passed" else "FAIL"
            terminalreporter.write_line(f"{status}: {name}")

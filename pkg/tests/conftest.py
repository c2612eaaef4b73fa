import acceptance_log


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(n): end-to-end acceptance criterion n")


def pytest_terminal_summary(terminalreporter):
    lines = acceptance_log.lines()
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)

def pytest_terminal_summary(terminalreporter):
    from test_acceptance import LINES

    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in LINES:
            terminalreporter.write_line(line)
        passed = sum(line.startswith("[PASS]") for line in LINES)
        terminalreporter.write_line(f"{passed}/{len(LINES)} criteria passed")

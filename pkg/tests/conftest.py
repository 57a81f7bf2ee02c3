import pytest


@pytest.fixture
def verdict_line(pytestconfig):
    """Emit a line on the real terminal stream, bypassing capture.

    Used by the acceptance tests so each criterion's one-line verdict
    always appears in the test log.
    """
    reporter = pytestconfig.pluginmanager.get_plugin("terminalreporter")

    def emit(line: str) -> None:
        if reporter is not None:
            reporter.write_line("")
            reporter.write_line(line)
        else:  # no terminal plugin (e.g. pytest-xdist worker)
            print(line)

    return emit

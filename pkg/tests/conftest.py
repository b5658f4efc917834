import pytest

# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])


@pytest.fixture
def euclid():
    from magtunnel import Mode, ModelParams

    def make(omega=1.0, alpha=0.01, omega_c=0.0):
        return ModelParams(omega, alpha, omega_c, Mode.EUCLIDEAN)

    return make

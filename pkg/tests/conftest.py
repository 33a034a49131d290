import pytest

from regmod.moduli import RadiusSchedule

# lines recorded by the acceptance tests, echoed in the terminal summary
ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def fast_cfg():
    """A short schedule for unit tests; golden values use the default one."""
    return RadiusSchedule(rho0=0.5, shrink=0.5, steps=6, samples_per_radius=500, seed=7)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)

import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@pytest.fixture(scope="session")
def branch_m2():
    """Degree-2 branch at the six standard amplitudes, computed once per session."""
    from serrinlab.continuation import continue_branch

    result = continue_branch(2, [0.005, -0.005, 0.01, -0.01, 0.02, -0.02])
    assert result.complete, result.error
    return result


ACCEPTANCE = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE] = []


@pytest.fixture
def criterion(request):
    """Record one acceptance line: ``criterion(number, title, passed, detail)``."""

    def record(number, title, passed, detail):
        line = f"[{number:2d}] {'PASS' if passed else 'FAIL'}  {title}: {detail}"
        request.config.stash[ACCEPTANCE].append((number, line))
        print(line)
        assert passed, line

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)

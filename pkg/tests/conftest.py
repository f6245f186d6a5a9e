import time

import pytest

from icnrsim.scenario import ALL_LEVELS, ScenarioConfig
from icnrsim.simulator import run_experiment

VERDICTS = pytest.StashKey[dict]()

DEFAULT_TRIALS = 10_000
DEFAULT_SEED = 42


@pytest.fixture(scope="session")
def default_run():
    """The default scenario at 10^4 paired trials, with its wall-clock time in seconds.

    A one-trial warm-up first loads the compiled kernels, so the timing
    covers the simulation only.
    """
    config = ScenarioConfig()
    run_experiment(ALL_LEVELS, config, 1, DEFAULT_SEED)
    start = time.perf_counter()
    report = run_experiment(ALL_LEVELS, config, DEFAULT_TRIALS, DEFAULT_SEED)
    return report, time.perf_counter() - start


@pytest.fixture
def verdict(request):
    """``verdict(n, ok, detail)`` logs a PASS/FAIL line for acceptance criterion ``n`` and asserts."""
    log = request.config.stash.setdefault(VERDICTS, {})

    def record(number, ok, detail):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        log[number] = line
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    log = config.stash.get(VERDICTS, {})
    if not log:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(log):
        terminalreporter.write_line(log[number])

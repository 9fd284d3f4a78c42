import os
import time
from collections import defaultdict

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, suppress_health_check=[HealthCheck.too_slow], print_blob=True
)
settings.register_profile("ci", parent=settings.get_profile("default"), derandomize=True)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

# acceptance bookkeeping: criterion number -> list of (test name, passed, seconds)
_CRITERIA = defaultdict(list)
_SETUP = defaultdict(float)
_TITLES = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion covered by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    n = marker.args[0]
    if len(marker.args) > 1:
        _TITLES[n] = marker.args[1]
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        _CRITERIA[n].append((item.name, rep.passed, rep.duration))
    elif rep.when == "setup":
        # module fixtures do their heavy lifting here
        _SETUP[n] += rep.duration


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        results = _CRITERIA[n]
        ok = all(passed for _, passed, _ in results)
        seconds = sum(d for _, _, d in results) + _SETUP[n]
        failed = [name for name, passed, _ in results if not passed]
        line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {_TITLES.get(n, '')}  ({len(results)} tests, {seconds:.1f} s)"
        if failed:
            line += "  failed: " + ", ".join(failed)
        tr.write_line(line)


@pytest.fixture
def stopwatch():
    """Context-manager factory asserting a wall-clock budget."""

    class _Watch:
        def __init__(self, budget):
            self.budget = budget

        def __enter__(self):
            self.start = time.perf_counter()
            return self

        def __exit__(self, *exc):
            self.elapsed = time.perf_counter() - self.start
            if exc[0] is None:
                assert self.elapsed < self.budget, f"took {self.elapsed:.2f} s, budget {self.budget} s"

    return _Watch

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from agt.game import validate_spec
from agt.scenario import diamond4, line3, line3_two_red_types, save_scenario

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def l3():
    return validate_spec(line3())


@pytest.fixture
def l3_2t():
    return validate_spec(line3_two_red_types())


@pytest.fixture
def d4():
    return validate_spec(diamond4())


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def scenario_files(tmp_path):
    paths = {}
    for name, make in (("L3", line3), ("L3-2T", line3_two_red_types), ("D4", diamond4)):
        p = tmp_path / f"{name}.json"
        save_scenario(make(), p)
        paths[name] = p
    return paths


@pytest.fixture
def gate(request):
    """Record one acceptance verdict line; printed again in the terminal summary."""
    lines = request.config.stash.setdefault(_GATE, [])

    def record(criterion, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} criterion {criterion}: {detail}"
        lines.append(line)
        print(line)
        return ok
    return record


_GATE = pytest.StashKey[list]()


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_GATE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)

import random
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings, strategies as st

from carpool.generators import random_dag_network, random_sp_market, random_sp_network

ROOT = Path(__file__).resolve().parent.parent
INSTANCES = ROOT / "instances"
FIXTURES = Path(__file__).resolve().parent / "fixtures"

settings.register_profile(
    "repo",
    max_examples=60,
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("repo")

seeds = st.integers(min_value=0, max_value=2**32 - 1)


@st.composite
def sp_markets(draw, max_edges=8, max_riders=6):
    return random_sp_market(random.Random(draw(seeds)), max_edges, max_riders)


@st.composite
def sp_networks(draw, max_edges=8):
    return random_sp_network(random.Random(draw(seeds)), max_edges)


@st.composite
def dag_networks(draw):
    rng = random.Random(draw(seeds))
    net = random_dag_network(rng, rng.randint(3, 6), rng.randint(2, 9))
    from hypothesis import assume

    assume(net is not None)
    return net


@pytest.fixture
def instances_dir():
    return INSTANCES


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: dict = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from mirrorcyl.diagrams import Diagram, random_diagram
from mirrorcyl.lattice import MirrorOrientation, StreetConfig, manhattan_orientation

settings.register_profile("default", max_examples=200, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

widths = st.sampled_from([2, 4, 6, 8, 10])


@st.composite
def diagrams(draw, n=None, walled=False):
    if n is None:
        n = draw(widths)
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    if walled:
        return random_diagram(n, rng, bars=draw(st.integers(0, n // 2)), walled=True)
    return random_diagram(n, rng)


@st.composite
def diagram_tuples(draw, size, walled=False):
    n = draw(widths)
    return tuple(draw(diagrams(n=n, walled=walled)) for _ in range(size))


@st.composite
def streets(draw, model="mirror", n=None, street_index=None):
    if n is None:
        n = draw(widths)
    t = draw(st.integers(1, 4)) if street_index is None else street_index
    occupied = draw(st.lists(st.booleans(), min_size=n, max_size=n))
    if model == "manhattan":
        sites = [manhattan_orientation(x, t) if o else None for x, o in enumerate(occupied, start=1)]
    else:
        orient = draw(st.lists(st.sampled_from(list(MirrorOrientation)), min_size=n, max_size=n))
        sites = [o if occ else None for occ, o in zip(occupied, orient)]
    return StreetConfig(n, tuple(sites), model, t)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def slot_pairs(d: Diagram):
    return {frozenset((v, w)) for v, w in enumerate(d.partner)}


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

import random

import numpy as np
import pytest
from hypothesis import strategies as st

from coevent.coevents import CoEvent
from coevent.measure import DecoherenceMatrix
from coevent.oracle import random_consistent_measures
from coevent.stages import Event, Stage
from coevent.systems import SystemSpec, build


@pytest.fixture(scope="session")
def hopper2():
    return build(SystemSpec.hopper(2), 3)


@pytest.fixture(scope="session")
def hopper3():
    return build(SystemSpec.hopper(3, preset="dft"), 1)


@pytest.fixture(scope="session")
def walker():
    return build(SystemSpec.walker(), 4)


def random_link(rng: random.Random, n_prev: int, n_next: int) -> Stage:
    """A random onto parent map from ``n_next`` histories to ``n_prev``."""
    parents = list(range(n_prev)) + [rng.randrange(n_prev) for _ in range(n_next - n_prev)]
    rng.shuffle(parents)
    return parents


def random_system(rng: random.Random, sizes=(2, 4)):
    stages = [Stage(0, [f"h{i}" for i in range(sizes[0])])]
    for t, n in enumerate(sizes[1:], start=1):
        stages.append(Stage(t, [f"h{t}_{i}" for i in range(n)], random_link(rng, sizes[t - 1], n)))
    mats = random_consistent_measures(rng, stages, rank=rng.randint(1, 3))
    return stages, [DecoherenceMatrix(s.t, m) for s, m in zip(stages, mats)]


def events(n: int, stage: int = 0):
    return st.integers(0, (1 << n) - 1).map(lambda b: Event(stage, n, b))


def coevents(n: int, stage: int = 0, max_terms: int = 6):
    return st.lists(st.integers(0, (1 << n) - 1), max_size=max_terms).map(
        lambda ms: CoEvent.from_monomials(stage, n, ms)
    )


def psd_matrix(rng: np.random.Generator, n: int, rank: int = 2) -> np.ndarray:
    B = rng.normal(size=(n, rank)) + 1j * rng.normal(size=(n, rank))
    m = B @ B.conj().T
    return m / m.sum().real


def pytest_terminal_summary(terminalreporter):
    import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.RESULTS:
            terminalreporter.write_line(line)

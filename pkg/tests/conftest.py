import numpy as np
import pytest
from hypothesis import strategies as st

from fairsched.core import Instance, gen_uniform


def random_suite(count, max_n, seed, max_size=10.0, min_n=1):
    """``count`` uniform instances with ``min_n <= n <= max_n``, reproducible."""
    rng = np.random.default_rng(seed)
    return [
        gen_uniform(int(rng.integers(min_n, max_n + 1)), max_size, int(rng.integers(2**31)))
        for _ in range(count)
    ]


# exact zeros matter (dummies, reductions); positive sizes stay above 1e-6 so
# relative tolerances are not swamped by subnormal underflow
sizes_st = st.one_of(st.just(0.0), st.floats(min_value=1e-6, max_value=100.0))


@st.composite
def instances(draw, min_n=1, max_n=7, positive=True):
    sizes = draw(st.lists(sizes_st, min_size=min_n, max_size=max_n))
    if positive and sum(sizes) <= 0:
        sizes[0] = 1.0
    return Instance.from_sizes(sizes)


@pytest.fixture
def tri():
    return Instance.from_sizes([1, 2, 3])


_RESULTS = pytest.StashKey[list]()


class _Recorder:
    def __init__(self, sink):
        self.sink = sink

    def __call__(self, label, ok, detail=""):
        line = f"{'PASS' if ok else 'FAIL'}  {label}" + (f"  ({detail})" if detail else "")
        self.sink.append(line)
        print(line)
        assert ok, line


@pytest.fixture
def criterion(request):
    """Record one acceptance line; fails the test when ``ok`` is false."""
    return _Recorder(request.config.stash.setdefault(_RESULTS, []))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_RESULTS, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)

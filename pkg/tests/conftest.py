import numpy as np
import pytest

from bcikit.data import MarkerList, make_data


def continuous(n=300, n_ch=4, fs=100.0, seed=0, extra=None, markers=None, t0=0.0):
    """Random (time, channel) recording."""
    rng = np.random.default_rng(seed)
    t = t0 + np.arange(n) * 1000.0 / fs
    return make_data(rng.standard_normal((n, n_ch)), [t, [f"c{i}" for i in range(n_ch)]],
                     ["time", "channel"], ["ms", "uV"], extra,
                     MarkerList(tuple(markers)) if markers is not None else None)


def epoched(n_per_class=10, n_t=20, n_ch=3, seed=0, shift=0.0, classes=("a", "b"), extra=None):
    rng = np.random.default_rng(seed)
    labels = [classes[0]] * n_per_class + [classes[1]] * n_per_class
    x = rng.standard_normal((len(labels), n_t, n_ch))
    x[n_per_class:] += shift
    t = np.arange(n_t) * 10.0
    return make_data(x, [labels, t, [f"c{i}" for i in range(n_ch)]],
                     ["class", "time", "channel"], ["#", "ms", "uV"], extra)


@pytest.fixture
def cnt():
    return continuous(markers=[(100.0, "S1"), (1500.0, "S2")], extra={"subject": "s1"})


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

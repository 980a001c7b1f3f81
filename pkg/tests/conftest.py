import numpy as np
import pytest

from boxjenkins import TimeSeries


def make_corpus():
    """Seeded short series for oracle comparisons (every length <= 50)."""
    rng = np.random.default_rng(20240601)
    corpus = []
    for n in (5, 8, 12, 17, 24, 33, 50):
        corpus.append(rng.standard_normal(n))
        corpus.append(np.cumsum(rng.standard_normal(n)))
        corpus.append(10 + np.sin(np.arange(n) * 2 * np.pi / 12) + 0.3 * rng.standard_normal(n))
    corpus.append(np.array([1.0, -1.0, 1.0, -1.0]))
    corpus.append(np.arange(1.0, 21.0))
    return corpus


CORPUS = make_corpus()


@pytest.fixture
def corpus():
    return CORPUS


@pytest.fixture
def monthly():
    def build(values, start=(2009, 1), period=12):
        return TimeSeries(np.asarray(values, dtype=float), start, period)

    return build


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(module.RESULTS):
        terminalreporter.write_line(module.RESULTS[number])

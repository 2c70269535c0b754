import random
import sys
from fractions import Fraction
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from hypermatch.hypergraph import generate, validate  # noqa: E402


def corpus():
    """Small hypergraphs covering every family the library generates."""
    out = {
        "complete(4,3)": generate("complete", q=4, r=3),
        "complete(5,3)": generate("complete", q=5, r=3),
        "complete(6,3)": generate("complete", q=6, r=3),
        "complete(5,2)": generate("complete", q=5, r=2),
        "complete(6,4)": generate("complete", q=6, r=4),
        "fano": generate("fano"),
        "fano-minus": generate("fano_minus"),
        "star(5)": generate("star", q=5, E=[[1, 2, 3], [1, 4, 5]]),
        "graph-star(4)": validate(4, [(1, 2), (1, 3), (1, 4)]),
        "cycle(6,3,2)": generate("cycle", q=6, r=3, l=2),
        "cycle(8,4,2)": generate("cycle", q=8, r=4, l=2),
        "cycle(6,3,1)": generate("cycle", q=6, r=3, l=1),
        "complete-minus(6)": generate("complete_minus", q=6, r=3, J=[[1, 2, 3], [4, 5, 6]]),
        "two-isolated": validate(6, [(1, 2, 3, 4), (4, 5), (5, 6)]),
        "edge(2)": validate(2, [(1, 2)]),
        "edge(3)": validate(3, [(1, 2, 3)]),
    }
    return out


CORPUS = corpus()


def random_rational_measure(q, rng, lo=1, hi=20):
    w = [Fraction(rng.randint(lo, hi)) for _ in range(q)]
    s = sum(w)
    return tuple(x / s for x in w)


@pytest.fixture
def rng():
    return random.Random(20240611)


def pytest_terminal_summary(terminalreporter):
    try:
        import test_acceptance
    except ImportError:
        return
    lines = test_acceptance.summary_lines()
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)

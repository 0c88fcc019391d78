import random
import zlib
from itertools import combinations

from hypothesis import HealthCheck, settings

from tightham.hypergraph import DenseHypergraph
from tightham.params import budget_overrides, desk_params

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# all edges present, so every structure fits in a handful of vertices
TINY_COMPLETE = {"reservoir_size": 3, "s_fraction": 0.65, "q_cap": 1}


def random_graph(n, r, p, rng):
    return DenseHypergraph(n, r, [c for c in combinations(range(n), r) if rng.random() < p])


def dense_params(n, p, r, **extra):
    return desk_params(n, p, r, **{**budget_overrides(n, p, r), **extra})


def rng_for(*key):
    return random.Random(zlib.crc32(repr(key).encode()))


# one line per acceptance criterion, echoed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

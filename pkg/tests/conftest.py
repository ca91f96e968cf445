from pathlib import Path

import numpy as np
import pytest

from multiflower.core import Hypergraph, InstanceError, generate_random, parse_instance, to_hypergraph
from multiflower.rmc import parse_rmc_file

DATA = Path(__file__).resolve().parent.parent / "data"

# the four-vertex cubic instance: max -x1x2x3 + x2x3x4 + x1x3x4
CUBIC4_DISJOINT = {(1, 2, 3): ((1, 2), (3,)), (2, 3, 4): ((2, 3), (4,)), (1, 3, 4): ((1, 3), (4,))}
CUBIC4_SHARED34 = {(1, 2, 3): ((1, 3), (2,)), (2, 3, 4): ((3, 4), (2,)), (1, 3, 4): ((3, 4), (1,))}

E0_NINE = tuple(range(1, 10))
NINE_PETALS = [(1, 2, 3, 4), (4, 5, 6, 7), (1, 7, 8, 9)]
SQUARE_CENTER = (1, 2, 3, 4)
SQUARE_PETALS = [(1, 2, 5), (2, 3, 6), (3, 4, 7), (1, 4, 8)]


def data_path(name):
    return DATA / name


@pytest.fixture
def cubic4():
    return parse_instance(data_path("cubic4.json").read_text())


@pytest.fixture
def cubic4_h(cubic4):
    return to_hypergraph(cubic4).hypergraph


@pytest.fixture
def nine_h():
    return Hypergraph(9, (E0_NINE, *NINE_PETALS))


@pytest.fixture
def nine_point():
    p = {(v,): 1.0 if v in (1, 4, 7) else 0.75 for v in range(1, 10)}
    p.update({e: 0.75 for e in NINE_PETALS})
    p[E0_NINE] = 0.0
    return p


@pytest.fixture
def square_h():
    return Hypergraph(8, (SQUARE_CENTER, *SQUARE_PETALS))


def running_intersection_fixtures():
    """The three fixed running-intersection inequalities of the nine-vertex hypergraph.

    -z_{ei & ej} + sum_{v in e0 - (ei | ej)} z_v + z_ei + z_ej - z_e0 <= 2.
    """
    from multiflower.cuts import LinearInequality

    out = []
    for a, b in [(0, 1), (0, 2), (1, 2)]:
        ei, ej = NINE_PETALS[a], NINE_PETALS[b]
        common = tuple(sorted(set(ei) & set(ej)))
        coeffs = {common: -1.0, ei: 1.0, ej: 1.0, E0_NINE: -1.0}
        for v in E0_NINE:
            if v not in ei and v not in ej:
                coeffs[(v,)] = 1.0
        out.append(LinearInequality(coeffs, 2.0, "fixture"))
    return out


def random_instances(count, seed, n_range=(3, 6), edge_range=(1, 4), rank_range=(3, 4)):
    """Deterministic stream of small random instances within the given size ranges."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        n = int(rng.integers(n_range[0], n_range[1] + 1))
        m = int(rng.integers(edge_range[0], edge_range[1] + 1))
        r = min(n, int(rng.integers(rank_range[0], rank_range[1] + 1)))
        try:
            out.append(generate_random(n, m, r, int(rng.integers(1 << 31))))
        except InstanceError:
            continue
    return out


def random_point(h, rng):
    return {ref: float(rng.random()) for ref in h.variables()}


def load_rmc_map(name):
    return parse_rmc_file(data_path(name).read_text())


# criterion number -> list of (part, passed, seconds, detail); filled by test_acceptance
ACCEPTANCE: dict[int, list] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        parts = ACCEPTANCE[num]
        ok = all(p[1] for p in parts)
        secs = sum(p[2] for p in parts)
        failed = "; ".join(f"{p[0]}: {p[3]}" for p in parts if not p[1])
        line = f"criterion {num}: {'PASS' if ok else 'FAIL'} ({secs:.1f}s)"
        terminalreporter.write_line(line + (f"  {failed}" if failed else ""))

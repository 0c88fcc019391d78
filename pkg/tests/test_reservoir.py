from itertools import chain, combinations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from tightham.errors import Fail, InvalidArgument
from tightham.oracle import ExposureOracle
from tightham.params import desk_params
from tightham.paths import reservoir_traverse, validate_tight
from tightham.reservoir import build_reservoir, containment_report, partition_sets, seed_absorber_path

from conftest import TINY_COMPLETE, dense_params


@given(st.integers(60, 3000), st.floats(0.2, 0.7), st.integers(3, 20), st.integers(5, 60))
def test_partition_sizes(n, frac, R, cell):
    s_size = int(frac * n)
    if s_size < R + 3:
        with pytest.raises(InvalidArgument):
            desk_params(n, 1.0, 3, s_fraction=frac, reservoir_size=R, cell_size=cell)
        return
    prm = desk_params(n, 1.0, 3, s_fraction=frac, reservoir_size=R, cell_size=cell)
    if (s_size - R) // 3 < 1:
        with pytest.raises(InvalidArgument):
            partition_sets(n, prm)
        return
    part = partition_sets(n, prm)
    each = (s_size - R) // 3
    assert part.R == list(range(R))
    assert len(part.U1) == len(part.U2) == len(part.U3) == each
    assert part.S == part.R + part.U1 + part.U2 + part.U3
    assert len(part.S) <= s_size
    assert list(chain(*part.cells2)) == part.U2 and list(chain(*part.cells3)) == part.U3


def test_seed_path_at_p_one_takes_lowest_ids():
    prm = desk_params(60, 1.0, 3, **TINY_COMPLETE)
    part = partition_sets(60, prm)
    oracle = ExposureOracle(60, 3, 1.0, 0)
    seed, queries = seed_absorber_path(0, part, oracle, 3)
    u = part.U1
    # x_1 is the lowest free id, then every query takes its lowest hit
    assert seed == (u[1], u[0], 0, u[2], u[3])
    assert queries == 3
    assert validate_tight(seed, oracle.present, 3)
    assert set(seed) - {0} <= part.used


def test_seed_path_r4_query_count():
    prm = desk_params(80, 1.0, 4, reservoir_size=3, s_fraction=0.7, q_cap=1)
    part = partition_sets(80, prm)
    oracle = ExposureOracle(80, 4, 1.0, 0)
    seed, queries = seed_absorber_path(1, part, oracle, 4)
    u = part.U1
    assert queries == 4
    assert seed == (u[2], u[1], u[0], 1, u[3], u[4], u[5])
    assert validate_tight(seed, oracle.present, 4)


def test_half_rule_stops_seed_paths():
    prm = desk_params(60, 1.0, 3, **TINY_COMPLETE)
    part = partition_sets(60, prm)
    part.used.update(part.U1[: len(part.U1) // 2 + 1])
    oracle = ExposureOracle(60, 3, 1.0, 0)
    with pytest.raises(Fail, match="half"):
        seed_absorber_path(0, part, oracle, 3, half_rule=True)
    seed, _ = seed_absorber_path(0, part, oracle, 3, half_rule=False)
    assert len(seed) == 5


def test_tiny_reservoir_absorbs_every_subset():
    prm = desk_params(60, 1.0, 3, **TINY_COMPLETE)
    oracle = ExposureOracle(60, 3, 1.0, 0)
    rp, part, stats = build_reservoir(oracle, prm)
    assert rp.R == set(part.R)
    full = set(reservoir_traverse(rp, ()))
    for k in range(len(part.R) + 1):
        for omit in combinations(part.R, k):
            seq = reservoir_traverse(rp, omit)
            assert validate_tight(seq, oracle.present, 3)
            assert set(seq) == full - set(omit)
            assert tuple(seq[:2]) == rp.start and tuple(seq[-2:]) == rp.end


def test_cell_usage_counters_and_balance():
    n, p = 1000, 0.5
    prm = dense_params(n, p, 3)
    oracle = ExposureOracle(n, 3, p, 1)
    rp, part, stats = build_reservoir(oracle, prm)
    R = prm.reservoir_size
    assert sum(stats.cell_uses2) == stats.spike_calls == R
    assert sum(stats.cell_uses3) == stats.connect_calls
    assert stats.connect_calls == sum(ab.t for ab in rp.absorbers) + R - 1
    assert max(stats.cell_uses2) - min(stats.cell_uses2) <= 1
    assert max(stats.cell_uses3) - min(stats.cell_uses3) <= 1
    assert stats.seed_queries == 3 * R


def test_containment_report():
    n, p = 1000, 0.5
    prm = dense_params(n, p, 3)
    oracle = ExposureOracle(n, 3, p, 2)
    mark = len(oracle.E.order)
    rp, part, _ = build_reservoir(oracle, prm)
    rep = containment_report(rp, part, oracle, mark)
    assert rep["inside_S"]
    assert rep["unexplained"] == []
    allowed = set(rp.R) | set(rp.start) | set(rp.end)
    assert all(set(e) <= allowed for e in rep["ends_edges"])


def test_exhausted_cell_is_a_fail():
    prm = desk_params(60, 1.0, 3, reservoir_size=3, s_fraction=0.65, q_cap=1, cell_size=2)
    oracle = ExposureOracle(60, 3, 1.0, 0)
    with pytest.raises(Fail) as exc:
        build_reservoir(oracle, prm)
    assert exc.value.stage == "reservoir"

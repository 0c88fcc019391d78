import math
from fractions import Fraction

import pytest

from tightham.errors import InvalidArgument
from tightham.params import (
    absorber_cost, budget_overrides, desk_params, leaf_target, make_params, paper_constants, paper_depth,
    paper_params, schedule_depth,
)


@pytest.mark.parametrize("r", [3, 4, 5])
def test_paper_constants(r):
    k = paper_constants(r)
    xp = Fraction(1, 100**r)
    xi = xp**r / (2 * r * 2 ** (20 * r))
    assert k["xi_prime"] == xp
    assert k["xi"] == xi
    assert k["delta"] == 8**r * xi + xp
    assert k["C"] == 10 ** (8 * r)
    assert k["c"] == Fraction(1, 10**r) * xi**r


def test_leaf_target_example():
    # ln n = 7 exactly
    n = math.exp(7)
    assert math.ceil(0.01 ** -1 * math.log(n)) == 700
    assert leaf_target(1097, 0.01, 3) == math.ceil(100 * math.log(1097))


def test_depth_example():
    n = math.exp(7)
    lln = math.log(math.log(n))
    assert abs(lln - 1.946) < 1e-3
    assert 2 * math.ceil(math.log(700) / lln) == 8
    assert paper_depth(1097, 700) == 8


def test_paper_profile_sizes():
    prm = paper_params(10**6, 0.5, 3)
    cell = math.ceil(10**24 * math.log(10**6) / 0.5)
    assert prm.reservoir_size == 2 * cell
    assert prm.cell_size == cell
    assert prm.cell_cap == 2
    assert prm.fan_parts == 8
    assert prm.t % 2 == 0


def test_schedule_depth_counts_expansions():
    # r=3: steps 1,2 expand, 3,4 continue, 5 expands
    assert schedule_depth(3, 8, 8) == 1
    assert schedule_depth(3, 64, 8) == 2
    assert schedule_depth(3, 65, 8) == 5
    assert schedule_depth(3, 1, 8) == 1


def test_desk_defaults():
    prm = desk_params(2000, 0.05, 3)
    assert prm.grow == 8
    assert prm.Q == min(leaf_target(2000, 0.05, 3), 5000)
    assert prm.reservoir_size == max(8, math.ceil(math.log(2000) / 0.05))
    assert prm.l_budget == math.floor(5 * 2000 / 8)
    assert prm.step_cap == 20000
    assert prm.cell_cap == 0


def test_desk_overrides_and_errors():
    assert desk_params(500, 0.5, 3, q_cap=4).Q == 4
    with pytest.raises(InvalidArgument):
        desk_params(500, 0.5, 3, nonsense=1)
    with pytest.raises(InvalidArgument):
        desk_params(500, 0.0, 3)
    with pytest.raises(InvalidArgument):
        desk_params(500, 0.5, 2)
    with pytest.raises(InvalidArgument):
        desk_params(100, 0.01, 3)  # reservoir larger than the working set


def test_make_params_dispatch():
    assert make_params("desk", 500, 0.5, 3).profile == "desk"
    assert make_params("paper", 500, 0.5, 3, t=4).t == 4
    with pytest.raises(InvalidArgument):
        make_params("other", 500, 0.5, 3)


def test_absorber_cost():
    assert absorber_cost(3, 1) == (4, 4, 4)
    assert absorber_cost(3, 2) == (4, 4, 8)
    assert absorber_cost(4, 1) == (6, 6, 4)


def test_budget_fits_and_refuses():
    ov = budget_overrides(1000, 0.5, 3)
    prm = desk_params(1000, 0.5, 3, **ov)
    s_size = math.floor(prm.s_fraction * 1000)
    assert prm.reservoir_size + 3 * prm.cell_size <= s_size
    assert prm.Q ** 2 * 0.5 ** 2 >= 16
    with pytest.raises(InvalidArgument):
        budget_overrides(2000, 0.05, 3)


def test_to_dict_drops_extra():
    d = desk_params(500, 0.5, 3).to_dict()
    assert "extra" not in d and d["n"] == 500

"""Building the reservoir path: one absorber per reservoir vertex, chained together.

The working set ``S`` (the lowest ``s_fraction * n`` ids) is split into the
reservoir ``R`` and three equal pools. ``U1`` holds the short seed paths
through each reservoir vertex, ``U2`` the spike backbones and ``U3`` the
connecting paths. ``U2`` and ``U3`` are cut into cells; each connect call
works in the least used cell, minus vertices already on some structure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .connector import ConnectStats, Trace, connect, edge_density, spike_connect
from .errors import Fail, InvalidArgument, StructuralError
from .oracle import ExposureOracle
from .params import Params
from .paths import Absorber, ReservoirPath, absorber_traverse, reservoir_traverse, rev, validate_tight


@dataclass
class Partition:
    S: list[int]
    R: list[int]
    U1: list[int]
    U2: list[int]
    U3: list[int]
    cells2: list[list[int]]
    cells3: list[list[int]]
    use2: list[int] = field(default_factory=list)
    use3: list[int] = field(default_factory=list)
    used: set[int] = field(default_factory=set)

    def __post_init__(self):
        self.use2 = self.use2 or [0] * len(self.cells2)
        self.use3 = self.use3 or [0] * len(self.cells3)


def _cells(pool: list[int], size: int) -> list[list[int]]:
    count = max(1, len(pool) // max(size, 1))
    cells = [pool[i * size : (i + 1) * size] for i in range(count)]
    cells[-1] = pool[(count - 1) * size :]
    return cells


def partition_sets(n: int, params: Params) -> Partition:
    """Deterministic split by ascending id: ``R`` first, then ``U1``, ``U2``, ``U3``."""
    s_size = math.floor(params.s_fraction * n)
    R = params.reservoir_size
    each = (s_size - R) // 3
    if R < 1 or each < 1:
        raise InvalidArgument(f"cannot fit a reservoir of {R} and three pools into {s_size} vertices")
    ids = list(range(R + 3 * each))
    U1 = ids[R : R + each]
    U2 = ids[R + each : R + 2 * each]
    U3 = ids[R + 2 * each :]
    return Partition(ids, ids[:R], U1, U2, U3, _cells(U2, params.cell_size), _cells(U3, params.cell_size))


def _least_used(use: list[int], cap: int, stage: str) -> int:
    i = min(range(len(use)), key=lambda j: (use[j], j))
    if 0 < cap <= use[i]:
        raise Fail("reservoir", f"every {stage} cell has been used {cap} times")
    return i


def seed_absorber_path(a: int, part: Partition, oracle: ExposureOracle, r: int,
                       half_rule: bool = True) -> tuple[tuple[int, ...], int]:
    """Tight path ``(x_{r-1},..,x_1, a, u_1,..,u_{r-1})`` on unused ``U1`` vertices.

    ``x_1..x_{r-2}`` are the lowest unused ids; the remaining vertices come
    from successive queries, lowest hit first. Returns the path and the
    number of queries made (``r``; the first two share one search base).
    With ``half_rule`` the call fails once more than half of ``U1`` is used.
    """
    free = [v for v in part.U1 if v not in part.used]
    if half_rule and 2 * len(free) < len(part.U1):
        raise Fail("reservoir", "more than half of U1 is used")
    xs = free[: r - 2]
    if len(xs) < r - 2:
        raise Fail("reservoir", "U1 exhausted")
    taken = set(xs)
    queries = 0

    def pick(base, skip=()):
        nonlocal queries
        queries += 1
        pool = [v for v in free if v not in taken and v not in base]
        if not pool:
            raise Fail("reservoir", "U1 exhausted")
        hits = sorted(h for h in oracle.reveal(base, pool) if h not in skip)
        if not hits:
            raise Fail("reservoir", f"no seed edge for base {sorted(base)}")
        taken.add(hits[0])
        return hits[0]

    base0 = tuple(reversed(xs)) + (a,)
    x_last = pick(base0)
    xs_full = xs + [x_last]  # x_1..x_{r-1}
    us: list[int] = []
    for j in range(1, r):
        base = tuple(reversed(xs_full[: r - j - 1])) + (a,) + tuple(us)
        us.append(pick(base))
    seed = tuple(reversed(xs_full)) + (a,) + tuple(us)
    part.used.update(seed)
    return seed, queries


@dataclass
class ReservoirStats:
    spike_calls: int = 0
    connect_calls: int = 0
    seed_queries: int = 0
    new_E: int = 0
    max_density: float = 0.0
    absorber_sizes: list = field(default_factory=list)
    cell_uses2: list = field(default_factory=list)
    cell_uses3: list = field(default_factory=list)


def _cell_set(cell: list[int], part: Partition, params: Params) -> list[int]:
    free = [v for v in cell if v not in part.used]
    if len(free) < params.parts_total:
        raise Fail("reservoir", f"only {len(free)} free vertices left in a cell")
    return free


def _guard_density(oracle: ExposureOracle, cell: list[int], params: Params, stats: ReservoirStats) -> None:
    dens = edge_density(oracle.E, frozenset(cell)) / max(len(cell), 1) ** (params.r - 1)
    stats.max_density = max(stats.max_density, dens)
    if dens > params.c:
        raise Fail("reservoir", f"cell density {dens:.3g} exceeds c={params.c}")


def build_absorber(a: int, seed: tuple[int, ...], part: Partition, oracle: ExposureOracle, params: Params,
                   stats: ReservoirStats | None = None, trace: Trace | None = None) -> Absorber:
    """Spike backbone from ``x_1`` to ``u_a`` in a ``U2`` cell, then one connector
    per spike pair ``(x_i, y_i)`` in ``U3`` cells."""
    r = params.r
    k = r - 1
    stats = stats if stats is not None else ReservoirStats()
    i2 = _least_used(part.use2, params.cell_cap, "U2")
    cell = part.cells2[i2]
    _guard_density(oracle, cell, params, stats)
    part.use2[i2] += 1
    cs = ConnectStats()
    sp = spike_connect(seed[:k], rev(seed[k + 1 :]), _cell_set(cell, part, params), oracle, params, trace=trace, stats=cs)
    stats.spike_calls += 1
    stats.new_E += cs.new_E
    for s in sp.spikes[1:-1]:
        part.used.update(s)
    ab = Absorber(a, tuple(seed), list(sp.spikes), [])
    for i in range(1, ab.t + 1):
        i3 = _least_used(part.use3, params.cell_cap, "U3")
        cell = part.cells3[i3]
        _guard_density(oracle, cell, params, stats)
        part.use3[i3] += 1
        cs = ConnectStats()
        P = connect(ab.x(i), rev(ab.y(i)), _cell_set(cell, part, params), oracle, params, trace=trace, stats=cs)
        stats.connect_calls += 1
        stats.new_E += cs.new_E
        part.used.update(P[k:-k])
        ab.connectors.append(P)
    with_a = absorber_traverse(ab, True)
    without_a = absorber_traverse(ab, False)
    if not (validate_tight(with_a, oracle.present, r) and validate_tight(without_a, oracle.present, r)):
        raise StructuralError(f"absorber for {a} does not traverse")
    if set(with_a) - set(without_a) != {a} or len(with_a) != len(without_a) + 1:
        raise StructuralError(f"absorber traversals for {a} differ by more than the vertex itself")
    stats.absorber_sizes.append(len(with_a))
    return ab


def chain_absorbers(absorbers: list[Absorber], part: Partition, oracle: ExposureOracle, params: Params,
                    stats: ReservoirStats | None = None, trace: Trace | None = None) -> ReservoirPath:
    k = params.r - 1
    stats = stats if stats is not None else ReservoirStats()
    chain = []
    for left, right in zip(absorbers, absorbers[1:]):
        i3 = _least_used(part.use3, params.cell_cap, "U3")
        cell = part.cells3[i3]
        _guard_density(oracle, cell, params, stats)
        part.use3[i3] += 1
        cs = ConnectStats()
        P = connect(left.v_a, rev(right.u_a), _cell_set(cell, part, params), oracle, params, trace=trace, stats=cs)
        stats.connect_calls += 1
        stats.new_E += cs.new_E
        part.used.update(P[k:-k])
        chain.append(P)
    rp = ReservoirPath(absorbers, chain)
    if not validate_tight(reservoir_traverse(rp, ()), oracle.present, params.r):
        raise StructuralError("reservoir path does not traverse")
    return rp


def build_reservoir(oracle: ExposureOracle, params: Params, part: Partition | None = None,
                    trace: Trace | None = None) -> tuple[ReservoirPath, Partition, ReservoirStats]:
    """All seed paths first, then absorbers, then the chain (reservoir vertices in increasing order)."""
    part = part if part is not None else partition_sets(oracle.n, params)
    stats = ReservoirStats()
    try:
        seeds = []
        for a in part.R:
            seed, q = seed_absorber_path(a, part, oracle, params.r, params.profile == "paper")
            stats.seed_queries += q
            seeds.append(seed)
        absorbers = [build_absorber(a, seed, part, oracle, params, stats, trace) for a, seed in zip(part.R, seeds)]
        rp = chain_absorbers(absorbers, part, oracle, params, stats, trace)
    except Fail as exc:
        if exc.stage == "reservoir":
            raise
        raise Fail("reservoir", f"{exc.stage}: {exc.reason}") from exc
    stats.cell_uses2 = list(part.use2)
    stats.cell_uses3 = list(part.use3)
    return rp, part, stats


def containment_report(rp: ReservoirPath, part: Partition, oracle: ExposureOracle, mark: int = 0) -> dict:
    """Check the containment properties of a finished reservoir path.

    ``inside_S``: every vertex and every exposure since ``mark`` lies in ``S``.
    ``ends_edges``: exposures contained in ``R`` plus the two end tuples.
    These are never empty: each end tuple itself is exposed while building
    its spike backbone, and the first absorber's seed exposes a base made of
    its reservoir vertex and ``r-2`` vertices of its end tuple. Their
    candidate pools lie in ``U1``/``U2``, so later queries at the ends
    remain fresh.
    ``unexplained``: present r-sets not covered by any recorded exposure.
    """
    S = set(part.S)
    verts = set(reservoir_traverse(rp, ()))
    new = oracle.E.order[mark:]
    allowed = set(rp.R) | set(rp.start) | set(rp.end)
    return {
        "inside_S": verts <= S and all(e <= S for e in new),
        "ends_edges": [sorted(e) for e in new if e <= allowed],
        "unexplained": oracle.unexplained_present(),
    }

"""The full pipeline: reservoir path, greedy covering, closing, absorption.

Failure stages reported on ``Fail.stage``: ``reservoir``, ``coverU``,
``coverL``, ``close``.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from .connector import ConnectStats, Trace, connect
from .errors import Fail, StructuralError
from .oracle import ExposureOracle
from .params import Params
from .paths import ReservoirPath, reservoir_traverse
from .reservoir import Partition, build_reservoir


@dataclass
class TrialState:
    """Working state of one trial.

    The almost-path is ``reservoir_traverse(rp, ()) + ext``. Vertices of
    ``R1_used`` occur twice in it (once inside the reservoir path, once in
    ``ext``); ``members`` is its vertex set.
    """

    oracle: ExposureOracle
    params: Params
    rp: ReservoirPath
    part: Partition
    res_seq: list[int]
    members: set[int]
    ext: list[int] = field(default_factory=list)
    L: set[int] = field(default_factory=set)
    U: set[int] = field(default_factory=set)
    R: frozenset = frozenset()
    R1_used: set[int] = field(default_factory=set)
    step: int = 0
    l_used: int = 0
    phase: str = "reservoir"
    close_interior: list[int] = field(default_factory=list)
    stage_ms: dict = field(default_factory=dict)

    def end(self) -> tuple[int, ...]:
        k = self.params.r - 1
        if len(self.ext) >= k:
            return tuple(self.ext[-k:])
        return tuple((self.res_seq[len(self.res_seq) - k + len(self.ext):] + self.ext))

    def start(self) -> tuple[int, ...]:
        return tuple(self.res_seq[: self.params.r - 1])


def init_state(oracle: ExposureOracle, params: Params, rp: ReservoirPath, part: Partition) -> TrialState:
    seq = reservoir_traverse(rp, ())
    S = set(part.S)
    return TrialState(
        oracle, params, rp, part, seq, set(seq),
        L=set(range(oracle.n)) - S,
        U=S - set(seq),
        R=frozenset(rp.R),
    )


def _extend(state: TrialState, v: int) -> None:
    window = tuple(sorted(state.end() + (v,)))
    if window not in state.oracle.present:
        raise StructuralError(f"extension by {v} does not close a decided edge")
    state.members.add(v)
    state.ext.append(v)
    state.step += 1
    if state.step > state.params.step_cap:
        raise Fail(state.phase, f"step cap {state.params.step_cap} reached")


def _lowest_hit(state: TrialState, pool) -> int | None:
    cands = [v for v in pool if v not in state.members]
    if not cands:
        return None
    hits = state.oracle.reveal(state.end(), cands)
    return min(hits) if hits else None


def greedy_cover_U(state: TrialState) -> TrialState:
    """Extend one vertex at a time until ``U`` is covered.

    Steps congruent to 1 or 2 mod 3 take a vertex of ``L``; every third
    step tries ``U`` first and falls back to ``L``.
    """
    state.phase = "coverU"
    budget = state.params.l_budget
    left_U = set(state.U - state.members)
    free_L = sorted(state.L - state.members)
    while left_U:
        i = state.step + 1
        v = None
        if i % 3 == 0:
            v = _lowest_hit(state, sorted(left_U))
        if v is None:
            if state.l_used >= budget:
                raise Fail("coverU", f"L budget of {budget} exhausted with {len(left_U)} of U left")
            v = _lowest_hit(state, free_L)
            if v is None:
                raise Fail("coverU", f"no edge into L at step {i}")
            state.l_used += 1
            free_L.remove(v)
        else:
            left_U.discard(v)
        _extend(state, v)
    return state


def greedy_cover_L(state: TrialState) -> TrialState:
    """Extend until ``L`` is covered, preferring ``L`` and falling back to unused ``R``.

    A reservoir vertex taken here already sits on the reservoir path, so it
    joins ``R1_used`` and is later dropped from its absorber.
    """
    state.phase = "coverL"
    cap = len(state.R) // 2
    free_L = sorted(state.L - state.members)
    while free_L:
        v = _lowest_hit(state, free_L)
        if v is not None:
            free_L.remove(v)
            _extend(state, v)
            continue
        if len(state.R1_used) >= cap:
            raise Fail("coverL", f"reservoir budget of {cap} vertices exhausted")
        tail = set(state.end())
        pool = sorted(x for x in state.R - state.R1_used if x not in tail)
        hits = state.oracle.reveal(state.end(), pool) if pool else set()
        if not hits:
            raise Fail("coverL", "no edge into L or R")
        v = min(hits)
        state.R1_used.add(v)
        _extend(state, v)
    return state


def almost_path(state: TrialState) -> list[int]:
    return state.res_seq + state.ext


def close_cycle(state: TrialState, trace: Trace | None = None, stats: ConnectStats | None = None) -> TrialState:
    """Join the end tuple of the almost-path to its start tuple through unused reservoir vertices."""
    state.phase = "close"
    prm = state.params
    r = prm.r
    R1 = sorted(state.R - state.R1_used)
    if 2 * len(R1) < len(state.R):
        raise Fail("close", f"only {len(R1)} of {len(state.R)} reservoir vertices unused")
    seq_end = state.end()
    seq_start = state.start()
    ends = set(seq_end) | set(seq_start)
    E = state.oracle.E
    touching = set()
    for z in ends:
        for e in E.containing(frozenset((z,))):
            touching |= e
    pool = [v for v in R1 if v not in touching and v not in ends]
    S = pool[: prm.close_size]
    if len(S) < 2 * prm.fan_parts:
        raise Fail("close", f"{len(S)} usable reservoir vertices for the closing path")
    try:
        P = connect(seq_end, seq_start, S, state.oracle, prm, trace=trace, stats=stats)
    except Fail as exc:
        raise Fail("close", f"{exc.stage}: {exc.reason}") from exc
    state.close_interior = P[r - 1 : -(r - 1)]
    return state


def absorb_duplicates(state: TrialState) -> list[int]:
    """Drop every twice-used reservoir vertex from its absorber and return the cyclic order."""
    res_vertices = set(state.res_seq)
    twice = (set(state.ext) | set(state.close_interior)) & res_vertices
    if not twice <= state.R:
        raise StructuralError(f"non-reservoir vertices used twice: {sorted(twice - state.R)}")
    return reservoir_traverse(state.rp, twice) + state.ext + state.close_interior


@dataclass
class HamiltonResult:
    cycle: list[int]
    state: TrialState
    reservoir_stats: object


def find_tight_hamilton(oracle: ExposureOracle, params: Params, trace: Trace | None = None) -> HamiltonResult:
    """Run every stage; raises ``Fail`` tagged with the failing stage."""
    timings: dict[str, float] = {}
    t0 = time.perf_counter()
    rp, part, rstats = build_reservoir(oracle, params, trace=trace)
    timings["reservoir"] = (time.perf_counter() - t0) * 1e3
    state = init_state(oracle, params, rp, part)
    state.stage_ms = timings
    t0 = time.perf_counter()
    greedy_cover_U(state)
    timings["coverU"] = (time.perf_counter() - t0) * 1e3
    t0 = time.perf_counter()
    greedy_cover_L(state)
    timings["coverL"] = (time.perf_counter() - t0) * 1e3
    t0 = time.perf_counter()
    close_cycle(state, trace)
    cycle = absorb_duplicates(state)
    timings["close"] = (time.perf_counter() - t0) * 1e3
    return HamiltonResult(cycle, state, rstats)

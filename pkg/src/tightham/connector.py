"""Connecting two (r-1)-tuples by a short tight path (or spike path) inside a set S.

``connect`` grows a fan of paths from each end, the second fan avoiding
tuples that too many leaves of the first fan cannot be joined to, and then
finds ``r-1`` fresh edges joining a leaf of one fan to a reversed leaf of
the other. All randomness is drawn through ``ExposureOracle.reveal``.
"""

from __future__ import annotations

import json
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from itertools import combinations, permutations
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import Fail, InvalidArgument, StructuralError
from .oracle import DangerHypergraph, ExposureOracle, SubsetIndex
from .params import Params
from .paths import Fan, SpikePath, rev, windows

REASONS = ("i", "ii", "iii", "iv")


class Trace:
    """Collects one JSON-able record per exposure; optionally streams them to a file."""

    def __init__(self, stream=None):
        self.records: list[dict] = []
        self.stream = stream

    def emit(self, **rec) -> None:
        self.records.append(rec)
        if self.stream is not None:
            self.stream.write(json.dumps(rec) + "\n")


@dataclass
class Thresholds:
    """Goodness bounds indexed by ``|c|``; sizes ``|c| >= r-2`` use exact rules instead."""

    deg_E: list[float]
    mult: list[float]
    deg_D: list[float]


def thresholds(params: Params, s_size: int) -> Thresholds:
    r, xi, xp, Q, L, k = params.r, params.xi, params.xi_prime, params.Q, params.log_n, params.slack
    s = float(max(s_size, 1))
    deg_E = [k * xi ** (r - c - 1) * s ** (r - c - 2) for c in range(r)]
    mult = [k * xi ** (r - c - 1) * Q * s ** (-c - 1) * L ** (c + 1) for c in range(r)]
    deg_D = [k * (xp * s) ** (r - c - 2) for c in range(r)]
    return Thresholds(deg_E, mult, deg_D)


def goodness_failure(
    b: int,
    a: Sequence[int],
    on_path: bool,
    mult: Callable[[frozenset], int],
    E: SubsetIndex,
    D: SubsetIndex,
    S,
    th: Thresholds,
) -> str | None:
    """First violated goodness condition for appending ``b`` after end tuple ``a``, or None.

    For ``|c| <= r-3`` the (slack-scaled) degree and multiplicity bounds apply.
    For ``|c| >= r-2`` the bounds are below one at asymptotic scale, so they are
    applied exactly: ``{c, b}`` must not be an edge of ``E`` or of ``D`` and
    must not occur as an interval of any fan path.
    """
    if on_path:
        return "i"
    r = len(a) + 1
    for size in range(r):
        for c in combinations(a, size):
            f = frozenset(c) | {b}
            if size <= r - 3:
                if E.degree(f, S) > th.deg_E[size]:
                    return "ii"
                if mult(f) > th.mult[size]:
                    return "iii"
                if D.degree(f, S) > th.deg_D[size]:
                    return "iv"
            else:
                if size == r - 2 and f in E.edges:
                    return "ii"
                if mult(f) > 0:
                    return "iii"
                if size == r - 2 and f in D.edges:
                    return "iv"
    return None


def _node_of(fan: Fan | None, a: Sequence[int]) -> int | None:
    if fan is None:
        return None
    a = tuple(a)
    for x in fan.leaves:
        if fan.end[x] == a:
            return x
    return None


def is_good(b, a, fan, E, D, S, params: Params) -> bool:
    """Whether ``b`` is good for the path of ``fan`` ending in ``a``."""
    S = S if isinstance(S, (set, frozenset)) else frozenset(S)
    node = _node_of(fan, a)
    on_path = fan.on_path(node, b) if node is not None else b in a
    mult = (lambda f: fan.mult.get(f, 0)) if fan is not None else (lambda f: 0)
    D = D if D is not None else DangerHypergraph(params.r)
    return goodness_failure(b, tuple(a), on_path, mult, E, D, S, thresholds(params, len(S))) is None


# -- fans ------------------------------------------------------------------


@dataclass
class FanReport:
    steps: int = 0
    exposures: int = 0
    dead: int = 0
    shortfall: int = 0
    rejections: Counter = field(default_factory=Counter)
    log: list = field(default_factory=list)


def build_fan(
    s: Sequence[int],
    parts: Sequence[Sequence[int]],
    D: DangerHypergraph | None,
    oracle: ExposureOracle,
    params: Params,
    S=None,
    spike: bool = False,
    depth: int | None = None,
    trace: Trace | None = None,
    observer: Callable | None = None,
    health: list | None = None,
    phase: str = "fan",
) -> tuple[Fan, FanReport]:
    """Grow a fan of ``Q`` paths from ``s`` by alternating expand and continue rounds.

    Step ``i`` takes its new vertices from ``parts[(i-1) % len(parts)]``.
    In the paper profile a step that cannot add the required vertices fails;
    in the desk profile the path gets what is available and a path with
    no good extension is dropped.
    """
    r = params.r
    s = tuple(s)
    parts = [sorted(P) for P in parts]
    if not parts:
        raise InvalidArgument("need at least one part")
    seen: set[int] = set(s)
    for P in parts:
        if seen & set(P):
            raise InvalidArgument("parts must be pairwise disjoint and avoid the root")
        seen |= set(P)
    if S is None:
        S = frozenset(v for P in parts for v in P)
    elif not isinstance(S, (set, frozenset)):
        S = frozenset(S)
    D = D if D is not None else DangerHypergraph(r)
    E = oracle.E
    th = thresholds(params, len(S))
    strict = params.profile == "paper"
    t = depth if depth is not None else (params.spike_depth() if spike else params.t)
    Q = params.Q
    fan = Fan(s, r, spike)
    rep = FanReport()
    mult_of = fan.mult.get

    for i in range(1, t + 1):
        expand = i % (2 * (r - 1)) in range(1, r)
        T = parts[(i - 1) % len(parts)]
        num = len(fan.leaves)
        new_leaves: list[int] = []
        dead = short = 0
        for node in list(fan.leaves):
            a = fan.end[node]
            on = fan.path_set(node)
            cands = [v for v in T if v not in on]
            hits = oracle.reveal(a, cands)
            rep.exposures += 1
            need = min(params.grow, Q + 1 - num) if expand else 1
            chosen: list[int] = []
            rej = Counter()
            for b in sorted(hits):
                why = goodness_failure(b, a, False, lambda f: mult_of(f, 0), E, D, S, th)
                if why:
                    rej[why] += 1
                    continue
                chosen.append(b)
                if len(chosen) == need:
                    break
            rep.rejections.update(rej)
            if trace is not None:
                trace.emit(
                    phase=phase, step=i, base=list(a), candidates=len(cands), hits=len(hits),
                    chosen=chosen, rejections=dict(rej),
                )
            if len(chosen) < need:
                if strict:
                    raise Fail("fan", f"step {i}: {len(chosen)} good vertices, needed {need}")
                short += need - len(chosen)
            if not chosen:
                dead += 1
                num -= 1
                fan.prune(node)
                continue
            if observer is not None:
                for b in chosen:
                    observer(fan, node, b, S, D, th)
            for b in chosen:
                new_leaves.append(fan.add_child(node, b))
            num += len(chosen) - 1
        fan.leaves = new_leaves
        rep.steps = i
        rep.dead += dead
        rep.shortfall += short
        rep.log.append({"step": i, "expand": expand, "leaves": len(new_leaves), "dead": dead, "shortfall": short})
        if health is not None:
            health.append(check_fan_health(fan, E, D, S, params, dead=dead, shortfall=short, expand=expand))
        if not fan.leaves:
            raise Fail("fan", f"every path died at step {i}")
    if strict and len(fan.leaves) < Q:
        raise Fail("fan", f"fan reached {len(fan.leaves)} leaves, needed {Q}")
    return fan, rep


# -- blocking and danger ---------------------------------------------------


def is_blocked(w: Sequence[int], x: Sequence[int], E: SubsetIndex, mark: int | None = None) -> bool:
    """Whether some E-edge lies inside ``r`` consecutive vertices of ``w + rev(x)``.

    With ``mark`` only edges recorded before that position of ``E.order`` count.
    """
    w, x = tuple(w), tuple(x)
    if set(w) & set(x):
        raise InvalidArgument("w and x overlap")
    r = len(w) + 1
    z = w + rev(x)
    for win in windows(z, r):
        for sub in combinations(win, r - 1):
            f = frozenset(sub)
            if f in E.edges and (mark is None or E.existed_before(f, mark)):
                return True
    return False


def _blocked_patterns(w: tuple, S_prime: set, E: SubsetIndex, r: int) -> set[tuple]:
    """Partial assignments ``((slot, vertex), ...)`` of x over ``S_prime`` that make
    (w, x) blocked by an E-edge meeting w; every x extending one is blocked."""
    wset = set(w)
    pos = {v: i + 1 for i, v in enumerate(w)}
    out: set[tuple] = set()
    for v in w:
        for e in E.containing(frozenset((v,))):
            B = e - wset
            if not B:
                out.add(())  # e inside w blocks every x
                continue
            if not B <= S_prime:
                continue
            # window s of w.rev(x) holds w_s.. and the last s entries of x
            slots = min(pos[y] for y in e & wset)
            last = range(r - 1 - slots, r - 1)
            for place in permutations(last, len(B)):
                out.add(tuple(sorted(zip(place, sorted(B)))))
    return out


def _completions(fixed: dict, others: list, pool: list, avoid: list) -> Iterable[frozenset]:
    """Fill the ``others`` slots with distinct pool vertices outside the slot's ``avoid`` set."""
    used = set(fixed.values())

    def rec(i, chosen):
        if i == len(others):
            yield frozenset(chosen)
            return
        for q in pool:
            if q not in used and q not in avoid[others[i]] and q not in chosen:
                yield from rec(i + 1, chosen | {q})

    yield from rec(0, frozenset(used))


def danger_set(leaves: Iterable[Sequence[int]], S_prime: Iterable[int], E: SubsetIndex, threshold: float, r: int | None = None) -> DangerHypergraph:
    """(r-1)-sets over ``S_prime`` having an ordering that is blocked for at least
    ``threshold`` of the given leaves.

    Each leaf contributes partial assignments of x (from E-edges meeting it).
    A search over slots assigns either one of the vertices those patterns
    use there or "anything else", and prunes once fewer than ``threshold``
    leaves stay compatible, so full tuples are only listed for danger classes.
    Leaves must avoid ``S_prime`` (they come from the other half of the parts).
    """
    leaves = [tuple(w) for w in leaves]
    r = r if r is not None else (len(leaves[0]) + 1 if leaves else E.r)
    D = DangerHypergraph(r)
    Sp = set(S_prime)
    if any(Sp.intersection(w) for w in leaves):
        raise InvalidArgument("leaves must avoid S_prime")
    need = max(1, math.ceil(threshold - 1e-12))
    if len(leaves) < need:
        return D
    for e in E.edges:
        if len(e) == r - 1 and e <= Sp:
            D.add(e)
    patterns: dict[tuple, set[int]] = defaultdict(set)
    for i, w in enumerate(leaves):
        for pat in _blocked_patterns(w, Sp, E, r):
            patterns[pat].add(i)
    if not patterns:
        return D
    k = r - 1
    values = [sorted({q for pat in patterns for j, q in pat if j == slot}) for slot in range(k)]
    avoid = [set(vs) for vs in values]
    pool = sorted(Sp)
    items = [(dict(pat), ls) for pat, ls in patterns.items()]

    def union(its):
        out: set[int] = set()
        for _, ls in its:
            out |= ls
        return out

    def search(slot, fixed, its):
        if len(union(its)) < need:
            return
        if slot == k:
            others = [j for j in range(k) if j not in fixed]
            for X in _completions(fixed, others, pool, avoid):
                D.add(X)
            return
        taken = set(fixed.values())
        for q in values[slot]:
            if q in taken:
                continue
            search(slot + 1, {**fixed, slot: q}, [(pat, ls) for pat, ls in its if pat.get(slot, q) == q])
        search(slot + 1, fixed, [(pat, ls) for pat, ls in its if slot not in pat])

    search(0, {}, items)
    return D


# -- linking ---------------------------------------------------------------


def link_fans(fan_u: Fan, fan_v: Fan, oracle: ExposureOracle, params: Params, mark: int, trace: Trace | None = None) -> tuple[int, int]:
    """Find leaves ``a`` of ``fan_u`` and ``x`` of ``fan_v`` with ``a + rev(x)`` a tight path.

    Breadth-first exposure from the a-side covers the first ``k+1`` windows
    (``k = (r-2)//2``) and from the b-side the last ``m+1`` windows
    (``m = (r-3)//2``); together that is all ``r-1`` windows. Pairs blocked by
    E-edges recorded before ``mark`` are never selected. Returns the two leaf
    nodes.
    """
    r = params.r
    k, m = (r - 2) // 2, (r - 3) // 2
    A = [(x, fan_u.end[x]) for x in fan_u.leaves]
    Bl = [(y, rev(fan_v.end[y])) for y in fan_v.leaves]
    present = oracle.present

    def reveal(base, cands):
        if trace is not None:
            trace.emit(phase="link", base=list(base), candidates=len(cands))
        return oracle.reveal(base, cands)

    # a-side: ext[j] must equal b[j]
    by_prefix: dict[tuple, list] = defaultdict(list)
    for y, b in Bl:
        for j in range(k + 2):
            by_prefix[b[:j]].append((y, b))
    frontier = [(x, a, ()) for x, a in A]
    for j in range(k + 1):
        nxt = []
        for x, a, ext in frontier:
            used = set(a) | set(ext)
            cands = sorted({b[j] for _, b in by_prefix[ext] if b[j] not in used})
            if not cands:
                continue
            base = (a + ext)[-(r - 1):]
            for h in sorted(reveal(base, cands)):
                nxt.append((x, a, ext + (h,)))
        frontier = nxt
    a_done = frontier

    # b-side: y[i] must equal a[r-2-i]
    by_suffix: dict[tuple, set] = defaultdict(set)
    for _, a in A:
        for i in range(m + 1):
            by_suffix[a[r - 1 - i:]].add(a[r - 2 - i])
    b_ok: dict[int, set] = defaultdict(set)
    frontier_b = [(y, b, ()) for y, b in Bl]
    for i in range(m + 1):
        nxt = []
        for y, b, ys in frontier_b:
            used = set(b) | set(ys)
            suffix = rev(ys)
            cands = sorted(v for v in by_suffix[suffix] if v not in used)
            if not cands:
                continue
            base = suffix + b[: r - 1 - i]
            for h in sorted(reveal(base, cands)):
                nxt.append((y, b, ys + (h,)))
        frontier_b = nxt
    for y, b, ys in frontier_b:
        b_ok[y].add(ys)

    E = oracle.E
    for x, a, ext in a_done:
        want = tuple(a[r - 2 - i] for i in range(m + 1))
        for y, b in by_prefix[ext]:
            if want not in b_ok.get(y, ()):
                continue
            if set(a) & set(b):
                continue
            if is_blocked(a, rev(b), E, mark):
                continue
            if all(tuple(sorted(wd)) in present for wd in windows(a + b, r)):
                return x, y
    raise Fail("link", "no unblocked leaf pair could be joined")


# -- connecting ------------------------------------------------------------


@dataclass
class ConnectStats:
    new_E: int = 0
    exposures: int = 0
    leaves_u: int = 0
    leaves_v: int = 0
    danger: int = 0
    dead: int = 0
    shortfall: int = 0
    density: float = 0.0
    rejections: Counter = field(default_factory=Counter)

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["rejections"] = dict(self.rejections)
        return d


def split_parts(S: Iterable[int], count: int) -> list[list[int]]:
    return [list(map(int, c)) for c in np.array_split(np.array(sorted(S), dtype=np.int64), count)]


def check_request(u, v, S, oracle: ExposureOracle, params: Params) -> frozenset:
    r = params.r
    u, v = tuple(u), tuple(v)
    if len(u) != r - 1 or len(v) != r - 1 or len(set(u)) != r - 1 or len(set(v)) != r - 1:
        raise InvalidArgument("end tuples must be r-1 distinct vertices")
    if set(u) & set(v):
        raise InvalidArgument("end tuples overlap")
    S = frozenset(S)
    if S & (set(u) | set(v)):
        raise InvalidArgument("S meets the end tuples")
    if len(S) < 2 * params.fan_parts:
        raise InvalidArgument(f"|S|={len(S)} too small to split into {2 * params.fan_parts} parts")
    for z in set(u) | set(v):
        for e in oracle.E.containing(frozenset((z,))):
            if e & S:
                raise InvalidArgument(f"E-edge {sorted(e)} meets both S and the end tuples")
    return S


def edge_density(E: SubsetIndex, S: frozenset) -> int:
    return sum(1 for e in E.edges if e <= S)


def _connect_fans(u, v, S, oracle, params, spike, trace, observer, health, stats):
    K = params.fan_parts
    chunks = split_parts(S, 2 * K)
    mark0 = len(oracle.E.order)
    fan_u, rep_u = build_fan(u, chunks[:K], None, oracle, params, S, spike, trace=trace, observer=observer, health=health, phase="fan_u")
    S_prime = frozenset(v for c in chunks[K:] for v in c)
    D = danger_set(fan_u.leaf_tuples(), S_prime, oracle.E, params.xi_prime * params.Q, params.r)
    # the v-side path is read backwards at the end, so a tight fan grows from rev(v)
    root_v = v if spike else rev(v)
    fan_v, rep_v = build_fan(root_v, chunks[K:], D, oracle, params, S, spike, trace=trace, observer=observer, health=health, phase="fan_v")
    mark = len(oracle.E.order)
    x, y = link_fans(fan_u, fan_v, oracle, params, mark, trace)
    new = oracle.E.order[mark0:]
    allowed = S | set(u) | set(v)
    for e in new:
        if not e <= allowed:
            raise StructuralError(f"exposure {sorted(e)} escaped S and the end tuples")
    stats.new_E += len(new)
    stats.exposures += rep_u.exposures + rep_v.exposures
    stats.leaves_u, stats.leaves_v = len(fan_u.leaves), len(fan_v.leaves)
    stats.danger = len(D)
    stats.dead += rep_u.dead + rep_v.dead
    stats.shortfall += rep_u.shortfall + rep_v.shortfall
    stats.rejections.update(rep_u.rejections)
    stats.rejections.update(rep_v.rejections)
    return fan_u, x, fan_v, y


def connect(
    u: Sequence[int],
    v: Sequence[int],
    S: Iterable[int],
    oracle: ExposureOracle,
    params: Params,
    trace: Trace | None = None,
    observer: Callable | None = None,
    health: list | None = None,
    stats: ConnectStats | None = None,
) -> list[int]:
    """Tight path starting with tuple ``u`` and ending with tuple ``v``, interior inside ``S``."""
    S = check_request(u, v, S, oracle, params)
    stats = stats if stats is not None else ConnectStats()
    stats.density = edge_density(oracle.E, S) / len(S) ** (params.r - 1)
    fan_u, x, fan_v, y = _connect_fans(tuple(u), tuple(v), S, oracle, params, False, trace, observer, health, stats)
    return fan_u.path(x) + fan_v.path(y)[::-1]


def spike_connect(
    u: Sequence[int],
    v: Sequence[int],
    S: Iterable[int],
    oracle: ExposureOracle,
    params: Params,
    trace: Trace | None = None,
    observer: Callable | None = None,
    health: list | None = None,
    stats: ConnectStats | None = None,
) -> SpikePath:
    """Even-length spike path whose first spike is ``rev(u)`` and last is ``rev(v)``."""
    S = check_request(u, v, S, oracle, params)
    stats = stats if stats is not None else ConnectStats()
    stats.density = edge_density(oracle.E, S) / len(S) ** (params.r - 1)
    fan_u, x, fan_v, y = _connect_fans(tuple(u), tuple(v), S, oracle, params, True, trace, observer, health, stats)
    return SpikePath(fan_u.spikes_of(x) + fan_v.spikes_of(y)[::-1])


# -- diagnostics -----------------------------------------------------------


def check_fan_health(fan: Fan, E: SubsetIndex, D: SubsetIndex | None, S, params: Params, dead: int = 0, shortfall: int = 0, expand: bool = False) -> dict:
    """Evaluate the five fan properties on the current leaves.

    Each entry maps to ``{"ok": bool, "margin": float}`` where the margin is
    bound minus worst observed value (negative means violated). ``P4_leaf``
    is the strict leaf-distinctness check. Never changes the fan.
    """
    r, xi, xp, Q, L, k = params.r, params.xi, params.xi_prime, params.Q, params.log_n, params.slack
    S = S if isinstance(S, (set, frozenset)) else frozenset(S)
    s = float(len(S))
    D = D if D is not None else DangerHypergraph(r)
    leaves = fan.leaf_tuples()

    in_E = sum(1 for a in leaves if frozenset(a) in E.edges)
    p1_ok = dead == 0 and shortfall == 0 and in_E == 0
    eS = edge_density(E, S)
    p2_bound = k * params.c * s ** (r - 1) + 20 * r * Q
    p3 = p4 = p5 = math.inf
    leaf_dups = 0
    for a in leaves:
        if fan.mult.get(frozenset(a), 0) != 1:
            leaf_dups += 1
        for size in range(1, r):
            for c in combinations(a, size):
                f = frozenset(c)
                if size < r - 1:
                    p3 = min(p3, k * xi ** (r - size) * s ** (r - 1 - size) + 1 - E.degree(f, S))
                p4 = min(p4, k * xi ** (r - size) * Q * s ** (-size) * L**size + 1 - fan.mult.get(f, 0))
                if size <= r - 2:
                    p5 = min(p5, k * (xp * s) ** (r - size - 1) - D.degree(f, S))
    return {
        "leaves": len(leaves),
        "P1": {"ok": p1_ok, "margin": float(-(dead + shortfall + in_E))},
        "P2": {"ok": eS <= p2_bound, "margin": p2_bound - eS},
        "P3": {"ok": p3 >= 0, "margin": p3},
        "P4": {"ok": p4 >= 0, "margin": p4},
        "P4_leaf": {"ok": leaf_dups == 0, "margin": float(-leaf_dups)},
        "P5": {"ok": p5 >= 0, "margin": p5},
    }

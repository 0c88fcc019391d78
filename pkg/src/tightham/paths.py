"""Path-like structures: tight paths, spike paths, fans and absorbers.

Conventions used throughout the package:

* A tight path is a vertex sequence in which every ``r`` consecutive
  vertices form an edge. Its start tuple is the first ``r-1`` vertices and
  its end tuple the last ``r-1`` vertices, both read left to right.
* A spike path is a list of disjoint ``(r-1)``-tuples ``a_1..a_t`` such that
  ``rev(a_i) + a_{i+1}`` is a tight path for every ``i``.
* ``connect(u, v)`` returns a tight path ``P`` with ``P[:r-1] == u`` and
  ``P[-(r-1):] == v``; its *interior* is everything in between.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from .errors import InvalidArgument, StructuralError
from .hypergraph import DenseHypergraph


def rev(t: Sequence[int]) -> tuple[int, ...]:
    return tuple(reversed(t))


def _edge_set(decided) -> frozenset | set:
    if isinstance(decided, DenseHypergraph):
        return decided.edges
    if isinstance(decided, (set, frozenset)):
        return decided
    return frozenset(tuple(sorted(e)) for e in decided)


class TightPath:
    """Doubly-linked vertex sequence with an O(1) membership index.

    Vertices are distinct, so each vertex is its own node: ``_next[v]`` and
    ``_prev[v]`` hold the neighbours.
    """

    __slots__ = ("r", "head", "tail", "_next", "_prev")

    def __init__(self, r: int, vertices: Iterable[int] = ()):
        self.r = r
        self.head = None
        self.tail = None
        self._next: dict[int, int | None] = {}
        self._prev: dict[int, int | None] = {}
        for v in vertices:
            self.append(v)

    def __len__(self) -> int:
        return len(self._next)

    def __contains__(self, v) -> bool:
        return v in self._next

    def __iter__(self) -> Iterator[int]:
        v = self.head
        while v is not None:
            yield v
            v = self._next[v]

    def __repr__(self) -> str:
        return f"TightPath(r={self.r}, len={len(self)})"

    def vertices(self) -> list[int]:
        return list(self)

    def vertex_set(self):
        return self._next.keys()

    def append(self, v: int) -> None:
        if v in self._next:
            raise StructuralError(f"vertex {v} already on the path")
        self._next[v] = None
        self._prev[v] = self.tail
        if self.tail is None:
            self.head = v
        else:
            self._next[self.tail] = v
        self.tail = v

    def extend(self, vs: Iterable[int]) -> None:
        for v in vs:
            self.append(v)

    def prepend(self, v: int) -> None:
        if v in self._next:
            raise StructuralError(f"vertex {v} already on the path")
        self._prev[v] = None
        self._next[v] = self.head
        if self.head is None:
            self.tail = v
        else:
            self._prev[self.head] = v
        self.head = v

    def end(self, k: int | None = None) -> tuple[int, ...]:
        """The last ``k`` vertices (default ``r-1``) in path order."""
        k = self.r - 1 if k is None else k
        out = []
        v = self.tail
        while v is not None and len(out) < k:
            out.append(v)
            v = self._prev[v]
        return tuple(reversed(out))

    def start(self, k: int | None = None) -> tuple[int, ...]:
        k = self.r - 1 if k is None else k
        out = []
        v = self.head
        while v is not None and len(out) < k:
            out.append(v)
            v = self._next[v]
        return tuple(out)

    def reversed(self) -> "TightPath":
        return TightPath(self.r, reversed(self.vertices()))

    def to_json(self) -> str:
        return json.dumps(self.vertices())


def path_from_json(text: str, r: int) -> TightPath:
    return TightPath(r, json.loads(text))


def windows(seq: Sequence[int], r: int) -> Iterator[tuple[int, ...]]:
    for i in range(len(seq) - r + 1):
        yield tuple(seq[i : i + r])


def validate_tight(path, decided, r: int | None = None) -> bool:
    """True iff the vertices are distinct and every window of ``r`` is a decided edge."""
    seq = list(path)
    if r is None:
        r = path.r if isinstance(path, TightPath) else getattr(decided, "r", None)
    if r is None:
        raise InvalidArgument("uniformity r is unknown")
    if len(seq) < r:
        raise InvalidArgument(f"path of length {len(seq)} is shorter than r={r}")
    if len(set(seq)) != len(seq):
        return False
    edges = _edge_set(decided)
    return all(tuple(sorted(w)) in edges for w in windows(seq, r))


@dataclass
class SpikePath:
    spikes: list[tuple[int, ...]]

    def __len__(self) -> int:
        return len(self.spikes)

    def vertices(self) -> list[int]:
        return [v for s in self.spikes for v in s]

    def required_edges(self) -> list[tuple[int, ...]]:
        out = []
        for a, b in zip(self.spikes, self.spikes[1:]):
            out.extend(tuple(sorted(w)) for w in windows(rev(a) + tuple(b), len(a) + 1))
        return out

    def to_json(self) -> str:
        return json.dumps([list(s) for s in self.spikes])


def validate_spike(sp: SpikePath, decided, r: int | None = None) -> bool:
    spikes = [tuple(s) for s in sp.spikes]
    if len(spikes) < 2:
        raise InvalidArgument("a spike path needs at least two spikes")
    if r is None:
        r = len(spikes[0]) + 1
    if any(len(s) != r - 1 for s in spikes):
        raise InvalidArgument(f"every spike must have {r - 1} vertices")
    flat = [v for s in spikes for v in s]
    if len(set(flat)) != len(flat):
        return False
    edges = _edge_set(decided)
    return all(e in edges for e in SpikePath(spikes).required_edges())


class Fan:
    """Prefix tree of tight (or spike) paths grown from one root tuple.

    Node 0 is the root tuple itself. Every other node is one appended vertex;
    the path of a node is the root followed by the vertices on the way down.
    ``leaves`` lists the nodes that end a current path. ``mult`` counts, for a
    vertex set ``f``, the live nodes whose last ``|f|`` path vertices are
    exactly ``f``: that is the number of distinct paths containing ``f`` as a
    consecutive interval once truncated right behind it.

    In a spike fan the end tuple is reversed each time ``r-1`` vertices
    complete a spike, so that continuing tightly from it keeps the spike
    condition. The walk order (parent end tuple plus new vertex) is what
    the interval bookkeeping uses.
    """

    def __init__(self, root: Sequence[int], r: int, spike: bool = False):
        root = tuple(root)
        if len(root) != r - 1 or len(set(root)) != r - 1:
            raise InvalidArgument("fan root must be r-1 distinct vertices")
        self.r = r
        self.spike = spike
        self.root = root
        self.parent: list[int] = [-1]
        self.vertex: list[int | None] = [None]
        self.end: list[tuple[int, ...]] = [root]
        self.depth: list[int] = [0]
        self.children: list[int] = [0]
        self.leaves: list[int] = [0]
        self.mult: Counter = Counter()
        for j in range(1, r):
            for k in range(1, j + 1):
                self.mult[frozenset(root[j - k : j])] += 1

    def __len__(self) -> int:
        return len(self.leaves)

    def _keys(self, node: int) -> list[frozenset]:
        walk = self.end[self.parent[node]] + (self.vertex[node],)
        return [frozenset(walk[-k:]) for k in range(1, self.r + 1)]

    def add_child(self, node: int, b: int) -> int:
        pe = self.end[node]
        new_end = pe[1:] + (b,)
        d = self.depth[node] + 1
        if self.spike and d % (self.r - 1) == 0:
            new_end = rev(new_end)
        idx = len(self.parent)
        self.parent.append(node)
        self.vertex.append(b)
        self.end.append(new_end)
        self.depth.append(d)
        self.children.append(0)
        self.children[node] += 1
        for key in self._keys(idx):
            self.mult[key] += 1
        return idx

    def prune(self, node: int) -> None:
        """Drop a dead path, removing prefix nodes no other path still uses."""
        while node > 0 and self.children[node] == 0:
            for key in self._keys(node):
                self.mult[key] -= 1
                if self.mult[key] == 0:
                    del self.mult[key]
            par = self.parent[node]
            self.children[par] -= 1
            self.children[node] = -1
            node = par

    def path(self, node: int) -> list[int]:
        out = []
        while node > 0:
            out.append(self.vertex[node])
            node = self.parent[node]
        return list(self.root) + out[::-1]

    def on_path(self, node: int, v: int) -> bool:
        while node > 0:
            if self.vertex[node] == v:
                return True
            node = self.parent[node]
        return v in self.root

    def path_set(self, node: int) -> set[int]:
        return set(self.path(node))

    def leaf_tuples(self) -> list[tuple[int, ...]]:
        return [self.end[x] for x in self.leaves]

    def paths(self) -> list[list[int]]:
        return [self.path(x) for x in self.leaves]

    def spikes_of(self, node: int) -> list[tuple[int, ...]]:
        """Spike sequence of a spike-fan path whose depth is a multiple of r-1."""
        seq = self.path(node)
        k = self.r - 1
        if (len(seq) - k) % k:
            raise StructuralError("path does not end on a completed spike")
        spikes = [rev(seq[:k])]
        for i in range(k, len(seq), k):
            spikes.append(tuple(seq[i : i + k]))
        return spikes


def fan_mult(fan: Fan, frag: Iterable[int]) -> int:
    return fan.mult.get(frozenset(frag), 0)


@dataclass
class Absorber:
    """Gadget that can route a tight path through its reservoir vertex or around it.

    ``seed`` is the tight path ``(x_{r-1},..,x_1, a, u_1,..,u_{r-1})``.
    ``spikes`` is the spike backbone ``[x_1..x_t, v_a, y_t..y_1, u_a]`` and
    ``connectors[i-1]`` is the tight path ``P_i`` from ``x_i`` to ``rev(y_i)``.
    """

    a: int
    seed: tuple[int, ...]
    spikes: list[tuple[int, ...]] = field(default_factory=list)
    connectors: list[list[int]] = field(default_factory=list)

    @property
    def r(self) -> int:
        return (len(self.seed) + 1) // 2

    @property
    def t(self) -> int:
        return len(self.spikes) // 2 - 1

    def x(self, i: int) -> tuple[int, ...]:
        return self.spikes[i - 1]

    def y(self, i: int) -> tuple[int, ...]:
        return self.spikes[2 * self.t + 1 - i]

    @property
    def u_a(self) -> tuple[int, ...]:
        return tuple(self.seed[self.r :])

    @property
    def v_a(self) -> tuple[int, ...]:
        return self.spikes[self.t]

    def check_complete(self) -> None:
        k = self.r - 1
        if len(self.spikes) < 4 or len(self.spikes) % 2:
            raise StructuralError("spike backbone missing or of odd length")
        if self.spikes[0] != rev(self.seed[:k]) or self.spikes[-1] != self.u_a:
            raise StructuralError("spike backbone does not join the seed path ends")
        if len(self.connectors) != self.t:
            raise StructuralError(f"expected {self.t} connector paths, have {len(self.connectors)}")
        for i, P in enumerate(self.connectors, start=1):
            if tuple(P[:k]) != self.x(i) or tuple(P[-k:]) != rev(self.y(i)):
                raise StructuralError(f"connector {i} does not join x_{i} to rev(y_{i})")

    def to_dict(self) -> dict:
        return {
            "a": self.a,
            "seed": list(self.seed),
            "spikes": [list(s) for s in self.spikes],
            "connectors": [list(P) for P in self.connectors],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Absorber":
        return cls(d["a"], tuple(d["seed"]), [tuple(s) for s in d["spikes"]], [list(P) for P in d["connectors"]])


def absorber_traverse(ab: Absorber, include_a: bool) -> list[int]:
    """Tight path from ``rev(u_a)`` to ``v_a`` through every absorber vertex,
    with or without ``a``.

    With ``a``: ``rev(u_a), a, x_1, P_1, rev(y_1)``, then for ``i = 2..t`` the
    connector ``P_i`` is walked backwards (``y_i .. rev(x_i)``) when ``i`` is
    even and forwards (``x_i .. rev(y_i)``) when odd. Without ``a``: start at
    ``rev(u_a)`` and walk every connector in the opposite direction. Both end
    with ``v_a``.
    """
    ab.check_complete()
    seq = list(rev(ab.u_a))
    forward_parity = 1 if include_a else 0
    if include_a:
        seq.append(ab.a)
    for i, P in enumerate(ab.connectors, start=1):
        if i % 2 == forward_parity:
            seq.extend(P)
        else:
            seq.extend(reversed(P))
    seq.extend(ab.v_a)
    return seq


@dataclass
class ReservoirPath:
    absorbers: list[Absorber]
    chain: list[list[int]]
    R: frozenset = frozenset()

    def __post_init__(self):
        self.R = frozenset(ab.a for ab in self.absorbers)
        self._by_a = {ab.a: ab for ab in self.absorbers}

    @property
    def start(self) -> tuple[int, ...]:
        return rev(self.absorbers[0].u_a)

    @property
    def end(self) -> tuple[int, ...]:
        return self.absorbers[-1].v_a

    def absorber(self, a: int) -> Absorber:
        return self._by_a[a]

    def vertex_set(self) -> set[int]:
        return set(reservoir_traverse(self, ()))

    def to_json(self) -> str:
        return json.dumps({"absorbers": [ab.to_dict() for ab in self.absorbers], "chain": self.chain})

    @classmethod
    def from_json(cls, text: str) -> "ReservoirPath":
        d = json.loads(text)
        return cls([Absorber.from_dict(x) for x in d["absorbers"]], d["chain"])


def reservoir_traverse(rp: ReservoirPath, omit: Iterable[int]) -> list[int]:
    """Tight path over ``V(P_res) - omit`` with the same end tuples as ``P_res``."""
    omit = set(omit)
    if not omit <= rp.R:
        raise InvalidArgument(f"vertices {sorted(omit - rp.R)} are not reservoir vertices")
    if len(rp.chain) != len(rp.absorbers) - 1:
        raise StructuralError("chain must have one connector between consecutive absorbers")
    k = rp.absorbers[0].r - 1
    seq: list[int] = []
    for i, ab in enumerate(rp.absorbers):
        if i:
            seq.extend(rp.chain[i - 1][k:-k])
        seq.extend(absorber_traverse(ab, ab.a not in omit))
    return seq

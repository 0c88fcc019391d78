"""Explicit r-uniform hypergraphs on the ground set ``range(n)``.

Used for small-n verification, the brute-force oracle and the oracle's
pre-sampled mode. Vertices are 0-based; edges are canonically sorted tuples.
"""

from __future__ import annotations

from itertools import combinations
from typing import Iterable, Sequence

from .errors import InvalidArgument, ParseError


def canon(vertices: Iterable[int]) -> tuple[int, ...]:
    return tuple(sorted(vertices))


class DenseHypergraph:
    """Immutable r-uniform hypergraph with edges stored as sorted tuples."""

    __slots__ = ("n", "r", "edges")

    def __init__(self, n: int, r: int, edges: Iterable[Sequence[int]] = ()):
        if r < 1 or n < 0:
            raise InvalidArgument(f"bad dimensions n={n}, r={r}")
        store = set()
        for e in edges:
            ce = canon(e)
            if len(ce) != r or len(set(ce)) != r:
                raise InvalidArgument(f"edge {tuple(e)} is not an {r}-set")
            if ce[0] < 0 or ce[-1] >= n:
                raise InvalidArgument(f"edge {tuple(e)} has a vertex outside [0, {n})")
            store.add(ce)
        self.n = n
        self.r = r
        self.edges = frozenset(store)

    def __len__(self) -> int:
        return len(self.edges)

    def __contains__(self, e) -> bool:
        return canon(e) in self.edges

    def __eq__(self, other) -> bool:
        if not isinstance(other, DenseHypergraph):
            return NotImplemented
        return (self.n, self.r, self.edges) == (other.n, other.r, other.edges)

    def __hash__(self) -> int:
        return hash((self.n, self.r, self.edges))

    def __repr__(self) -> str:
        return f"DenseHypergraph(n={self.n}, r={self.r}, m={len(self.edges)})"

    def to_edge_list(self, header: bool = True) -> str:
        lines = [f"{self.n} {self.r}"] if header else []
        lines += [" ".join(map(str, e)) for e in sorted(self.edges)]
        return "\n".join(lines) + "\n"


def make_complete(n: int, r: int) -> DenseHypergraph:
    if r > n:
        raise InvalidArgument(f"r={r} exceeds n={n}")
    return DenseHypergraph(n, r, combinations(range(n), r))


def has_edge(g: DenseHypergraph, e: Sequence[int]) -> bool:
    return canon(e) in g.edges


def degree(g: DenseHypergraph, f: Iterable[int], S: Iterable[int]) -> int:
    """Number of edges ``e`` with ``f <= e`` and ``e - f <= S``."""
    f = frozenset(f)
    if not 1 <= len(f) <= g.r - 1:
        raise InvalidArgument(f"|f|={len(f)} outside [1, {g.r - 1}]")
    S = frozenset(S)
    return sum(1 for e in g.edges if f.issubset(e) and S.issuperset(set(e) - f))


def from_edge_list(text: str, n: int | None = None, r: int | None = None) -> DenseHypergraph:
    """Parse one edge per line; an optional first line ``"n r"`` sets the dimensions.

    ``n`` defaults to one past the largest id seen when neither the header nor
    the caller supplies it.
    """
    rows: list[tuple[int, tuple[int, ...]]] = []
    header_seen = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        try:
            ids = tuple(int(tok) for tok in line.split())
        except ValueError:
            raise ParseError(f"non-integer token in {line!r}", lineno) from None
        # a 2-token first line is a header unless it contradicts a caller-given r
        if not rows and not header_seen and len(ids) == 2 and (r is None or (r != 2 and ids[1] == r)):
            header_seen = True
            hn, hr = ids
            if n is not None and n != hn:
                raise ParseError(f"header n={hn} disagrees with n={n}", lineno)
            if r is not None and r != hr:
                raise ParseError(f"header r={hr} disagrees with r={r}", lineno)
            n, r = hn, hr
            continue
        rows.append((lineno, ids))

    if r is None:
        if not rows:
            raise ParseError("cannot infer r from an empty edge list")
        r = len(rows[0][1])
    seen_max = -1
    for lineno, ids in rows:
        if len(ids) != r:
            raise ParseError(f"expected {r} vertex ids, got {len(ids)}", lineno)
        if len(set(ids)) != r:
            raise ParseError("repeated vertex in edge", lineno)
        if min(ids) < 0:
            raise ParseError("negative vertex id", lineno)
        if n is not None and max(ids) >= n:
            raise ParseError(f"vertex id {max(ids)} >= n={n}", lineno)
        seen_max = max(seen_max, max(ids))
    if n is None:
        n = seen_max + 1
    return DenseHypergraph(n, r, (ids for _, ids in rows))

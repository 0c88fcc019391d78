"""Lazy edge exposure for the binomial random r-uniform hypergraph.

The oracle is the only source of randomness in a trial. Whether an r-set is
an edge is a pure function of ``(seed, r-set)`` (a counter-based hash), so the
order in which the algorithm asks never changes the answers. Every query goes
through a *search base*: an (r-1)-set together with the candidate vertices
offered alongside it. The bases, with their candidate pools, form the
exposure hypergraph ``E``; in strict mode a second decision of any r-set
raises ``DisciplineViolation``.
"""

from __future__ import annotations

import json
from itertools import combinations
from math import comb
from typing import Iterable, Sequence

import numpy as np

from .errors import DisciplineViolation, InvalidArgument
from .hypergraph import DenseHypergraph

PRESAMPLE_CAP = 10**7

_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_GOLDEN = 0x9E3779B97F4A7C15
_MASK64 = (1 << 64) - 1


def _mix64(z: np.ndarray) -> np.ndarray:
    # splitmix64 finalizer, vectorised; uint64 arithmetic wraps
    z = z ^ (z >> np.uint64(30))
    z = z * _M1
    z = z ^ (z >> np.uint64(27))
    z = z * _M2
    return z ^ (z >> np.uint64(31))


def _mix_int(x: int) -> int:
    return int(_mix64(np.array([x & _MASK64], dtype=np.uint64))[0])


def _mask_of(vertices: Iterable[int], n: int) -> int:
    arr = np.fromiter(vertices, dtype=np.int64)
    if arr.size == 0:
        return 0
    bits = np.zeros(n, dtype=np.uint8)
    bits[arr] = 1
    return int.from_bytes(np.packbits(bits, bitorder="little").tobytes(), "little")


def _bits_of(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


class SubsetIndex:
    """(r-1)-uniform edge store with an index from every proper subset to its edges."""

    def __init__(self, r: int):
        self.r = r
        self.edges: set[frozenset] = set()
        self._sub: dict[frozenset, list[frozenset]] = {}

    def __len__(self) -> int:
        return len(self.edges)

    def __contains__(self, f) -> bool:
        return frozenset(f) in self.edges

    def __iter__(self):
        return iter(self.edges)

    def add(self, e: frozenset) -> bool:
        if e in self.edges:
            return False
        self.edges.add(e)
        items = tuple(e)
        for k in range(1, len(items)):
            for sub in combinations(items, k):
                self._sub.setdefault(frozenset(sub), []).append(e)
        return True

    def containing(self, f: frozenset) -> list[frozenset]:
        return self._sub.get(f, [])

    def degree(self, f: Iterable[int], S: Iterable[int] | None = None) -> int:
        """Edges ``e`` with ``f <= e`` and ``e - f <= S`` (``S=None`` means no restriction).

        For ``f`` empty this is the number of edges inside ``S``.
        """
        f = frozenset(f)
        if S is not None and not isinstance(S, (set, frozenset)):
            S = frozenset(S)
        if not f:
            if S is None:
                return len(self.edges)
            return sum(1 for e in self.edges if e <= S)
        if len(f) >= self.r - 1:
            if len(f) > self.r - 1:
                return 0
            return 1 if f in self.edges else 0
        cands = self._sub.get(f, ())
        if S is None:
            return len(cands)
        return sum(1 for e in cands if (e - f) <= S)


class ExposureHypergraph(SubsetIndex):
    """Search bases used so far, each with the candidate pool(s) it was exposed against."""

    def __init__(self, r: int):
        super().__init__(r)
        self.masks: dict[frozenset, int] = {}
        self.order: list[frozenset] = []
        self.first_index: dict[frozenset, int] = {}

    def record(self, base: frozenset, mask: int) -> None:
        if self.add(base):
            self.first_index[base] = len(self.order)
            self.order.append(base)
            self.masks[base] = mask
        else:
            self.masks[base] |= mask

    def candidates_of(self, base: Iterable[int]) -> list[int]:
        return _bits_of(self.masks.get(frozenset(base), 0))

    def existed_before(self, base: frozenset, mark: int) -> bool:
        idx = self.first_index.get(base)
        return idx is not None and idx < mark


class DangerHypergraph(SubsetIndex):
    """(r-1)-sets that are blocked with too many leaves of the first fan."""


class ExposureOracle:
    """Decides r-sets of G^(r)(n, p) on demand and keeps the exposure book.

    ``mode`` is ``"lazy"`` (nothing decided up front) or ``"presampled"``
    (all C(n, r) sets decided eagerly; only for small instances). Both modes
    use the same per-r-set hash, so they agree answer for answer.
    """

    def __init__(self, n: int, r: int, p: float, seed: int = 0, mode: str = "lazy", strict: bool = True):
        if r < 3:
            raise InvalidArgument("r must be at least 3")
        if n < r:
            raise InvalidArgument(f"n={n} smaller than r={r}")
        if not 0.0 <= p <= 1.0:
            raise InvalidArgument(f"p={p} outside [0, 1]")
        if mode not in ("lazy", "presampled"):
            raise InvalidArgument(f"unknown mode {mode!r}")
        self.n, self.r, self.p, self.seed = n, r, float(p), int(seed)
        self.mode = mode
        self.strict = strict
        self.violations = 0
        self.E = ExposureHypergraph(r)
        self.present: set[tuple[int, ...]] = set()
        self.exposures = 0
        self.decisions = 0
        self._graph: frozenset | None = None

        salt = _mix_int(self.seed ^ _GOLDEN)
        self._salt = np.uint64(_mix_int(salt + 0x632BE59BD9B4E019))
        vids = np.arange(n, dtype=np.uint64) * np.uint64(_GOLDEN) + np.uint64(salt)
        self._hv = _mix64(vids)
        if mode == "presampled":
            self._graph = self._presample().edges
            self.present = set(self._graph)

    @classmethod
    def from_graph(cls, g: DenseHypergraph, strict: bool = True) -> "ExposureOracle":
        """Oracle whose decisions are membership in an explicit graph."""
        o = cls(g.n, g.r, 1.0, 0, "lazy", strict)
        o.mode = "graph"
        o._graph = g.edges
        o.p = len(g.edges) / comb(g.n, g.r) if g.n >= g.r else 0.0
        return o

    # -- decisions -------------------------------------------------------

    def _uniform(self, sums: np.ndarray) -> np.ndarray:
        z = _mix64(sums ^ self._salt)
        return (z >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))

    def _decide(self, base: Sequence[int], cands: np.ndarray) -> np.ndarray:
        if self._graph is not None:
            b = tuple(base)
            return np.fromiter(
                (tuple(sorted(b + (int(v),))) in self._graph for v in cands), dtype=bool, count=len(cands)
            )
        if self.p >= 1.0:
            return np.ones(len(cands), dtype=bool)
        if self.p <= 0.0:
            return np.zeros(len(cands), dtype=bool)
        base_sum = self._hv[list(base)].sum(dtype=np.uint64)
        return self._uniform(self._hv[cands] + base_sum) < self.p

    def is_present(self, rset: Sequence[int]) -> bool:
        """Ground truth for one r-set, without touching the exposure book.

        For verification only; the algorithm never calls this.
        """
        rset = tuple(rset)
        return bool(self._decide(rset[:-1], np.array([rset[-1]], dtype=np.int64))[0])

    def _presample(self) -> DenseHypergraph:
        total = comb(self.n, self.r)
        if total > PRESAMPLE_CAP:
            raise InvalidArgument(f"C({self.n},{self.r})={total} exceeds the pre-sampling cap")
        combos = np.array(list(combinations(range(self.n), self.r)), dtype=np.int64).reshape(-1, self.r)
        if self.p >= 1.0:
            keep = np.ones(len(combos), dtype=bool)
        elif self.p <= 0.0:
            keep = np.zeros(len(combos), dtype=bool)
        else:
            sums = self._hv[combos].sum(axis=1, dtype=np.uint64)
            keep = self._uniform(sums) < self.p
        return DenseHypergraph(self.n, self.r, (tuple(map(int, c)) for c in combos[keep]))

    # -- exposure --------------------------------------------------------

    def covered(self, base: Iterable[int], candidates: Iterable[int]) -> set[int]:
        """Candidates ``v`` for which ``base + {v}`` was already decided by some exposure."""
        B = frozenset(base)
        cset = candidates if isinstance(candidates, (set, frozenset)) else set(candidates)
        E = self.E
        out: set[int] = set()
        own = E.masks.get(B, 0)
        if own:
            out.update(v for v in cset if (own >> v) & 1)
        for w in B:
            K = B - {w}
            for B2 in E.containing(K):
                if B2 == B:
                    continue
                (x,) = B2 - K
                if x in cset and (E.masks[B2] >> w) & 1:
                    out.add(x)
        return out

    def _check_args(self, base, candidates) -> tuple[tuple[int, ...], list[int]]:
        base = tuple(int(v) for v in base)
        if len(base) != self.r - 1 or len(set(base)) != self.r - 1:
            raise InvalidArgument(f"base {base} is not an (r-1)-tuple of distinct vertices")
        cands = sorted({int(v) for v in candidates})
        bset = set(base)
        if any(v in bset for v in cands):
            raise InvalidArgument("candidates overlap the base")
        if cands and (cands[0] < 0 or cands[-1] >= self.n) or min(base) < 0 or max(base) >= self.n:
            raise InvalidArgument("vertex id out of range")
        return base, cands

    def expose(self, base: Sequence[int], candidates: Iterable[int]) -> set[int]:
        """Reveal which ``base + {v}``, ``v`` in ``candidates``, are edges.

        Records ``base`` (with its candidate pool) in ``E``. In strict mode a
        candidate whose r-set was already decided raises.
        """
        base, cands = self._check_args(base, candidates)
        B = frozenset(base)
        dup = self.covered(B, cands)
        if dup:
            self.violations += 1
            if self.strict:
                v = min(dup)
                raise DisciplineViolation(base + (v,), base)
        self.exposures += 1
        self.E.record(B, _mask_of(cands, self.n))
        if not cands:
            return set()
        arr = np.array(cands, dtype=np.int64)
        hit = arr[self._decide(base, arr)]
        self.decisions += len(cands)
        hits = {int(v) for v in hit}
        sb = tuple(sorted(base))
        for v in hits:
            self.present.add(tuple(sorted(sb + (v,))))
        return hits

    def reveal(self, base: Sequence[int], candidates: Iterable[int]) -> set[int]:
        """Disciplined query: fresh candidates are exposed, ones already exposed with
        this very base are answered from memory, ones decided via another base are
        dropped (their randomness is spent)."""
        base, cands = self._check_args(base, candidates)
        B = frozenset(base)
        done = self.covered(B, cands)
        own = self.E.masks.get(B, 0)
        memo = {v for v in done if (own >> v) & 1}
        fresh = [v for v in cands if v not in done]
        hits = self.expose(base, fresh) if fresh or B not in self.E.masks else set()
        if memo:
            sb = tuple(sorted(base))
            hits |= {v for v in memo if tuple(sorted(sb + (v,))) in self.present}
        return hits

    # -- inspection ------------------------------------------------------

    def decided_count(self) -> int:
        return sum(m.bit_count() for m in self.E.masks.values())

    def decided_edges(self) -> DenseHypergraph:
        return DenseHypergraph(self.n, self.r, self.present)

    def unexplained_present(self) -> list[tuple[int, ...]]:
        """Present r-sets not covered by any recorded (base, candidate) pair."""
        bad = []
        masks = self.E.masks
        for e in self.present:
            ok = False
            for v in e:
                B = frozenset(e) - {v}
                if (masks.get(B, 0) >> v) & 1:
                    ok = True
                    break
            if not ok:
                bad.append(e)
        return bad

    def dump(self) -> str:
        decided = set()
        for B, m in self.E.masks.items():
            for v in _bits_of(m):
                e = tuple(sorted(B | {v}))
                decided.add((*e, int(e in self.present)))
        decided = [list(d) for d in sorted(decided)]
        return json.dumps(
            {
                "n": self.n,
                "r": self.r,
                "p": self.p,
                "seed": self.seed,
                "decided": decided,
                "bases": [sorted(B) for B in self.E.order],
            }
        )


def exposure_degree(E: SubsetIndex, f: Iterable[int], S: Iterable[int]) -> int:
    return E.degree(f, S)

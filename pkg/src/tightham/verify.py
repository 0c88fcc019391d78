"""Ground-truth checks and brute-force twins of the algorithm's counting primitives.

By convention nothing here imports another module of this package (other
than the exception types): every function is a separate, exhaustive
re-implementation meant to be compared against the fast versions.
"""

from __future__ import annotations

from itertools import combinations, permutations

from .errors import InvalidArgument

BRUTE_FORCE_CAP = 12


def _edges_of(g) -> set:
    edges = g.edges if hasattr(g, "edges") else g
    return {tuple(sorted(e)) for e in edges}


def verify_tight_hamilton(order, g, r: int | None = None) -> bool:
    """All ``n`` cyclic windows of ``r`` consecutive vertices are edges of ``g``."""
    n = g.n if hasattr(g, "n") else len(order)
    r = r if r is not None else g.r
    order = list(order)
    if sorted(order) != list(range(n)):
        raise InvalidArgument("order is not a permutation of the vertex set")
    edges = _edges_of(g)
    ext = order + order[: r - 1]
    return all(tuple(sorted(ext[i : i + r])) in edges for i in range(n))


def window_check(order, edges, r: int) -> bool:
    """Second, index-arithmetic formulation of the cyclic window test."""
    n = len(order)
    if n < r:
        return False
    for i in range(n):
        w = set()
        for j in range(r):
            w.add(order[(i + j) % n])
        if len(w) != r or frozenset(w) not in edges:
            return False
    return True


def brute_force_hamilton(g) -> list[int] | None:
    """First tight Hamilton cycle found by exhaustive search, or None.

    Vertex 0 is fixed first and orders whose second vertex exceeds the last
    are skipped, so each cycle is tried once up to rotation and reflection.
    """
    n, r = g.n, g.r
    if n > BRUTE_FORCE_CAP:
        raise InvalidArgument(f"n={n} exceeds the brute-force cap of {BRUTE_FORCE_CAP}")
    if n < r:
        return None
    edges = {frozenset(e) for e in g.edges}
    if n == r:
        return list(range(n)) if frozenset(range(n)) in edges else None
    for rest in permutations(range(1, n)):
        if rest[0] > rest[-1]:
            continue
        order = (0,) + rest
        if window_check(order, edges, r):
            return list(order)
    return None


def oracle_degree(edges, f, S) -> int:
    """Edges ``e`` with ``f <= e`` and ``e - f <= S`` by scanning every edge."""
    f, S = set(f), set(S)
    count = 0
    for e in edges:
        e = set(e)
        if f.issubset(e) and (e - f).issubset(S):
            count += 1
    return count


def oracle_exposure_degree(bases, f, S) -> int:
    """Same count over (r-1)-sets; with ``f`` empty, the bases inside ``S``."""
    return oracle_degree(bases, f, S)


def oracle_mult(paths, frag) -> int:
    """Distinct paths containing ``frag`` consecutively, each truncated right behind it."""
    frag = set(frag)
    k = len(frag)
    seen = set()
    for P in paths:
        P = list(P)
        for end in range(k, len(P) + 1):
            if set(P[end - k : end]) == frag:
                seen.add(tuple(P[:end]))
    return len(seen)


def oracle_is_blocked(w, x, bases) -> bool:
    """Enumerate windows of ``w + reversed(x)`` and every (r-1)-subset of each."""
    w, x = list(w), list(x)
    if set(w) & set(x):
        raise InvalidArgument("w and x overlap")
    r = len(w) + 1
    z = w + x[::-1]
    base_set = {frozenset(b) for b in bases}
    for i in range(len(z) - r + 1):
        for sub in combinations(z[i : i + r], r - 1):
            if frozenset(sub) in base_set:
                return True
    return False


def oracle_danger_set(leaves, S_prime, bases, threshold) -> set[frozenset]:
    """Double loop over leaves and every ordered (r-1)-tuple of ``S_prime``."""
    leaves = [tuple(w) for w in leaves]
    if not leaves:
        return set()
    r = len(leaves[0]) + 1
    out = set()
    for x in permutations(sorted(S_prime), r - 1):
        count = sum(1 for w in leaves if not set(w) & set(x) and oracle_is_blocked(w, x, bases))
        if count and count >= threshold:
            out.add(frozenset(x))
    return out


def oracle_good(b, path, fan_paths, bases, danger, S, thresholds, r) -> bool:
    """Goodness of ``b`` for the fan path ``path``, evaluated from scratch.

    ``thresholds`` maps ``|c|`` to ``(deg_E bound, mult bound, deg_D bound)``
    for ``|c| <= r-3``; larger ``c`` use the exact rules.
    """
    a = list(path[-(r - 1):])
    if b in path:
        return False
    for size in range(r):
        for c in combinations(a, size):
            f = set(c) | {b}
            m = oracle_mult(fan_paths, f)
            if size <= r - 3:
                tE, tM, tD = thresholds[size]
                if oracle_degree(bases, f, S) > tE or m > tM or oracle_degree(danger, f, S) > tD:
                    return False
            else:
                fs = frozenset(f)
                if size == r - 2 and (fs in {frozenset(e) for e in bases} or fs in {frozenset(e) for e in danger}):
                    return False
                if m > 0:
                    return False
    return True

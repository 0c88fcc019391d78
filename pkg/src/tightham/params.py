"""Tunable constants, with an asymptotic-scale ``paper`` profile and a runnable ``desk`` profile.

All logarithms are natural. Sizes derived from real-valued formulas are
rounded up; threshold comparisons use the exact real value.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import InvalidArgument


def paper_constants(r: int) -> dict[str, Fraction]:
    """The exact asymptotic constants of the connecting step for uniformity ``r``."""
    xi_prime = Fraction(1, 100**r)
    xi = xi_prime**r / (2 * r * 2 ** (20 * r))
    delta = 8**r * xi + xi_prime
    C = Fraction(10 ** (8 * r))
    c = Fraction(1, 10**r) * xi**r
    return {"xi_prime": xi_prime, "xi": xi, "delta": delta, "C": C, "c": c}


def leaf_target(n: int, p: float, r: int) -> int:
    return math.ceil(p ** (-(r - 1) / 2) * math.log(n))


def paper_depth(n: int, Q: int) -> int:
    lln = math.log(math.log(n))
    if lln <= 0:
        raise InvalidArgument(f"log log n must be positive, n={n}")
    return 2 * math.ceil(math.log(Q) / lln)


def schedule_depth(r: int, Q: int, grow: int, cap: int = 64) -> int:
    """Smallest depth at which the expand/continue schedule can reach ``Q`` leaves
    when every expansion multiplies the fan by ``grow``."""
    if Q <= 1:
        return 1
    size = 1
    for i in range(1, cap + 1):
        if i % (2 * (r - 1)) in range(1, r):
            size = min(Q, size * grow)
        if size >= Q:
            return i
    return cap


@dataclass
class Params:
    n: int
    r: int
    p: float
    profile: str = "desk"
    # connecting step
    C: float = 4.0
    c: float = 0.25
    xi: float = 0.5
    xi_prime: float = 0.25
    delta: float = 0.0
    Q: int = 0
    t: int = 0
    grow: int = 8
    fan_parts: int = 1
    slack: float = 16.0
    growth_k: float = 4.0
    # reservoir / Hamilton pipeline
    s_fraction: float = 0.25
    reservoir_size: int = 0
    cell_size: int = 0
    cell_cap: int = 0  # uses per cell; 0 means unbounded
    close_size: int = 0
    l_budget: int = 0
    step_cap: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def log_n(self) -> float:
        return math.log(self.n)

    @property
    def connect_size(self) -> int:
        """The working-set size C p^-1 ln n."""
        return math.ceil(self.C * self.log_n / self.p)

    @property
    def parts_total(self) -> int:
        return 2 * self.fan_parts

    def spike_depth(self) -> int:
        return (self.r - 1) * math.ceil(self.t / (self.r - 1))

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d.pop("extra")
        return d


# Measured ceiling on the E-edges one connect or spike_connect call adds, in
# units of |S|^(r-2) (r=3, n=2000, p=0.05, |S|=4 ln n/p: worst of 400 calls ~1.7).
EDGE_GROWTH_K = 2.0

_DESK_DEFAULTS = dict(
    C=4.0, c=0.25, xi=0.5, xi_prime=0.25, grow=8, fan_parts=1, slack=16.0, growth_k=4.0,
    s_fraction=0.25, kappa=1.0, r_min=8, q_cap=5000,
)


def _check_model(n: int, p: float, r: int) -> None:
    if r < 3:
        raise InvalidArgument("r must be at least 3")
    if not 0 < p <= 1:
        raise InvalidArgument(f"p={p} must lie in (0, 1]")
    if n < 2 * r:
        raise InvalidArgument(f"n={n} too small for r={r}")


def paper_params(n: int, p: float, r: int) -> Params:
    """Constants exactly as the analysis fixes them (infeasible at any desk-scale n)."""
    _check_model(n, p, r)
    k = paper_constants(r)
    Q = leaf_target(n, p, r)
    lnn = math.log(n)
    C = float(k["C"])
    cell = math.ceil(C * lnn / p)
    return Params(
        n=n, r=r, p=p, profile="paper",
        C=C, c=float(k["c"]), xi=float(k["xi"]), xi_prime=float(k["xi_prime"]), delta=float(k["delta"]),
        Q=Q, t=paper_depth(n, Q), grow=math.ceil(lnn), fan_parts=4 * (r - 1), slack=1.0, growth_k=4.0,
        s_fraction=0.25, reservoir_size=2 * cell, cell_size=cell, cell_cap=max(1, math.floor(1 / p)),
        close_size=cell, l_budget=math.floor(5 * n / 8), step_cap=10 * n,
    )


def desk_params(n: int, p: float, r: int, **overrides) -> Params:
    """Calibrated constants that keep the algorithm's structure at feasible n."""
    _check_model(n, p, r)
    o = {**_DESK_DEFAULTS, **overrides}
    unknown = set(o) - set(_DESK_DEFAULTS) - {f.name for f in dataclasses.fields(Params)}
    if unknown:
        raise InvalidArgument(f"unknown parameter(s): {sorted(unknown)}")
    lnn = math.log(n)
    Q = int(o.get("Q") or min(leaf_target(n, p, r), int(o["q_cap"])))
    grow = int(o["grow"])
    t = int(o.get("t") or schedule_depth(r, Q, grow))
    xi, xi_prime = float(o["xi"]), float(o["xi_prime"])
    s_size = math.floor(float(o["s_fraction"]) * n)
    R = int(o.get("reservoir_size") or max(int(o["r_min"]), math.ceil(float(o["kappa"]) * lnn / p)))
    cell = int(o.get("cell_size") or math.ceil(float(o["C"]) * lnn / p))
    prm = Params(
        n=n, r=r, p=p, profile="desk",
        C=float(o["C"]), c=float(o["c"]), xi=xi, xi_prime=xi_prime,
        delta=float(o.get("delta") or 8**r * xi + xi_prime),
        Q=Q, t=t, grow=grow, fan_parts=int(o["fan_parts"]), slack=float(o["slack"]),
        growth_k=float(o["growth_k"]), s_fraction=float(o["s_fraction"]),
        reservoir_size=R, cell_size=cell,
        cell_cap=int(o.get("cell_cap", 0)),
        close_size=int(o.get("close_size") or cell),
        l_budget=int(o.get("l_budget") or math.floor(5 * n / 8)),
        step_cap=int(o.get("step_cap") or 10 * n),
        extra={k: o[k] for k in ("kappa", "r_min", "q_cap")},
    )
    if s_size < R + 3:
        raise InvalidArgument(f"working set of {s_size} vertices cannot hold a reservoir of {R}")
    return prm


def absorber_cost(r: int, t: int) -> tuple[int, int, int]:
    """Vertices one reservoir vertex consumes in ``U1``, ``U2`` and ``U3``.

    Seed path: ``2r-2`` besides the reservoir vertex. Spike backbone: two
    fans of the spike depth. ``U3``: the absorber's connectors plus one chain
    link, each with about ``2t`` interior vertices (``t`` connectors when the
    backbone has ``t`` spike pairs, so ``2t`` is an upper estimate at ``t=1``).
    """
    spike = (r - 1) * math.ceil(t / (r - 1))
    pairs = max(1, spike // (r - 1))
    return 2 * r - 2, 2 * spike, (pairs + 1) * 2 * t


def budget_overrides(n: int, p: float, r: int, kappa: float = 3.0, link_pairs: float = 16.0,
                     margin: float = 1.15, slack_scale: float = 1.5, grow: int | None = None,
                     max_fraction: float = 0.7) -> dict:
    """Desk overrides sized so the reservoir fits in ``S`` and ``L`` can still cover ``U``.

    The leaf target is chosen so that about ``link_pairs`` leaf pairs are
    expected to join (``Q^2 p^(r-1)``), fans reach it in one step, the reservoir holds
    ``kappa p^-1 ln n`` vertices, and each pool gets the measured per-vertex
    cost times ``margin`` plus room for one more connect call. Raises
    InvalidArgument when the working set would exceed ``max_fraction * n`` or
    leave too few outside vertices for the greedy cover of ``U``.
    """
    _check_model(n, p, r)
    lnn = math.log(n)
    Q = max(1, math.ceil(math.sqrt(link_pairs) * p ** (-(r - 1) / 2)))
    grow = grow if grow is not None else max(8, Q)  # one expansion reaches Q: depth-1 fans
    t = schedule_depth(r, Q, grow)
    R = max(r, math.ceil(kappa * lnn / p))
    room = math.ceil(slack_scale * lnn / p) + 2
    cost = absorber_cost(r, t)
    pool = math.ceil(max(cost) * R * margin) + room
    s_size = R + 3 * pool
    if s_size > max_fraction * n:
        raise InvalidArgument(
            f"reservoir of {R} needs a working set of {s_size} vertices, more than {max_fraction:g}n = {max_fraction * n:.0f}"
        )
    # two of every three greedy steps spend a vertex of L while U is covered
    leftover = 3 * pool - R * sum(cost)
    if n - s_size < 2 * leftover + 2 * r:
        raise InvalidArgument(f"{n - s_size} vertices outside S cannot cover {leftover} leftover U vertices")
    return {
        "q_cap": Q, "grow": grow, "reservoir_size": R, "s_fraction": (s_size + 1) / n,
        "cell_size": pool, "close_size": R,
    }


def make_params(profile: str, n: int, p: float, r: int, **overrides) -> Params:
    if profile == "paper":
        prm = paper_params(n, p, r)
        return dataclasses.replace(prm, **overrides) if overrides else prm
    if profile == "desk":
        return desk_params(n, p, r, **overrides)
    raise InvalidArgument(f"unknown profile {profile!r}")

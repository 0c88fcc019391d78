"""Experiment harness: seeded trials, sweeps over n, and JSON/CSV reports.

    python -m tightham --n 1000 --r 3 --p 0.5 --budget --seeds 10
    python -m tightham --n 500 1000 2000 --r 3 --kappa 2 --budget --seeds 5 --format csv --out sweep.csv

Exit status is 0 when every requested trial ran (whether or not it found a
cycle), 2 on a configuration error and 3 if any trial hit a
DisciplineViolation.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import csv
import io
import json
import math
import statistics
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from .connector import Trace
from .errors import DisciplineViolation, Fail, InvalidArgument
from .hamilton import find_tight_hamilton
from .oracle import ExposureOracle
from .params import Params, budget_overrides, make_params
from .verify import verify_tight_hamilton

WALL_CLOCK_FIELDS = ("wall_ms", "stage_ms")
STAGES = ("reservoir", "coverU", "coverL", "close")


@dataclass
class RunConfig:
    ns: list[int]
    r: int
    p: float | None = None
    kappa: float | None = None
    seeds: list[int] = field(default_factory=lambda: [0])
    profile: str = "desk"
    overrides: dict = field(default_factory=dict)
    budget: bool = False
    strict: bool = True
    parallel: int = 1
    trace: str | None = None

    def p_for(self, n: int) -> float:
        """Edge probability at size ``n``: fixed, or ``kappa ln^3 n / n`` capped at 1."""
        if self.p is not None:
            return self.p
        return min(1.0, self.kappa * math.log(n) ** 3 / n)

    def params_for(self, n: int) -> Params:
        p = self.p_for(n)
        ov = dict(budget_overrides(n, p, self.r)) if self.budget else {}
        ov.update(self.overrides)
        return make_params(self.profile, n, p, self.r, **ov)


def _parse_value(text: str):
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    return text


def parse_overrides(items: list[str]) -> dict:
    out = {}
    for item in items or []:
        key, sep, val = item.partition("=")
        if not sep or not key:
            raise InvalidArgument(f"--set expects key=value, got {item!r}")
        out[key.strip()] = _parse_value(val.strip())
    return out


def run_trial(cfg: RunConfig, n: int, seed: int) -> dict:
    """One full pipeline run on a fresh oracle; the cycle is always re-verified."""
    prm = cfg.params_for(n)
    oracle = ExposureOracle(n, cfg.r, prm.p, seed, strict=cfg.strict)
    rec: dict = {"n": n, "r": cfg.r, "p": prm.p, "seed": seed, "profile": prm.profile}
    stream = open(f"{cfg.trace}.n{n}.s{seed}.jsonl", "w") if cfg.trace else None
    trace = Trace(stream) if stream else None
    t0 = time.perf_counter()
    stage_ms: dict = {}
    r1_used = 0
    try:
        res = find_tight_hamilton(oracle, prm, trace=trace)
        stage_ms = res.state.stage_ms
        r1_used = len(res.state.R1_used)
        ok = verify_tight_hamilton(res.cycle, oracle.decided_edges(), cfg.r)
        rec.update(outcome="success" if ok else "unverified", stage=None, reason=None, verified=ok, cycle=res.cycle)
    except Fail as exc:
        rec.update(outcome="fail", stage=exc.stage, reason=exc.reason, verified=False, cycle=None)
    except DisciplineViolation as exc:
        rec.update(outcome="violation", stage=None, reason=str(exc), verified=False, cycle=None)
    finally:
        if stream:
            stream.close()
    rec["stats"] = {
        "exposures": oracle.exposures,
        "decisions": oracle.decisions,
        "E_size": len(oracle.E),
        "R": prm.reservoir_size,
        "R1_used": r1_used,
        "violations": oracle.violations,
        "wall_ms": round((time.perf_counter() - t0) * 1e3, 3),
        "stage_ms": {k: round(v, 3) for k, v in stage_ms.items()},
    }
    return rec


def strip_wall_clock(rec: dict) -> dict:
    out = dict(rec)
    out["stats"] = {k: v for k, v in rec["stats"].items() if k not in WALL_CLOCK_FIELDS}
    return out


def record_bytes(rec: dict) -> bytes:
    """Canonical serialisation of the reproducible part of a record."""
    return json.dumps(strip_wall_clock(rec), sort_keys=True).encode()


def flatten(rec: dict) -> dict:
    """Scalar columns shared by the CSV and JSON row views (the cycle itself is dropped)."""
    row = {k: rec[k] for k in ("n", "r", "p", "seed", "profile", "outcome", "stage", "verified")}
    st = rec["stats"]
    for k in ("exposures", "decisions", "E_size", "R", "R1_used", "violations", "wall_ms"):
        row[k] = st[k]
    for s in STAGES:
        row[f"{s}_ms"] = st["stage_ms"].get(s)
    return row


def _trial_job(args):
    cfg, n, seed = args
    return run_trial(cfg, n, seed)


def run_trials(cfg: RunConfig) -> list[dict]:
    jobs = [(cfg, n, s) for n in cfg.ns for s in cfg.seeds]
    if cfg.parallel <= 1:
        return [_trial_job(j) for j in jobs]
    with concurrent.futures.ProcessPoolExecutor(max_workers=cfg.parallel) as pool:
        return list(pool.map(_trial_job, jobs))


def loglog_slope(ns, times) -> float | None:
    pts = [(n, t) for n, t in zip(ns, times) if t and t > 0]
    if len(pts) < 2:
        return None
    x = np.log([n for n, _ in pts])
    y = np.log([t for _, t in pts])
    return float(np.polyfit(x, y, 1)[0])


def summarize(records: list[dict]) -> tuple[list[dict], float | None]:
    """Per-n success rate and timing rows, plus the log-log slope of mean runtime against n."""
    rows = []
    for n in sorted({rec["n"] for rec in records}):
        group = [rec for rec in records if rec["n"] == n]
        wall = [rec["stats"]["wall_ms"] for rec in group]
        row = {
            "n": n,
            "p": group[0]["p"],
            "trials": len(group),
            "successes": sum(rec["outcome"] == "success" for rec in group),
            "mean_ms": statistics.fmean(wall),
            "median_ms": statistics.median(wall),
            "mean_exposures": statistics.fmean(rec["stats"]["exposures"] for rec in group),
        }
        row["success_rate"] = row["successes"] / row["trials"]
        for s in STAGES:
            vals = [rec["stats"]["stage_ms"][s] for rec in group if s in rec["stats"]["stage_ms"]]
            row[f"mean_{s}_ms"] = statistics.fmean(vals) if vals else None
        rows.append(row)
    slope = loglog_slope([r["n"] for r in rows], [r["mean_ms"] for r in rows])
    return rows, slope


def sweep(cfg: RunConfig) -> tuple[list[dict], list[dict], float | None]:
    records = run_trials(cfg)
    rows, slope = summarize(records)
    return records, rows, slope


def _csv_text(rows: list[dict]) -> str:
    buf = io.StringIO()
    if rows:
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    return buf.getvalue()


def emit(records: list[dict], summary: list[dict], slope, fmt: str, out: str | None) -> None:
    if fmt == "json":
        text = json.dumps({"trials": records, "rows": [flatten(r) for r in records],
                           "summary": summary, "loglog_slope": slope}, indent=1)
        targets = [(out, text)]
    else:
        targets = [(out, _csv_text([flatten(r) for r in records]))]
        if out:
            targets.append((out.rsplit(".", 1)[0] + ".summary.csv", _csv_text(summary)))
    for path, text in targets:
        if path:
            with open(path, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text + "\n")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tightham", description="Find tight Hamilton cycles in random r-uniform hypergraphs.")
    ap.add_argument("--n", type=int, nargs="+", required=True, help="vertex counts (several values run a sweep)")
    ap.add_argument("--r", type=int, default=3, help="uniformity")
    g = ap.add_mutually_exclusive_group(required=True)
    g.add_argument("--p", type=float, help="edge probability")
    g.add_argument("--kappa", type=float, help="use p = kappa * ln(n)^3 / n")
    ap.add_argument("--seeds", type=int, default=1, help="trials per n")
    ap.add_argument("--seed-base", type=int, default=0, help="first seed")
    ap.add_argument("--profile", choices=("paper", "desk"), default="desk")
    ap.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                    help="parameter override, repeatable")
    ap.add_argument("--budget", action="store_true", help="size reservoir and pools from the resource budget")
    ap.add_argument("--trials-parallel", type=int, default=1, help="worker processes across seeds")
    ap.add_argument("--out", help="output file (default stdout)")
    ap.add_argument("--format", choices=("json", "csv"), default="json")
    ap.add_argument("--trace", metavar="PREFIX", help="write connector trace logs to PREFIX.n<N>.s<SEED>.jsonl")
    ap.add_argument("--strict", choices=("on", "off"), default="on")
    return ap


def config_from_args(args) -> RunConfig:
    cfg = RunConfig(
        ns=args.n, r=args.r, p=args.p, kappa=args.kappa,
        seeds=list(range(args.seed_base, args.seed_base + args.seeds)),
        profile=args.profile, overrides=parse_overrides(args.overrides), budget=args.budget,
        strict=args.strict == "on", parallel=args.trials_parallel, trace=args.trace,
    )
    if args.seeds < 1:
        raise InvalidArgument("--seeds must be positive")
    for n in cfg.ns:
        cfg.params_for(n)  # surface config errors before any trial runs
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
    except InvalidArgument as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    records, summary, slope = sweep(cfg)
    emit(records, summary, slope, args.format, args.out)
    for row in summary:
        print(f"n={row['n']} p={row['p']:.4g} success {row['successes']}/{row['trials']} "
              f"mean {row['mean_ms']:.1f} ms", file=sys.stderr)
    if slope is not None:
        print(f"log-log runtime slope {slope:.3f}", file=sys.stderr)
    return 3 if any(rec["outcome"] == "violation" for rec in records) else 0


if __name__ == "__main__":
    sys.exit(main())

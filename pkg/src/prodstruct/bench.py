"""Benchmark suites: run a construction per instance, re-verify the output
from scratch, and compare the achieved value against the promised bound."""
from __future__ import annotations

import csv
import io
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import astuple, dataclass

from .decomposition import heuristic_tree_decomposition
from .expansion import PromiseViolation, check_expansion_result, expansion_partition
from .instances import grid, k_tree, random_tree
from .partition import (Bound, tdd_partition, treewidth_tdd_partition, star_partition,
                        verify_hpartition)
from .separators import ClassGuarantee, DecompositionEngine, bfs_layer_engine

GRID_GUARANTEE = ClassGuarantee(2.0, 0.5)
TWO_TREE_GUARANTEE = ClassGuarantee(3.0, 0.5)


@dataclass(frozen=True)
class RunRecord:
    instance: str
    n: int
    operation: str
    bound_formula: str
    bound_value: float
    achieved: float
    passed: bool
    ms: float


CSV_COLUMNS = ("instance", "n", "operation", "bound_formula", "bound_value", "achieved", "pass", "ms")


def _record(instance: str, n: int, operation: str, bound: Bound, achieved: float,
            verified: bool, started: float) -> RunRecord:
    return RunRecord(instance, n, operation, bound.formula, bound.value, achieved,
                     verified and bound.holds(achieved), (time.perf_counter() - started) * 1000)


def _star_task(side: int) -> list[RunRecord]:
    g = grid(side, side)
    t0 = time.perf_counter()
    fp = star_partition(g, bfs_layer_engine, GRID_GUARANTEE)
    cert = verify_hpartition(g, fp.partition, witness=fp.forest)
    ok = cert.valid and cert.witness_value <= 2
    return [_record(f"grid{side}x{side}", g.n, "star", fp.bound, cert.width, ok, t0)]


def _td_task(family: str, size: int, seed: int, d: int) -> list[RunRecord]:
    if family == "grid":
        g = grid(size, size)
        engine, guarantee, name = bfs_layer_engine, GRID_GUARANTEE, f"grid{size}x{size}"
    else:
        g, td = k_tree(size, 2, seed)
        engine, guarantee, name = DecompositionEngine(g, td), TWO_TREE_GUARANTEE, f"2tree(n={size},seed={seed})"
    t0 = time.perf_counter()
    fp = tdd_partition(g, engine, guarantee, d)
    cert = verify_hpartition(g, fp.partition, witness=fp.forest)
    ok = cert.valid and cert.witness_value <= d
    return [_record(name, g.n, f"td(d={d})", fp.bound, cert.width, ok, t0)]


def _twtd_task(k: int, n: int, seed: int, d: int) -> list[RunRecord]:
    if k == 1:
        g = random_tree(n, seed)
        td = heuristic_tree_decomposition(g)
        name = f"tree(n={n},seed={seed})"
    else:
        g, td = k_tree(n, k, seed)
        name = f"{k}tree(n={n},seed={seed})"
    t0 = time.perf_counter()
    fp = treewidth_tdd_partition(g, td, k, d)
    cert = verify_hpartition(g, fp.partition, witness=fp.forest)
    ok = cert.valid and cert.witness_value <= d
    return [_record(name, g.n, f"tw-td(d={d})", fp.bound, cert.width, ok, t0)]


def _expansion_task(side: int, ell: float, h: int = 5) -> list[RunRecord]:
    g = grid(side, side)
    t0 = time.perf_counter()
    res = expansion_partition(g, ell, h)
    name = f"grid{side}x{side}"
    if isinstance(res, PromiseViolation):
        return [RunRecord(name, g.n, f"expansion(l={ell:g})", "no shallow K_h model", 0, 1, False,
                          (time.perf_counter() - t0) * 1000)]
    ok = not check_expansion_result(g, res)
    return [
        _record(name, g.n, f"expansion(l={ell:g}):tw", Bound(f"h-2 with h={h}", h - 2),
                res.host_tw_witness.width, ok, t0),
        _record(name, g.n, f"expansion(l={ell:g}):|Y|", Bound(f"n/l with n={g.n}, l={ell:g}", g.n / ell),
                len(res.Y), ok, t0),
        _record(name, g.n, f"expansion(l={ell:g}):part", Bound(f"(h-1)d+1 with h={h}, d={res.d}", res.part_cap),
                res.partition.width, ok, t0),
    ]


def _tasks(name: str, scale: int | None, dmax: int) -> list[tuple]:
    if name == "star":
        top = scale or 64
        return [(_star_task, s) for s in (8, 16, 24, 32, 48, 64) if s <= top]
    if name == "td":
        top = scale or 64
        out = [(_td_task, "grid", s, 0, d) for s in (8, 16, 32, 64) if s <= top for d in range(2, dmax + 1)]
        n2 = min(4096, (scale or 64) ** 2)
        out += [(_td_task, "2tree", n2, seed, d) for seed in range(3) for d in range(2, dmax + 1)]
        return out
    if name == "tw-td":
        n = scale or 2000
        return [(_twtd_task, k, n, seed, d) for k in (1, 2, 3) for seed in range(3)
                for d in range(1, dmax + 1)]
    if name == "expansion":
        top = scale or 32
        return [(_expansion_task, s, ell) for s in (4, 8, 16, 32) if s <= top for ell in (2.0, 4.0)]
    raise KeyError(f"unknown suite {name!r}")


SUITES = ("star", "td", "tw-td", "expansion")


def _run(task: tuple) -> list[RunRecord]:
    fn, *args = task
    return fn(*args)


def bench_suite(name: str, scale: int | None = None, dmax: int = 4, jobs: int = 1) -> list[RunRecord]:
    tasks = _tasks(name, scale, dmax)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            batches = list(pool.map(_run, tasks))
    else:
        batches = [_run(t) for t in tasks]
    records = [r for batch in batches for r in batch]
    return sorted(records, key=lambda r: (r.operation, r.n, r.instance))


def records_csv(records: list[RunRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        row = list(astuple(r))
        row[4] = f"{r.bound_value:.6g}"
        row[6] = "true" if r.passed else "false"
        row[7] = f"{r.ms:.1f}"
        w.writerow(row)
    return buf.getvalue()


"""Sampling micro-benchmarks over a K x data x replacement x family grid.

Each cell times one sampling call over ``repeats`` rounds of ``loops``
calls, after one untimed warm-up call, and reports per-loop nanoseconds:
median, mean and standard deviation.
"""
from __future__ import annotations

import csv
import io
import itertools
import statistics
import timeit
from dataclasses import dataclass
from importlib import resources
from typing import Callable, List, Optional, Sequence

from .ingest import Record, SyntheticSpec, generate_synthetic, read_records
from .sampling import (
    Reservoir,
    derive_rng,
    uniform_reservoir_insert,
    uniform_with_replacement,
    weighted_with_replacement,
    weighted_without_replacement,
)

__all__ = ["BenchGrid", "BenchRow", "run_bench", "load_dataset", "format_csv", "format_table", "COLUMNS"]

COLUMNS = ["K", "data", "replacement", "family", "time_ns", "mean_ns", "std_ns"]

DATASET = "bench_10k.csv"


@dataclass(frozen=True)
class BenchGrid:
    ks: Sequence[int] = (100, 4500, 9000)
    data_modes: Sequence[str] = ("dataset", "random")
    replacement: Sequence[str] = ("yes", "no")
    families: Sequence[str] = ("uniform", "weighted")
    repeats: int = 7
    loops: Optional[int] = None   # None: calibrate to ~min_time per round
    min_time: float = 0.02
    population: int = 10000
    seed: int = 0

    def cells(self):
        return list(itertools.product(self.ks, self.data_modes, self.replacement, self.families))


@dataclass
class BenchRow:
    K: int
    data: str
    replacement: str
    family: str
    time_ns: Optional[float] = None
    mean_ns: Optional[float] = None
    std_ns: Optional[float] = None
    loops: int = 0

    @property
    def ok(self) -> bool:
        return self.time_ns is not None


def load_dataset() -> List[Record]:
    """The checked-in 10k-record benchmark population."""
    with resources.as_file(resources.files("streamres") / "data" / DATASET) as path:
        return list(read_records(path, "csv"))


def _random_population(n, seed):
    spec = SyntheticSpec(n_clusters=2, means=((0.0, 0.0), (5.0, 5.0)), weight_law="pareto(2.0)", seed=seed)
    return generate_synthetic(spec, n)


def _uniform_without(pop, k, rng):
    res = Reservoir(k)
    for rec in pop:
        uniform_reservoir_insert(res, rec, rng)
    return res


_OPS = {
    ("uniform", "yes"): uniform_with_replacement,
    ("uniform", "no"): _uniform_without,
    ("weighted", "yes"): weighted_with_replacement,
    ("weighted", "no"): weighted_without_replacement,
}


def _calibrate(fn: Callable[[], object], grid: BenchGrid) -> int:
    fn()  # warm-up
    if grid.loops is not None:
        return grid.loops
    timer = timeit.Timer(fn)
    loops = 1
    while timer.timeit(loops) < grid.min_time and loops < 1 << 20:
        loops *= 2
    return loops


def run_bench(grid: BenchGrid = BenchGrid(), dataset: Optional[List[Record]] = None) -> List[BenchRow]:
    """One row per grid cell, in grid order; failing cells keep ``None`` timings.

    Repeats are interleaved over the cells, in a fresh shuffled order each
    round, so slow spells on a shared machine spread over every cell
    instead of skewing a few.
    """
    rows, timers = [], []
    need_dataset = "dataset" in grid.data_modes
    if need_dataset and dataset is None:
        dataset = load_dataset()
    for n, (K, mode, repl, family) in enumerate(grid.cells()):
        row = BenchRow(K, mode, repl, family)
        rows.append(row)
        try:
            pop = dataset if mode == "dataset" else _random_population(grid.population, grid.seed + n)
            op = _OPS[(family, repl)]
            rng = derive_rng(grid.seed, f"bench:{n}")
            fn = (lambda op, pop, K, rng: lambda: op(pop, K, rng))(op, pop, K, rng)
            row.loops = _calibrate(fn, grid)
            timers.append((row, timeit.Timer(fn), []))
        except Exception:  # noqa: BLE001 - a failing cell is reported, not fatal
            pass
    order = derive_rng(grid.seed, "bench:order")
    for _ in range(grid.repeats):
        order.shuffle(timers)
        for row, timer, samples in timers:
            samples.append(timer.timeit(row.loops) / row.loops * 1e9)
    for row, _, samples in timers:
        row.time_ns = statistics.median(samples)
        row.mean_ns = statistics.fmean(samples)
        row.std_ns = statistics.stdev(samples) if len(samples) > 1 else 0.0
    return rows


def _fmt(x):
    return "ERR" if x is None else f"{x:.1f}"


def format_csv(rows: List[BenchRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in rows:
        w.writerow([r.K, r.data, r.replacement, r.family, _fmt(r.time_ns), _fmt(r.mean_ns), _fmt(r.std_ns)])
    return buf.getvalue()


def format_table(rows: List[BenchRow]) -> str:
    """Aligned text table; timings in ns per loop."""
    head = ["K", "Data (d/r)", "Replacement", "Family", "Time (ns)", "Mean +- std (ns per loop)"]
    body = []
    for r in rows:
        spread = "ERR" if not r.ok else f"{r.mean_ns:.1f} +- {r.std_ns:.1f}"
        body.append([str(r.K), r.data.capitalize(), r.replacement.capitalize(), r.family, _fmt(r.time_ns), spread])
    widths = [max(len(x) for x in col) for col in zip(head, *body)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(line, widths)).rstrip() for line in [head] + body]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"

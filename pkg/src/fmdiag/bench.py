"""Runtime grid over test-suite size × constraint count.

Every (|T_pi|, |CF|, repetition) sample synthesizes a fresh model and suite
from a derived seed and times preprocessing plus diagnosis only.
"""

from __future__ import annotations

import csv
import io
import math
import platform
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from statistics import fmean

from .debug import diagnose, preprocess
from .encode import encode
from .synth import SynthParams, derive_seed, synth_model, synth_tests

DEFAULT_ROWS = (5, 10, 25, 50, 100, 250, 500)
DEFAULT_COLS = (10, 20, 50, 100, 500, 1000)
DEFAULT_SEED = 42
CSV_COLUMNS = ("t_pi", "cf", "rep", "seed", "diagnosis_ms", "solver_calls", "nodes", "delta_size")


@dataclass(frozen=True)
class BenchSample:
    t_pi: int
    cf: int
    rep: int
    seed: int
    diagnosis_ms: float | None
    solver_calls: int | None
    nodes: int | None
    delta_size: int | None
    error: str | None = None

    @property
    def failed(self) -> bool:
        return self.diagnosis_ms is None


@dataclass
class BenchReport:
    rows: tuple[int, ...]
    cols: tuple[int, ...]
    reps: int
    samples: list[BenchSample] = field(default_factory=list)
    environment: str = ""

    def cell(self, t_pi: int, cf: int) -> list[BenchSample]:
        return [s for s in self.samples if s.t_pi == t_pi and s.cf == cf]

    def mean_ms(self, t_pi: int, cf: int) -> float:
        """Arithmetic mean over the cell's samples; NaN if any repetition failed."""
        cell = self.cell(t_pi, cf)
        if not cell or any(s.failed for s in cell):
            return math.nan
        return fmean(s.diagnosis_ms for s in cell)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for s in self.samples:
            writer.writerow(
                ["" if v is None else (repr(v) if isinstance(v, float) else v)
                 for v in (s.t_pi, s.cf, s.rep, s.seed, s.diagnosis_ms, s.solver_calls, s.nodes, s.delta_size)]
            )
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "BenchReport":
        reader = csv.DictReader(io.StringIO(text))
        if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
            raise ValueError(f"expected CSV columns {','.join(CSV_COLUMNS)}")
        samples = []
        for row in reader:
            def num(key, conv):
                return None if row[key] == "" else conv(row[key])

            samples.append(
                BenchSample(
                    int(row["t_pi"]), int(row["cf"]), int(row["rep"]), int(row["seed"]),
                    num("diagnosis_ms", float), num("solver_calls", int), num("nodes", int),
                    num("delta_size", int),
                )
            )
        rows = tuple(dict.fromkeys(s.t_pi for s in samples))
        cols = tuple(dict.fromkeys(s.cf for s in samples))
        reps = max((s.rep for s in samples), default=-1) + 1
        return cls(rows, cols, reps, samples)

    def format_table(self) -> str:
        width = 10
        lines = ["|T_pi| \\ |CF|".ljust(14) + "".join(str(c).rjust(width) for c in self.cols)]
        for r in self.rows:
            cells = []
            for c in self.cols:
                m = self.mean_ms(r, c)
                cells.append(("failed" if math.isnan(m) else f"{m:.1f}").rjust(width))
            lines.append(str(r).ljust(14) + "".join(cells))
        if self.environment:
            lines.append(f"# {self.environment}; mean msec over {self.reps} repetition(s)")
        return "\n".join(lines) + "\n"


def run_cell(t_pi: int, cf: int, rep: int, seed: int) -> BenchSample:
    """Synthesize one instance and time its diagnosis (C = CF - {c0}, no negative tests)."""
    cell_seed = derive_seed(seed, t_pi, cf, rep)
    try:
        params = SynthParams(cf, seed=cell_seed, num_tests=t_pi)
        model = synth_model(params)
        tests = synth_tests(model, params)
        cs = encode(model)
    except Exception as exc:  # a failed cell must not stop the grid
        return BenchSample(t_pi, cf, rep, cell_seed, None, None, None, None, f"{type(exc).__name__}: {exc}")
    start = time.perf_counter()
    result = diagnose(preprocess(cs, None, tests))
    elapsed = (time.perf_counter() - start) * 1000.0
    return BenchSample(t_pi, cf, rep, cell_seed, elapsed, result.solver_calls, result.nodes, len(result.delta))


def run_bench(
    rows=DEFAULT_ROWS,
    cols=DEFAULT_COLS,
    reps: int = 3,
    seed: int = DEFAULT_SEED,
    jobs: int = 1,
    progress=None,
) -> BenchReport:
    if reps < 1:
        raise ValueError("reps must be >= 1")
    rows, cols = tuple(rows), tuple(cols)
    if not rows or not cols or min(rows + cols) < 1:
        raise ValueError("grid sizes must be positive")
    tasks = [(r, c, k, seed) for r in rows for c in cols for k in range(reps)]
    if jobs > 1:
        # separate processes: the solver is pure Python and would serialize on the GIL
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            samples = list(pool.map(run_cell, *zip(*tasks)))
    else:
        samples = []
        for task in tasks:
            samples.append(run_cell(*task))
            if progress:
                progress(samples[-1])
    env = f"{platform.python_implementation()} {platform.python_version()} on {platform.machine()}, jobs={jobs}"
    return BenchReport(rows, cols, reps, samples, env)

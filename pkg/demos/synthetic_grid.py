"""
Runtime on synthetic models
===========================

A small corner of the benchmark grid.  Each cell synthesizes a fresh model
with |CF|/2 features and a suite where 30% of the tests are inconsistent.
The full grid is ``fmdiag bench`` (several minutes).
"""
import numpy as np

from fmdiag.bench import run_bench

report = run_bench(rows=[5, 25, 100], cols=[20, 100, 500], reps=2, seed=42)
print(report.format_table())

# mean milliseconds as an array, rows = |T_pi|, columns = |CF|
grid = np.array([[report.mean_ms(r, c) for c in report.cols] for r in report.rows])
print("growth along |CF| per row:", np.round(grid[:, -1] / grid[:, 0], 1))
print("growth along |T_pi| per column:", np.round(grid[-1] / grid[0], 1))

calls = [s.solver_calls for s in report.samples]
print("solver calls per diagnosis: min", min(calls), "max", max(calls))

"""Misclassification of both spectral methods across a small sweep.

Each replicate draws a training and a test graph from the same blockmodel,
clusters the training graph and carries the clusters over to the test
graph.  The printed table gives mean error per cell.  The full grids are
available through ``sbmspec sweep --grid gamma-alpha`` and ``--grid n``.
"""

from sbmspec.config import build_config
from sbmspec.experiments import run_sweep, summarize_sweep

cfg = build_config("sweep-gamma-alpha", {"alpha": "0.01,0.014,0.018", "x": "0.025,0.125",
                                         "n": "1000", "replicates": "5", "seed": "1"})
summary = summarize_sweep(run_sweep(cfg))

print(f"{'alpha':>7} {'gamma/alpha':>11} {'unnorm':>8} {'norm':>8}")
cells = {}
for (cell, n, alpha, gamma, method), (mean, count) in summary.items():
    cells.setdefault((alpha, gamma), {})[method] = mean
for (alpha, gamma), m in sorted(cells.items(), key=lambda kv: (kv[0][1] / kv[0][0], kv[0][0])):
    print(f"{alpha:7.3f} {gamma / alpha:11.3f} {m['unnorm']:8.3f} {m['norm']:8.3f}")

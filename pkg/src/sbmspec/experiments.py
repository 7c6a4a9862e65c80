"""Seeded experiment runners producing long-format CSV rows.

Each runner takes an :class:`~sbmspec.config.ExperimentConfig` and returns a
list of row dicts; :func:`run_experiment` dispatches on ``cfg.kind`` and
writes the CSV.  Rows carry the seed they were generated from, and work
units are evaluated independently so a process pool gives identical output.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor

import numpy as np
from scipy.linalg import orthogonal_procrustes

from .clustering import kmeans, kmeans_balanced_best, spectral_cluster, spectral_embedding
from .eigen import top_k_eigenpairs
from .graph import component_fraction, largest_connected_component, load_manifest, load_snapshots
from .metrics import (
    COMPARISON_COLUMNS,
    empirical_vs_analytic,
    misclassification_rate,
    quality_metrics,
    summarize_relative_errors,
    write_csv,
)
from .sbm import BlockModelParams, analytic_distances, sample, sparse_limit_ratio

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
GIANT_FRACTION = 0.95


def derive_seed(*parts):
    """64-bit seed derived from integer parts (base seed, cell, replicate, ...)."""
    ss = np.random.SeedSequence([int(p) & 0xFFFFFFFFFFFFFFFF for p in parts])
    return int(ss.generate_state(1, np.uint64)[0])


def _map(fn, tasks, workers=1):
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks))


# ---------------------------------------------------------------- ratio surface

RATIO_SURFACE_COLUMNS = ("schema", "alpha", "x", "gamma", "n", "sparse_limit_ratio", "dense_ratio", "skipped")


def run_ratio_surface(cfg):
    """Sparse-limit and finite-n (dense regime) d11 ratios over (alpha, x)."""
    n = int(cfg.scalar("n"))
    rows = []
    for a in cfg.grid("alpha"):
        for x in cfg.grid("x"):
            g = a * x
            row = dict(schema=SCHEMA_VERSION, alpha=a, x=x, gamma=g, n=n,
                       sparse_limit_ratio=sparse_limit_ratio(x), dense_ratio="", skipped="")
            if g > 1:
                row["skipped"] = "gamma>1"
            else:
                p = BlockModelParams(n, 0.5, a, a, g)
                if g > 0 and p.degenerate:
                    row["skipped"] = "degenerate"
                else:
                    r = analytic_distances(p).ratio_d11
                    if math.isnan(r):
                        row["skipped"] = "no variance"
                    else:
                        row["dense_ratio"] = r
            rows.append(row)
    return rows


def dense_regime_max(alphas, gammas, n=10**6):
    """Largest finite-n d11 ratio over an (alpha, gamma) grid with pi=1/2,
    alpha=beta; returns ``(ratio, alpha, gamma)``."""
    best = (-math.inf, None, None)
    for a in alphas:
        for g in gammas:
            p = BlockModelParams(n, 0.5, a, a, g)
            if g == 0 or p.degenerate:
                continue
            r = analytic_distances(p).ratio_d11
            if r > best[0]:
                best = (r, a, g)
    return best


# ---------------------------------------------------------------- misclassification sweeps

SWEEP_COLUMNS = ("schema", "cell", "n", "pi", "alpha", "beta", "gamma", "x", "replicate", "seed",
                 "method", "error", "train_giant_fraction", "test_giant_fraction", "skipped")


def transfer_labels(train_embedding, train_assignment, train_nodes, test_embedding, test_nodes,
                    seed=0, strategy="procrustes", restarts=5):
    """Cluster the test graph's embedding using the structure learned on training.

    ``procrustes`` rotates the test embedding onto the training one
    (orthogonal Procrustes on the nodes present in both) and runs k-means
    initialised at the training centers.  ``refit`` clusters the test
    embedding from scratch with balanced restarts.
    """
    q_te = test_embedding.coords
    k = q_te.shape[1]
    if strategy == "refit":
        return kmeans_balanced_best(q_te, k, seed=seed, restarts=restarts).labels
    if strategy != "procrustes":
        raise ValueError(f"unknown transfer strategy {strategy!r}")
    shared, i_tr, i_te = np.intersect1d(train_nodes, test_nodes, return_indices=True)
    if len(shared) < k:
        return kmeans_balanced_best(q_te, k, seed=seed, restarts=restarts).labels
    rot, _ = orthogonal_procrustes(q_te[i_te], train_embedding.coords[i_tr])
    return kmeans(q_te @ rot, k, seed=seed, init=train_assignment.centers).labels


def sweep_replicate(params, seed, strategy="procrustes", restarts=5):
    """One train/test pair for both methods; returns ``{method: error}`` or a
    skip reason when either graph fails the giant-component filter."""
    s_train, s_test = derive_seed(seed, 0), derive_seed(seed, 1)
    g_tr, truth = sample(params, s_train)
    g_te, _ = sample(params, s_test)
    f_tr, f_te = component_fraction(g_tr), component_fraction(g_te)
    out = dict(train_giant_fraction=f_tr, test_giant_fraction=f_te)
    if f_tr < GIANT_FRACTION or f_te < GIANT_FRACTION:
        out["skipped"] = "giant component below 95%"
        return out
    lcc_tr, map_tr = largest_connected_component(g_tr)
    lcc_te, map_te = largest_connected_component(g_te)
    nodes_tr = np.array(sorted(map_tr, key=map_tr.get))
    nodes_te = np.array(sorted(map_te, key=map_te.get))
    for normalized in (False, True):
        assignment, emb = spectral_cluster(lcc_tr, 2, normalized, seed=seed, restarts=restarts)
        emb_te = spectral_embedding(lcc_te, 2, normalized, seed=seed)
        pred = transfer_labels(emb, assignment, nodes_tr, emb_te, nodes_te, seed=seed,
                               strategy=strategy, restarts=restarts)
        out["norm" if normalized else "unnorm"] = misclassification_rate(pred, truth.labels[nodes_te])
    return out


def _sweep_task(task):
    cell, rep, params, x, seed, strategy, restarts = task
    res = sweep_replicate(params, seed, strategy, restarts)
    base = dict(schema=SCHEMA_VERSION, cell=cell, n=params.n, pi=params.pi, alpha=params.alpha,
                beta=params.beta, gamma=params.gamma, x=x, replicate=rep, seed=seed,
                train_giant_fraction=res["train_giant_fraction"],
                test_giant_fraction=res["test_giant_fraction"], skipped=res.get("skipped", ""))
    rows = []
    for method in ("unnorm", "norm"):
        rows.append(dict(base, method=method, error=res.get(method, "")))
    return rows


def _sweep_cells(cfg):
    if cfg.kind == "sweep-gamma-alpha":
        n = int(cfg.scalar("n"))
        pi = cfg.scalar("pi")
        for x in cfg.grid("x"):
            for a in cfg.grid("alpha"):
                yield BlockModelParams(n, pi, a, a, a * x), x
    elif cfg.kind == "sweep-n":
        pi, a, b, g = (cfg.scalar(k) for k in ("pi", "alpha", "beta", "gamma"))
        for n in cfg.grid("n"):
            yield BlockModelParams(int(n), pi, a, b, g), (g / a if a else float("nan"))
    else:
        raise ValueError(f"not a sweep kind: {cfg.kind}")


def run_sweep(cfg):
    """Misclassification of both methods on train/test blockmodel pairs."""
    strategy = cfg.options.get("transfer", "procrustes")
    restarts = cfg.options.get("restarts", 5)
    tasks = []
    for cell, (params, x) in enumerate(_sweep_cells(cfg)):
        for rep in range(cfg.replicates):
            tasks.append((cell, rep, params, x, derive_seed(cfg.seed, cell, rep), strategy, restarts))
    rows = [r for chunk in _map(_sweep_task, tasks, cfg.options.get("workers", 1)) for r in chunk]
    return sorted(rows, key=lambda r: (r["cell"], r["replicate"], r["method"]))


def summarize_sweep(rows):
    """Mean error per (cell, method) over non-skipped replicates."""
    acc = {}
    for r in rows:
        if r["skipped"]:
            continue
        key = (r["cell"], r["n"], r["alpha"], r["gamma"], r["method"])
        acc.setdefault(key, []).append(r["error"])
    return {k: (float(np.mean(v)), len(v)) for k, v in sorted(acc.items())}


# ---------------------------------------------------------------- zero communication

ZERO_COMM_COLUMNS = ("schema", "n", "pi", "alpha", "beta", "replicate", "seed",
                     "d11_unnorm", "d11_norm", "d12_unnorm", "d12_norm",
                     "ratio_d11_unnorm_over_norm", "ratio_d12_unnorm_over_norm",
                     "r1_unnorm_sq", "r1_unnorm_sq_predicted")


def zero_comm_replicate(params, seed):
    g, truth = sample(params, seed)
    mu = quality_metrics(spectral_embedding(g, 2, False, seed=seed), truth)
    mn = quality_metrics(spectral_embedding(g, 2, True, seed=seed), truth)
    # class-1 residual of A's principal eigenvector on the first block
    n1 = params.n1
    block = g.subgraph(np.arange(n1))[0]
    vhat = top_k_eigenpairs(block.adjacency.astype(float), 1, backend="lanczos", seed=seed).vectors[:, 0]
    c = abs(vhat.sum()) / math.sqrt(n1)
    ana = analytic_distances(params)
    return dict(
        schema=SCHEMA_VERSION, n=params.n, pi=params.pi, alpha=params.alpha, beta=params.beta, seed=seed,
        d11_unnorm=mu.d11_sq, d11_norm=mn.d11_sq, d12_unnorm=mu.d12_sq, d12_norm=mn.d12_sq,
        ratio_d11_unnorm_over_norm=mu.d11_sq / mn.d11_sq,
        ratio_d12_unnorm_over_norm=mu.d12_sq / mn.d12_sq,
        r1_unnorm_sq=1 - c**2,
        r1_unnorm_sq_predicted=ana.d11_sq_unnorm * n1,
    )


def run_zero_comm(cfg):
    rows = []
    for n in cfg.grid("n"):
        params = BlockModelParams(int(n), cfg.scalar("pi"), cfg.scalar("alpha"), cfg.scalar("beta"), 0.0)
        for rep in range(cfg.replicates):
            row = zero_comm_replicate(params, cfg.seed ^ rep)
            row["replicate"] = rep
            rows.append(row)
    return rows


# ---------------------------------------------------------------- analytic accuracy

ANALYTIC_COLUMNS = ("schema", "row_type") + COMPARISON_COLUMNS + (
    "mean_d11", "median_d11", "max_d11", "mean_d12", "median_d12", "max_d12", "cells", "skipped_cells")


def analytic_accuracy_cells(cfg):
    """Grid cells ``(params, skipped_reason)`` for the analytic-accuracy study."""
    n = int(cfg.scalar("n"))
    pi = cfg.scalar("pi")
    for a in cfg.grid("alpha"):
        for b in cfg.grid("beta"):
            for x in cfg.grid("x"):
                g = a * x
                if g > 1 or g <= 0:
                    yield None, "gamma out of range"
                elif abs(a * b - g * g) < 1e-6:
                    yield None, "|alpha*beta - gamma^2| < 1e-6"
                else:
                    yield BlockModelParams(n, pi, a, b, g), ""


def _accuracy_task(task):
    params, seed, reps = task
    return empirical_vs_analytic(params, seed=seed, replicates=reps)


def run_analytic_accuracy(cfg):
    """Per-cell empirical vs analytic ratios plus one summary row."""
    tasks, skipped = [], 0
    for cell, (params, reason) in enumerate(analytic_accuracy_cells(cfg)):
        if params is None:
            skipped += 1
            continue
        tasks.append((params, derive_seed(cfg.seed, cell), cfg.replicates))
    rows = [r for chunk in _map(_accuracy_task, tasks, cfg.options.get("workers", 1)) for r in chunk]
    for r in rows:
        r.update(schema=SCHEMA_VERSION, row_type="cell")
    summary = dict(schema=SCHEMA_VERSION, row_type="summary", cells=len(tasks), skipped_cells=skipped,
                   seed=cfg.seed, **summarize_relative_errors(rows))
    return rows + [summary]


# ---------------------------------------------------------------- link prediction

def run_linkpred(cfg):
    from .linkpred import LINKPRED_COLUMNS, evaluate_all  # noqa: F401

    snaps = load_snapshots(load_manifest(cfg.options["manifest"]))
    k_grid = [int(k) for k in cfg.grid("k_grid")]
    return evaluate_all(snaps, seed=cfg.seed, sample_nodes=cfg.options.get("sample_nodes", 100),
                        runs=cfg.options.get("runs", 5), k_grid=k_grid)


RUNNERS = {
    "ratio-surface": (run_ratio_surface, RATIO_SURFACE_COLUMNS),
    "sweep-gamma-alpha": (run_sweep, SWEEP_COLUMNS),
    "sweep-n": (run_sweep, SWEEP_COLUMNS),
    "zero-comm": (run_zero_comm, ZERO_COMM_COLUMNS),
    "analytic-accuracy": (run_analytic_accuracy, ANALYTIC_COLUMNS),
    "linkpred": (run_linkpred, None),
}


def run_experiment(cfg, out=None):
    """Run ``cfg`` and write its CSV to ``out`` (path or file; default
    ``cfg.output``).  Returns the rows."""
    fn, columns = RUNNERS[cfg.kind]
    rows = fn(cfg)
    if columns is None:
        from .linkpred import LINKPRED_COLUMNS

        columns = LINKPRED_COLUMNS
    dest = out if out is not None else cfg.output
    if dest:
        write_csv(rows, dest, columns)
    return rows

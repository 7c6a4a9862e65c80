"""Blockmodel link prediction with cross-validated k, AUC evaluation and
the Katz-index baseline."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse import linalg as splinalg
from scipy.stats import rankdata

from .clustering import ClusterAssignment, spectral_cluster
from .eigen import top_k_eigenpairs
from .graph import Graph, as_labels, largest_connected_component, merge_snapshots, prune_min_degree

log = logging.getLogger(__name__)

DEFAULT_K_GRID = tuple(range(10, 101, 10))
LINKPRED_COLUMNS = ("method", "mode", "k_chosen", "auc", "seed", "positives", "negatives", "nodes")


class SpectralRadiusError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class FittedBlockProbabilities:
    k: int
    phat: np.ndarray
    cluster_sizes: np.ndarray
    empty_cells: np.ndarray  # True where a cell has no node pairs


@dataclass(frozen=True)
class PredictionEval:
    auc: float
    positives: int
    negatives: int
    mode: str
    k: int | None = None
    run_aucs: tuple = ()


def _labels_of(assignment):
    if isinstance(assignment, ClusterAssignment):
        return assignment.labels
    return as_labels(assignment)


def fit_phat(g_train, assignment, k=None):
    """Edge frequency for every cluster pair of a partition of ``g_train``."""
    lab = _labels_of(assignment)
    if len(lab) != g_train.node_count:
        raise ValueError("assignment does not cover the training graph")
    k = int(k or lab.max() + 1)
    sizes = np.bincount(lab, minlength=k).astype(float)
    counts = np.zeros((k, k))
    if g_train.edge_count:
        la, lb = lab[g_train.edges[:, 0]], lab[g_train.edges[:, 1]]
        np.add.at(counts, (la, lb), 1)
        counts = counts + counts.T - np.diag(np.diag(counts))
    pairs = np.outer(sizes, sizes)
    np.fill_diagonal(pairs, sizes * (sizes - 1) / 2)
    empty = pairs == 0
    phat = np.divide(counts, pairs, out=np.zeros_like(counts), where=~empty)
    return FittedBlockProbabilities(k, phat, sizes.astype(np.int64), empty)


def score_pairs(model, assignment, pairs):
    lab = _labels_of(assignment)
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    if len(pairs) and (pairs.min() < 0 or pairs.max() >= len(lab)):
        raise IndexError("pair refers to a node outside the assignment")
    return model.phat[lab[pairs[:, 0]], lab[pairs[:, 1]]]


def auc(scores, truth):
    """Probability a positive outranks a negative, ties counting one half."""
    s = np.asarray(scores, dtype=float)
    t = np.asarray(truth).astype(bool)
    npos, nneg = int(t.sum()), int((~t).sum())
    if npos == 0 or nneg == 0:
        raise ValueError("AUC needs at least one positive and one negative")
    ranks = rankdata(s)  # average ranks resolve ties
    return float((ranks[t].sum() - npos * (npos + 1) / 2) / (npos * nneg))


def katz_scores(g, theta, pairs):
    """Katz index ``sum_{l>=1} theta^l (A^l)_ij`` for each pair in ``pairs``.

    Solved as ``((I - theta A)^{-1} - I)_ij`` with one sparse LU
    factorisation and one solve per distinct source node.
    """
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    lam1 = leading_eigenvalue(g)
    if theta <= 0 or theta * lam1 >= 1:
        raise SpectralRadiusError(f"theta={theta} needs 0 < theta < 1/lambda_1 = {1 / lam1 if lam1 else np.inf}")
    n = g.node_count
    m = (sparse.identity(n, format="csc") - theta * g.adjacency.tocsc()).tocsc()
    lu = splinalg.splu(m)
    out = np.empty(len(pairs))
    sources = np.unique(pairs[:, 0])
    for chunk in np.array_split(sources, max(1, len(sources) // 256)):
        if len(chunk) == 0:
            continue
        rhs = np.zeros((n, len(chunk)))
        rhs[chunk, np.arange(len(chunk))] = 1.0
        sol = lu.solve(rhs)
        col = {int(s): c for c, s in enumerate(chunk)}
        sel = np.isin(pairs[:, 0], chunk)
        idx = np.flatnonzero(sel)
        cols = np.array([col[int(s)] for s in pairs[idx, 0]], dtype=np.int64)
        out[idx] = sol[pairs[idx, 1], cols] - (pairs[idx, 0] == pairs[idx, 1])
    return out


def leading_eigenvalue(g):
    if g.edge_count == 0:
        return 0.0
    return float(top_k_eigenpairs(g.adjacency.astype(float), 1).values[0])


def default_katz_theta(g):
    lam1 = leading_eigenvalue(g)
    return 0.8 / lam1 if lam1 > 0 else 0.5


# ---------------------------------------------------------------- evaluation protocol


def node_pairs(nodes, n):
    """All ``(i, j)``, ``j != i``, for each ``i`` in ``nodes``, concatenated."""
    nodes = np.asarray(nodes, dtype=np.int64)
    j = np.arange(n)
    rows = [np.column_stack([np.full(n - 1, i), j[j != i]]) for i in nodes]
    return np.concatenate(rows) if rows else np.zeros((0, 2), np.int64)


def sample_test_nodes(g_test, count, rng):
    eligible = np.flatnonzero(g_test.degrees > 0)
    if len(eligible) == 0:
        raise ValueError("no node has a neighbour in the test graph")
    return np.sort(rng.choice(eligible, size=min(count, len(eligible)), replace=False))


def evaluate_scores(score_fn, g_train, g_test, nodes):
    """AUC of ``score_fn(pairs)`` against ``g_test`` edges for both modes.

    Returns ``{"links-included": (auc, pos, neg), "links-excluded": ...}``;
    the excluded mode drops pairs that are training edges, and its AUC is
    NaN when no positive survives.
    """
    pairs = node_pairs(nodes, g_test.node_count)
    s = score_fn(pairs)
    truth = g_test.has_edges(pairs)
    keep = ~g_train.has_edges(pairs)
    out = {}
    for mode, mask in (("links-included", np.ones(len(pairs), bool)), ("links-excluded", keep)):
        t = truth[mask]
        pos, neg = int(t.sum()), int((~t).sum())
        a = auc(s[mask], t) if pos and neg else float("nan")
        out[mode] = (a, pos, neg)
    return out


def spectral_scorer(g_train, k, normalized, seed):
    assignment, _ = spectral_cluster(g_train, k, normalized, seed=seed)
    model = fit_phat(g_train, assignment, k)
    return lambda pairs: score_pairs(model, assignment, pairs)


def select_k(aucs_by_k):
    """Largest AUC; ties go to the smaller k."""
    return min(aucs_by_k, key=lambda k: (-aucs_by_k[k], k))


def validation_aucs(train, validate, k_grid, normalized, seed=0, sample_nodes=100):
    rng = np.random.default_rng(seed)
    nodes = sample_test_nodes(validate, sample_nodes, rng)
    out = {}
    for k in k_grid:
        scorer = spectral_scorer(train, k, normalized, seed)
        out[k] = evaluate_scores(scorer, train, validate, nodes)["links-included"][0]
    return out


def clip_k_grid(k_grid, n):
    grid = sorted({int(k) for k in k_grid if 1 <= k <= n - 1})
    if not grid:
        grid = [max(1, min(2, n - 1))]
    return grid


def cross_validate_k(train, validate, k_grid=DEFAULT_K_GRID, normalized=True, seed=0, sample_nodes=100):
    """k from ``k_grid`` with the best validation AUC (ties: smaller k)."""
    if len(k_grid) == 0:
        raise ValueError("k_grid is empty")
    grid = clip_k_grid(k_grid, train.node_count)
    if len(grid) == 1:
        return grid[0]
    return select_k(validation_aucs(train, validate, grid, normalized, seed, sample_nodes))


@dataclass(frozen=True, eq=False)
class PreparedSnapshots:
    train: Graph
    validate: Graph
    test: Graph
    kept_nodes: np.ndarray  # original ids of the surviving nodes


def prepare_snapshots(snapshots, min_deg=2):
    """Training graph = merge of all but the last two snapshots, peeled of
    low-degree nodes and cut to its giant component; the last two snapshots
    are restricted to the surviving nodes."""
    snapshots = list(snapshots)
    if len(snapshots) < 3:
        raise ValueError(f"need at least 3 snapshots, got {len(snapshots)}")
    merged = merge_snapshots(snapshots[:-2])
    # ensures the later snapshots share the universe
    merge_snapshots(snapshots)
    pruned, m1 = prune_min_degree(merged, min_deg)
    if pruned.node_count == 0:
        raise ValueError("no node survives degree pruning")
    train, m2 = largest_connected_component(pruned)
    inv1 = np.array(sorted(m1, key=m1.get))
    inv2 = np.array(sorted(m2, key=m2.get))
    kept = inv1[inv2]
    return PreparedSnapshots(train, snapshots[-2].subgraph(kept)[0], snapshots[-1].subgraph(kept)[0], kept)


def evaluate_protocol(snapshots, normalized=True, seed=0, sample_nodes=100, k_grid=DEFAULT_K_GRID,
                      runs=5, method="spectral", theta=None, prepared=None):
    """Temporal link-prediction protocol.

    ``method="spectral"`` cross-validates k on the second-to-last snapshot
    and scores pairs by fitted block probabilities; ``method="katz"`` uses
    the Katz index on the training graph (``theta`` defaults to 0.8 over its
    leading eigenvalue).  Test AUCs are averaged over ``runs`` independent
    draws of ``sample_nodes`` test nodes.  Returns ``(included, excluded)``.
    """
    prep = prepared or prepare_snapshots(snapshots)
    train, test = prep.train, prep.test
    k = None
    if method == "spectral":
        k = cross_validate_k(train, prep.validate, k_grid, normalized, seed, sample_nodes)
        scorer = spectral_scorer(train, k, normalized, seed)
    elif method == "katz":
        th = default_katz_theta(train) if theta is None else theta
        scorer = lambda pairs: katz_scores(train, th, pairs)  # noqa: E731
    else:
        raise ValueError(f"unknown method {method!r}")

    rng = np.random.default_rng(np.random.SeedSequence([seed, 1]))
    per_mode = {"links-included": [], "links-excluded": []}
    for _ in range(runs):
        nodes = sample_test_nodes(test, sample_nodes, rng)
        for mode, res in evaluate_scores(scorer, train, test, nodes).items():
            per_mode[mode].append(res)
    out = []
    for mode in ("links-included", "links-excluded"):
        res = per_mode[mode]
        aucs = [a for a, _, _ in res if not np.isnan(a)]
        out.append(PredictionEval(
            auc=float(np.mean(aucs)) if aucs else float("nan"),
            positives=int(sum(p for _, p, _ in res)),
            negatives=int(sum(q for _, _, q in res)),
            mode=mode, k=k, run_aucs=tuple(a for a, _, _ in res),
        ))
    return tuple(out)


def evaluate_all(snapshots, seed=0, sample_nodes=100, runs=5, k_grid=DEFAULT_K_GRID):
    """Unnormalized, normalized and Katz rows in the link-prediction CSV schema."""
    prep = prepare_snapshots(snapshots)
    rows = []
    for name, kw in (("unnorm", dict(normalized=False)), ("norm", dict(normalized=True)),
                     ("katz", dict(method="katz"))):
        for ev in evaluate_protocol(None, seed=seed, sample_nodes=sample_nodes, k_grid=k_grid, runs=runs,
                                    prepared=prep, **kw):
            rows.append(dict(method=name, mode=ev.mode, k_chosen="" if ev.k is None else ev.k, auc=ev.auc,
                             seed=seed, positives=ev.positives, negatives=ev.negatives,
                             nodes=prep.train.node_count))
    return rows


def synthetic_snapshots(params, snapshots=3, persistence=0.5, seed=0):
    """Snapshot stream from one planted blockmodel.

    A base graph is drawn once; each snapshot keeps every base edge with
    probability ``persistence`` and adds an independent fresh draw thinned
    to ``1 - persistence``, so each snapshot is marginally close to the
    base model while edges recur over time.
    """
    from .sbm import sample

    ss = np.random.SeedSequence([seed, 7])
    seeds = ss.generate_state(2 * snapshots + 1, np.uint64)
    base, truth = sample(params, int(seeds[0]))
    out = []
    for t in range(snapshots):
        rng = np.random.default_rng(int(seeds[1 + 2 * t]))
        kept = base.edges[rng.random(base.edge_count) < persistence]
        fresh, _ = sample(params, int(seeds[2 + 2 * t]))
        fresh_kept = fresh.edges[rng.random(fresh.edge_count) < 1 - persistence]
        out.append(Graph(params.n, np.concatenate([kept, fresh_kept])))
    return out, truth

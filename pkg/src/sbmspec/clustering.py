"""k-means with balanced restarts and the spectral clustering pipeline."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .eigen import adjacency_matrix, normalize_adjacency, top_k_eigenpairs


@dataclass(frozen=True, eq=False)
class SpectralEmbedding:
    coords: np.ndarray
    eigenvalues: np.ndarray
    normalized: bool
    degenerate: bool = False


@dataclass(frozen=True, eq=False)
class ClusterAssignment:
    labels: np.ndarray
    centers: np.ndarray
    within_ss: float
    balance: int
    iterations: int = 0

    @property
    def sizes(self):
        return np.bincount(self.labels, minlength=len(self.centers))


def _sq_dists(points, centers):
    # |x|^2 - 2 x.c + |c|^2, clipped at 0
    d = (points**2).sum(1)[:, None] - 2 * points @ centers.T + (centers**2).sum(1)[None, :]
    return np.maximum(d, 0.0)


def kmeans_plusplus(points, k, rng):
    n = len(points)
    chosen = [int(rng.integers(n))]
    closest = _sq_dists(points, points[chosen]).ravel()
    for _ in range(1, k):
        total = closest.sum()
        if total > 0:
            idx = int(rng.choice(n, p=closest / total))
        else:
            idx = int(rng.integers(n))
        chosen.append(idx)
        closest = np.minimum(closest, _sq_dists(points, points[[idx]]).ravel())
    return points[chosen].copy()


def _finalize(points, labels, k, iterations):
    centers = np.zeros((k, points.shape[1]))
    for c in range(k):
        centers[c] = points[labels == c].mean(axis=0)
    sse = float(((points - centers[labels]) ** 2).sum())
    sizes = np.bincount(labels, minlength=k)
    return ClusterAssignment(labels, centers, sse, int(sizes.min()), iterations)


def kmeans(points, k, seed=0, max_iters=100, init=None):
    """Lloyd's algorithm from k-means++ seeding (or explicit ``init`` centers).

    Stops when the assignment no longer changes or after ``max_iters``
    assignment steps.  A cluster left empty takes over the point farthest
    from its current center.  Deterministic given ``seed``.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points[:, None]
    n = len(points)
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    rng = np.random.default_rng(seed)
    centers = kmeans_plusplus(points, k, rng) if init is None else np.array(init, dtype=float)
    if centers.shape != (k, points.shape[1]):
        raise ValueError("init centers have the wrong shape")

    labels = None
    prev_sse = np.inf
    # rounding of the expanded squared distances scales with |x|^2
    slack = 1e-12 * max(1.0, float((points**2).sum()))
    it = 0
    for it in range(1, max_iters + 1):
        d = _sq_dists(points, centers)
        new = np.argmin(d, axis=1)
        sizes = np.bincount(new, minlength=k)
        if (sizes == 0).any():
            taken = np.zeros(n, dtype=bool)
            for c in np.flatnonzero(sizes == 0):
                own = d[np.arange(n), new]
                # donor must not be the last member of its cluster
                ok = (sizes[new] > 1) & ~taken
                far = int(np.argmax(np.where(ok, own, -1.0)))
                sizes[new[far]] -= 1
                new[far] = c
                sizes[c] = 1
                centers[c] = points[far]
                taken[far] = True
                d[far] = _sq_dists(points[[far]], centers)[0]
        sse = float(d[np.arange(n), new].sum())
        if sse > prev_sse * (1 + 1e-9) + slack:
            raise AssertionError(f"k-means objective increased: {prev_sse} -> {sse}")
        prev_sse = sse
        if labels is not None and np.array_equal(new, labels):
            break
        labels = new
        for c in range(k):
            centers[c] = points[labels == c].mean(axis=0)
    return _finalize(points, labels, k, it)


def _selection_key(run_index, result):
    return (-result.balance, result.within_ss, run_index)


def kmeans_balanced_best(points, k, seed=0, restarts=5, max_iters=100):
    """Run ``restarts`` seeded k-means and keep the most balanced result.

    The winner has the largest smallest-cluster size; ties go to the lower
    within-cluster sum of squares, then to the earlier run.
    """
    runs = [kmeans(points, k, seed=seed ^ r, max_iters=max_iters) for r in range(restarts)]
    return pick_balanced(runs)


def pick_balanced(runs):
    best = min(range(len(runs)), key=lambda r: _selection_key(r, runs[r]))
    return runs[best]


def spectral_embedding(g, k, normalized, seed=0, backend="auto"):
    m = normalize_adjacency(g) if normalized else adjacency_matrix(g)
    pairs = top_k_eigenpairs(m, k, backend=backend, seed=seed)
    return SpectralEmbedding(pairs.vectors, pairs.values, bool(normalized), bool(pairs.degenerate.any()))


def spectral_cluster(g, k, normalized, seed=0, restarts=5, row_normalize=False, backend="auto"):
    """Cluster the rows of the top-k eigenvectors of A (or its normalized
    form) with balanced-restart k-means.

    Returns ``(assignment, embedding)``.
    """
    emb = spectral_embedding(g, k, normalized, seed=seed, backend=backend)
    pts = emb.coords
    if row_normalize:
        norms = np.linalg.norm(pts, axis=1, keepdims=True)
        pts = pts / np.where(norms > 0, norms, 1.0)
    return kmeans_balanced_best(pts, k, seed=seed, restarts=restarts), emb

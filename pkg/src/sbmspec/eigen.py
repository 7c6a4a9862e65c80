"""Top-k symmetric eigenpairs by absolute eigenvalue, and degree normalization."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph
from scipy.sparse import linalg as splinalg

DENSE_BACKEND_MAX_N = 500


class ZeroDegreeError(ValueError):
    def __init__(self, node):
        self.node = int(node)
        super().__init__(f"node {self.node} has degree 0; prune isolated nodes before normalizing")


@dataclass(frozen=True, eq=False)
class EigenPairs:
    values: np.ndarray
    vectors: np.ndarray
    converged: np.ndarray
    residual_norms: np.ndarray
    degenerate: np.ndarray  # degenerate[i]: values[i] nearly equals a neighbouring value

    @property
    def k(self):
        return len(self.values)


def normalize_adjacency(g, dense=None):
    """``D^{-1/2} A D^{-1/2}``; dense when ``dense`` is true or n is small."""
    d = g.degrees
    zero = np.flatnonzero(d == 0)
    if len(zero):
        raise ZeroDegreeError(zero[0])
    s = 1.0 / np.sqrt(d.astype(float))
    if dense is None:
        dense = g.node_count <= DENSE_BACKEND_MAX_N
    if dense:
        return g.dense_adjacency() * np.outer(s, s)
    ds = sparse.diags(s)
    return (ds @ g.adjacency @ ds).tocsr()


def adjacency_matrix(g, dense=None):
    if dense is None:
        dense = g.node_count <= DENSE_BACKEND_MAX_N
    return g.dense_adjacency() if dense else g.adjacency


def _sign_fix(vectors):
    idx = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[idx, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1
    return vectors * signs


def _order(values):
    # descending |lambda|, then descending lambda; magnitudes equal to ~1e-10
    # relative count as ties so +1 and -1 of a bipartite block order stably
    mag = np.abs(values)
    finite = mag[np.isfinite(mag)]
    scale = finite.max() if finite.size and finite.max() > 0 else 1.0
    return np.lexsort((-values, -np.round(mag / scale, 10)))


def _dense_eigh(a):
    asym = np.max(np.abs(a - a.T)) if a.size else 0.0
    if asym > 1e-12 * max(1.0, np.max(np.abs(a))):
        raise ValueError(f"matrix is not symmetric (max asymmetry {asym:.3g})")
    return np.linalg.eigh(a)


def _lanczos(m, k, rng, tol, maxiter):
    """Extreme-magnitude eigenpairs of one irreducible block via ARPACK."""
    n = m.shape[0]
    if n <= max(50, 2 * k + 2):
        w, v = _dense_eigh(m.toarray())
        return w, v, np.ones(n, dtype=bool)
    ncv = min(n, max(2 * k + 1, 20))
    try:
        w, v = splinalg.eigsh(m, k=k, which="LM", v0=rng.standard_normal(n), ncv=ncv,
                              tol=tol, maxiter=maxiter)
        return w, v, np.ones(len(w), dtype=bool)
    except splinalg.ArpackNoConvergence as exc:
        return exc.eigenvalues, exc.eigenvectors, np.zeros(len(exc.eigenvalues), dtype=bool)


def top_k_eigenpairs(m, k, backend="auto", seed=0, tol=0.0, maxiter=None):
    """Eigenpairs of symmetric ``m`` with the ``k`` largest |eigenvalues|.

    ``backend`` is ``"dense"`` (full LAPACK decomposition), ``"lanczos"``
    (ARPACK implicitly restarted Lanczos taking extremes at both ends, run on
    each irreducible block separately so that eigenvalues repeated across
    disconnected pieces are all found) or ``"auto"`` (dense up to n=500).
    Columns are sign-normalized so the largest-magnitude entry of each is
    positive.  Pairs that did not converge carry ``converged=False``.
    """
    n = m.shape[0]
    if m.shape != (n, n):
        raise ValueError("matrix must be square")
    if not 1 <= k <= n:
        raise ValueError(f"k must be in 1..{n}")
    if backend == "auto":
        backend = "dense" if n <= DENSE_BACKEND_MAX_N or 2 * k >= n else "lanczos"

    if backend == "dense":
        a = m.toarray() if sparse.issparse(m) else np.asarray(m, dtype=float)
        w, v = _dense_eigh(a)
        conv = np.ones(n, dtype=bool)
    elif backend == "lanczos":
        ms = sparse.csr_matrix(m)
        asym = abs(ms - ms.T).max() if ms.nnz else 0.0
        if asym > 1e-12 * max(1.0, abs(ms).max() if ms.nnz else 0.0):
            raise ValueError(f"matrix is not symmetric (max asymmetry {asym:.3g})")
        rng = np.random.default_rng(seed)
        ncomp, comp = csgraph.connected_components(ms, directed=False)
        ws, vs, cs = [], [], []
        for c in range(ncomp):
            idx = np.flatnonzero(comp == c)
            block = ms[idx][:, idx]
            if len(idx) == 1:
                w_c, v_c, c_c = block.toarray().ravel(), np.ones((1, 1)), np.ones(1, dtype=bool)
            else:
                w_c, v_c, c_c = _lanczos(block, min(k, len(idx) - 1), rng, tol, maxiter)
                top = _order(w_c)[:k]
                w_c, v_c, c_c = w_c[top], v_c[:, top], c_c[top]
            full = np.zeros((n, len(w_c)))
            full[idx] = v_c
            ws.append(w_c)
            vs.append(full)
            cs.append(c_c)
            if sum(map(len, ws)) > 2 * k:
                # keep only the current top k candidates
                w_all, v_all, c_all = np.concatenate(ws), np.hstack(vs), np.concatenate(cs)
                keep = _order(w_all)[:k]
                ws, vs, cs = [w_all[keep]], [v_all[:, keep]], [c_all[keep]]
        w, v, conv = np.concatenate(ws), np.hstack(vs), np.concatenate(cs)
        if len(w) < k:
            pad = k - len(w)
            w = np.r_[w, np.full(pad, np.nan)]
            v = np.column_stack([v, np.full((n, pad), np.nan)])
            conv = np.r_[conv, np.zeros(pad, dtype=bool)]
    else:
        raise ValueError(f"unknown backend {backend!r}")

    order = _order(w)[:k]
    w, v = w[order], v[:, order]
    conv = conv[order]
    v = _sign_fix(v)
    res = np.linalg.norm(m @ v - v * w, axis=0)
    conv &= res <= 1e-8 * np.maximum(1.0, np.abs(w))

    finite = np.abs(w[np.isfinite(w)])
    gap_tol = 1e-6 * (finite.max() if finite.size else 0.0)
    degenerate = np.zeros(k, dtype=bool)
    for i in range(k - 1):
        if abs(w[i] - w[i + 1]) < gap_tol:
            degenerate[i] = degenerate[i + 1] = True
    return EigenPairs(w, v, conv, res, degenerate)


def principal_angles(a, b):
    """Principal angles (radians) between the column spans of ``a`` and ``b``."""
    from scipy.linalg import subspace_angles

    return subspace_angles(a, b)

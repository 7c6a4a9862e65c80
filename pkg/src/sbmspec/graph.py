"""Simple undirected graphs, node labelings, and the preprocessing transforms
(giant component, degree peeling, snapshot merging, edge-list I/O)."""

from __future__ import annotations

import io
import logging
import os
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

log = logging.getLogger(__name__)


class EdgeListParseError(ValueError):
    """Malformed line in an edge-list or label file."""

    def __init__(self, lineno, line, reason="expected two whitespace-separated tokens"):
        self.lineno = lineno
        self.line = line
        super().__init__(f"line {lineno}: {reason}: {line!r}")


class InconsistentUniverseError(ValueError):
    pass


def _canonical_edges(node_count, edges):
    e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if e.size and (e.min() < 0 or e.max() >= node_count):
        raise ValueError(f"edge endpoint outside 0..{node_count - 1}")
    e = e[e[:, 0] != e[:, 1]]
    e = np.sort(e, axis=1)
    if len(e):
        e = np.unique(e, axis=0)
    return e


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable simple undirected graph on nodes ``0..node_count-1``.

    Edges are stored once as sorted ``(i, j)`` rows with ``i < j``; self-loops
    and duplicates are discarded at construction.  ``node_names`` optionally
    carries the original tokens when the graph came from a file.
    """

    node_count: int
    edges: np.ndarray
    node_names: tuple | None = field(default=None, compare=False)

    def __init__(self, node_count, edges=(), node_names=None):
        if node_count < 0:
            raise ValueError("node_count must be nonnegative")
        e = _canonical_edges(node_count, edges)
        e.setflags(write=False)
        object.__setattr__(self, "node_count", int(node_count))
        object.__setattr__(self, "edges", e)
        if node_names is not None:
            node_names = tuple(node_names)
            if len(node_names) != node_count:
                raise ValueError("node_names length must equal node_count")
        object.__setattr__(self, "node_names", node_names)

    @classmethod
    def from_adjacency(cls, a, node_names=None):
        a = sparse.coo_matrix(a)
        mask = a.row < a.col
        return cls(a.shape[0], np.column_stack([a.row[mask], a.col[mask]]), node_names)

    @property
    def edge_count(self):
        return len(self.edges)

    @cached_property
    def degrees(self):
        d = np.bincount(self.edges.ravel(), minlength=self.node_count).astype(np.int64)
        d.setflags(write=False)
        return d

    @cached_property
    def adjacency(self):
        """Symmetric 0/1 adjacency in CSR form."""
        n = self.node_count
        i, j = self.edges[:, 0], self.edges[:, 1]
        data = np.ones(2 * len(i))
        a = sparse.csr_matrix((data, (np.r_[i, j], np.r_[j, i])), shape=(n, n))
        a.sort_indices()
        return a

    def dense_adjacency(self):
        return self.adjacency.toarray()

    def edge_set(self):
        return {(int(i), int(j)) for i, j in self.edges}

    def has_edges(self, pairs):
        """Boolean vector: whether each ``(i, j)`` row of ``pairs`` is an edge."""
        pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
        if len(pairs) == 0:
            return np.zeros(0, dtype=bool)
        return np.asarray(self.adjacency[pairs[:, 0], pairs[:, 1]]).ravel() > 0

    def neighbors(self, i):
        a = self.adjacency
        return a.indices[a.indptr[i]:a.indptr[i + 1]]

    def subgraph(self, nodes):
        """Induced subgraph on ``nodes`` (kept in ascending id order).

        Returns the subgraph and the old->new id map.
        """
        nodes = np.unique(np.asarray(nodes, dtype=np.int64))
        new_id = np.full(self.node_count, -1, dtype=np.int64)
        new_id[nodes] = np.arange(len(nodes))
        e = new_id[self.edges]
        e = e[(e >= 0).all(axis=1)]
        names = None
        if self.node_names is not None:
            names = [self.node_names[i] for i in nodes]
        mapping = {int(old): int(new) for new, old in enumerate(nodes)}
        return Graph(len(nodes), e, names), mapping

    def __repr__(self):
        return f"Graph(node_count={self.node_count}, edge_count={self.edge_count})"


@dataclass(frozen=True, eq=False)
class NodeLabeling:
    """Class membership of every node, values in ``0..k-1``."""

    labels: np.ndarray

    def __init__(self, labels, k=None):
        lab = np.asarray(labels, dtype=np.int64).ravel().copy()
        if lab.size and lab.min() < 0:
            raise ValueError("labels must be nonnegative")
        lab.setflags(write=False)
        object.__setattr__(self, "labels", lab)
        object.__setattr__(self, "_k", k)

    @property
    def k(self):
        if self._k is not None:
            return self._k
        return int(self.labels.max()) + 1 if self.labels.size else 0

    @property
    def class_sizes(self):
        return np.bincount(self.labels, minlength=self.k)

    def __len__(self):
        return len(self.labels)

    def restrict(self, nodes):
        return NodeLabeling(self.labels[np.asarray(nodes, dtype=np.int64)], k=self.k)


def as_labels(x):
    return x.labels if isinstance(x, NodeLabeling) else np.asarray(x, dtype=np.int64).ravel()


def degrees(g):
    return g.degrees


def _mapping_to_nodes(mapping):
    return np.array(sorted(mapping, key=mapping.get), dtype=np.int64)


def largest_connected_component(g):
    """Induced subgraph on the largest connected component.

    Equal-size components are ranked by their smallest node id.
    """
    if g.node_count < 1:
        raise ValueError("graph has no nodes")
    ncomp, comp = csgraph.connected_components(g.adjacency, directed=False)
    sizes = np.bincount(comp, minlength=ncomp)
    # first node of each component in id order
    first = np.full(ncomp, g.node_count, dtype=np.int64)
    np.minimum.at(first, comp, np.arange(g.node_count))
    best = min(range(ncomp), key=lambda c: (-sizes[c], first[c]))
    return g.subgraph(np.flatnonzero(comp == best))


def component_fraction(g):
    """Fraction of nodes in the largest connected component."""
    if g.node_count == 0:
        return 0.0
    _, comp = csgraph.connected_components(g.adjacency, directed=False)
    return np.bincount(comp).max() / g.node_count


def prune_min_degree(g, min_deg=2, rounds=None, return_rounds=False):
    """Peel nodes with degree below ``min_deg``.

    With ``rounds=None`` peeling is repeated until no node falls below the
    threshold; ``rounds=1`` does one pass over the original degrees.
    """
    if min_deg < 1:
        raise ValueError("min_deg must be >= 1")
    alive = np.ones(g.node_count, dtype=bool)
    a = g.adjacency
    deg = np.asarray(g.degrees).copy()
    done = 0
    while rounds is None or done < rounds:
        drop = alive & (deg < min_deg)
        if not drop.any():
            break
        alive &= ~drop
        deg -= np.asarray(a @ drop.astype(np.int64)).astype(np.int64)
        done += 1
    log.debug("prune_min_degree: %d rounds, %d of %d nodes kept", done, alive.sum(), g.node_count)
    sub, mapping = g.subgraph(np.flatnonzero(alive))
    if return_rounds:
        return sub, mapping, done
    return sub, mapping


def merge_snapshots(snaps):
    """Union of edge sets of snapshots over one node universe."""
    snaps = list(snaps)
    if not snaps:
        raise ValueError("no snapshots to merge")
    n = snaps[0].node_count
    for s in snaps[1:]:
        if s.node_count != n:
            raise InconsistentUniverseError(
                f"snapshot node counts differ ({n} vs {s.node_count}); load them with a shared vocabulary"
            )
    edges = np.concatenate([s.edges for s in snaps]) if snaps else np.zeros((0, 2))
    return Graph(n, edges, snaps[0].node_names)


# ---------------------------------------------------------------- text I/O


def _open_text(source):
    if isinstance(source, (str, os.PathLike)) and not (isinstance(source, str) and "\n" in source):
        return open(source, encoding="utf-8")
    if isinstance(source, str):
        return io.StringIO(source)
    return source


def parse_edge_list(lines, vocab=None):
    """Parse edge-list lines into a graph.

    Tokens map to contiguous ids in first-appearance order.  ``vocab`` (a
    token->id dict) is extended in place, which lets several snapshot files
    share one id universe.  Returns ``(graph, self_loops_dropped)``.
    """
    vocab = {} if vocab is None else vocab
    pairs = []
    loops = 0
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise EdgeListParseError(lineno, raw.rstrip("\n"))
        ids = [vocab.setdefault(t, len(vocab)) for t in parts]
        if ids[0] == ids[1]:
            loops += 1
            continue
        pairs.append(ids)
    if loops:
        log.warning("dropped %d self-loop(s)", loops)
    names = sorted(vocab, key=vocab.get)
    return Graph(len(vocab), pairs, names), loops


def load_edge_list(source, vocab=None):
    """Read an edge list from a path, a file object, or a string of text.

    Returns ``(graph, self_loops_dropped)``.
    """
    f = _open_text(source)
    try:
        return parse_edge_list(f, vocab)
    finally:
        if f is not source:
            f.close()


def save_edge_list(g, dest):
    names = g.node_names or [str(i) for i in range(g.node_count)]
    text = "".join(f"{names[i]} {names[j]}\n" for i, j in g.edges)
    if hasattr(dest, "write"):
        dest.write(text)
    else:
        with open(dest, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)


def load_snapshots(paths):
    """Load several edge lists into one shared node universe."""
    vocab = {}
    raw = [load_edge_list(p, vocab)[0] for p in paths]
    n = len(vocab)
    names = sorted(vocab, key=vocab.get)
    return [Graph(n, s.edges, names) for s in raw]


def load_manifest(path):
    """Snapshot manifest: one edge-list path per line, oldest first."""
    base = os.path.dirname(os.path.abspath(path))
    out = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if line and not line.startswith("#"):
                out.append(line if os.path.isabs(line) else os.path.join(base, line))
    return out


def load_labels(source, vocab):
    """Read ``token<TAB>label`` lines against a token->id vocabulary.

    Label values are remapped to ``0..k-1`` in sorted order; nodes without a
    label raise.
    """
    f = _open_text(source)
    raw = {}
    try:
        for lineno, line in enumerate(f, start=1):
            s = line.rstrip("\r\n")
            if not s.strip() or s.startswith("#"):
                continue
            parts = s.split("\t") if "\t" in s else s.split()
            if len(parts) != 2:
                raise EdgeListParseError(lineno, s, "expected node_token<TAB>label")
            raw[parts[0]] = parts[1]
    finally:
        if f is not source:
            f.close()
    missing = [t for t in vocab if t not in raw]
    if missing:
        raise ValueError(f"{len(missing)} node(s) without a label, e.g. {missing[0]!r}")
    values = sorted(set(raw[t] for t in vocab), key=lambda v: (len(v), v))
    code = {v: c for c, v in enumerate(values)}
    labels = np.empty(len(vocab), dtype=np.int64)
    for tok, i in vocab.items():
        labels[i] = code[raw[tok]]
    return NodeLabeling(labels, k=len(values))


def save_labels(labeling, dest, names=None):
    lab = as_labels(labeling)
    names = names or [str(i) for i in range(len(lab))]
    text = "".join(f"{names[i]}\t{lab[i]}\n" for i in range(len(lab)))
    if hasattr(dest, "write"):
        dest.write(text)
    else:
        with open(dest, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)

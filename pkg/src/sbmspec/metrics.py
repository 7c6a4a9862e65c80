"""Oracle-center quality metrics, residual decompositions, misclassification
rate, eigenvalue deviation and empirical-vs-analytic comparisons."""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .clustering import SpectralEmbedding, spectral_embedding
from .eigen import adjacency_matrix, top_k_eigenpairs
from .graph import as_labels
from .sbm import analytic_distances, reduced_eigen, sample, warn_if_degenerate


@dataclass(frozen=True)
class QualityMetrics:
    d11_sq: float
    d12_sq: float
    d21_sq: float
    d22_sq: float
    K1: np.ndarray
    K2: np.ndarray
    center_gap_sq: float


def quality_metrics(embedding, truth):
    """Mean squared distances of each true class from both oracle centers.

    ``embedding`` is a :class:`SpectralEmbedding` or an ``n x k`` array;
    ``truth`` must have exactly two nonempty classes.
    """
    q = embedding.coords if isinstance(embedding, SpectralEmbedding) else np.asarray(embedding, float)
    lab = as_labels(truth)
    classes = np.unique(lab)
    if len(classes) != 2:
        raise ValueError(f"quality metrics need exactly 2 classes, got {len(classes)}")
    if len(lab) != len(q):
        raise ValueError("embedding and labeling have different node counts")
    in1 = lab == classes[0]
    q1, q2 = q[in1], q[~in1]
    k1, k2 = q1.mean(axis=0), q2.mean(axis=0)

    def msd(pts, c):
        return float(((pts - c) ** 2).sum(axis=1).mean())

    return QualityMetrics(msd(q1, k1), msd(q1, k2), msd(q2, k1), msd(q2, k2), k1, k2,
                          float(((k1 - k2) ** 2).sum()))


@dataclass(frozen=True, eq=False)
class ResidualDecomposition:
    c: float
    r: np.ndarray
    r_norm_sq: float
    r_class_means: np.ndarray
    c_cross: float | None = None


def residual_decomposition(population_vec, empirical_vec, truth=None, other_empirical=None):
    """Split ``v = c * vhat + r`` with the sign of ``vhat`` chosen so c >= 0.

    ``other_empirical`` (optional) gives the cross alignment ``v . vhat_other``.
    """
    v = np.asarray(population_vec, dtype=float)
    vh = np.asarray(empirical_vec, dtype=float)
    for name, x in (("population_vec", v), ("empirical_vec", vh)):
        if abs(np.linalg.norm(x) - 1) > 1e-8:
            raise ValueError(f"{name} is not unit norm")
    v = v / np.linalg.norm(v)
    vh = vh / np.linalg.norm(vh)
    c = float(v @ vh)
    if c < 0:
        vh, c = -vh, -c
    r = v - c * vh
    if truth is not None:
        lab = as_labels(truth)
        means = np.array([r[lab == cl].mean() for cl in np.unique(lab)])
    else:
        means = np.array([r.mean()])
    cross = None if other_empirical is None else float(v @ np.asarray(other_empirical, float))
    return ResidualDecomposition(c, r, float(r @ r), means, cross)


def misclassification_rate(predicted, truth):
    """Smallest disagreement fraction over matchings of predicted to true labels."""
    p, t = as_labels(predicted), as_labels(truth)
    if len(p) != len(t):
        raise ValueError(f"labelings cover different node counts ({len(p)} vs {len(t)})")
    if len(p) == 0:
        return 0.0
    conf = np.zeros((p.max() + 1, t.max() + 1), dtype=np.int64)
    np.add.at(conf, (p, t), 1)
    rows, cols = linear_sum_assignment(conf, maximize=True)
    return 1.0 - conf[rows, cols].sum() / len(p)


@dataclass(frozen=True)
class EigDeviationReport:
    empirical: tuple
    population: tuple
    deviation: tuple
    scaled: tuple  # deviation / sqrt(n rho)
    degenerate: bool = False


def eigenvalue_deviation(g, params):
    """Top-two eigenvalues of A against the class-level population values."""
    degenerate = warn_if_degenerate(params)
    lam, _, _ = reduced_eigen(params)
    emp = top_k_eigenpairs(adjacency_matrix(g), 2).values
    dev = emp - lam
    scale = math.sqrt(params.n * params.rho)
    return EigDeviationReport(tuple(emp), tuple(lam), tuple(dev), tuple(dev / scale), degenerate)


# ---------------------------------------------------------------- empirical vs analytic


def embedding_metrics(g, truth, normalized, seed=0):
    emb = spectral_embedding(g, 2, normalized, seed=seed)
    return quality_metrics(emb, truth), emb


COMPARISON_COLUMNS = (
    "n", "pi", "alpha", "beta", "gamma", "replicate", "seed",
    "emp_ratio_d11", "emp_ratio_d12", "ana_ratio_d11", "ana_ratio_d12",
    "relerr_d11", "relerr_d12",
    "d11_unnorm", "d11_norm", "d12_unnorm", "d12_norm",
)


def empirical_vs_analytic(params, seed=0, replicates=1):
    """Per replicate, empirical normalized/unnormalized ratios of d11 and d12
    against their closed-form counterparts.  Returns a list of row dicts
    keyed by :data:`COMPARISON_COLUMNS`."""
    ana = analytic_distances(params)
    ana12 = ana.d12_sq_norm / ana.d12_sq_unnorm
    rows = []
    for r in range(replicates):
        s = seed ^ r
        g, truth = sample(params, s)
        mu, _ = embedding_metrics(g, truth, False, s)
        mn, _ = embedding_metrics(g, truth, True, s)
        e11 = mn.d11_sq / mu.d11_sq
        e12 = mn.d12_sq / mu.d12_sq
        rows.append(dict(
            n=params.n, pi=params.pi, alpha=params.alpha, beta=params.beta, gamma=params.gamma,
            replicate=r, seed=s,
            emp_ratio_d11=e11, emp_ratio_d12=e12, ana_ratio_d11=ana.ratio_d11, ana_ratio_d12=ana12,
            relerr_d11=abs(e11 - ana.ratio_d11) / ana.ratio_d11, relerr_d12=abs(e12 - ana12) / ana12,
            d11_unnorm=mu.d11_sq, d11_norm=mn.d11_sq, d12_unnorm=mu.d12_sq, d12_norm=mn.d12_sq,
        ))
    return rows


def summarize_relative_errors(rows):
    out = {}
    for key in ("d11", "d12"):
        e = np.array([r[f"relerr_{key}"] for r in rows])
        out[f"mean_{key}"] = float(e.mean())
        out[f"median_{key}"] = float(np.median(e))
        out[f"max_{key}"] = float(e.max())
    return out


def write_csv(rows, dest, columns=None):
    """Write row dicts as CSV with a header line; ``dest`` is a path or file."""
    rows = list(rows)
    columns = list(columns or (rows[0].keys() if rows else []))
    close = False
    if not hasattr(dest, "write"):
        dest = open(dest, "w", encoding="utf-8", newline="")
        close = True
    try:
        w = csv.DictWriter(dest, fieldnames=columns, lineterminator="\n", extrasaction="ignore")
        w.writeheader()
        for row in rows:
            w.writerow({k: _fmt(row.get(k)) for k in columns})
    finally:
        if close:
            dest.close()


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return int(v)
    return v


def as_row(obj):
    d = asdict(obj)
    return {k: (v.tolist() if isinstance(v, np.ndarray) else v) for k, v in d.items()}

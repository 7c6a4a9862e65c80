"""Two-class stochastic blockmodel: parameters, sampling, population spectra
and the closed-form asymptotic distance formulas."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .graph import Graph, NodeLabeling

DENSE_LIMIT = 10_000
# rows of the upper triangle drawn per RNG call when sampling
_SAMPLE_CHUNK = 4_000_000


class DegenerateModelError(ValueError):
    """alpha*beta == gamma**2: the expectation matrix has rank one."""


class DegenerateModelWarning(UserWarning):
    pass


@dataclass(frozen=True)
class BlockModelParams:
    n: int
    pi: float
    alpha: float
    beta: float
    gamma: float

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("n must be at least 2")
        if not 0 < self.pi < 1:
            raise ValueError("pi must lie in (0, 1)")
        for name in ("alpha", "beta", "gamma"):
            v = getattr(self, name)
            if not 0 <= v <= 1:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        n1 = self.n1
        if n1 < 1 or self.n - n1 < 1:
            raise ValueError(f"round(n*pi) = {n1} leaves an empty class")

    @property
    def n1(self):
        return int(round(self.n * self.pi))

    @property
    def n2(self):
        return self.n - self.n1

    @property
    def frac1(self):
        """Class-1 fraction after rounding the class size."""
        return self.n1 / self.n

    @property
    def rho(self):
        return max(self.alpha, self.beta, self.gamma)

    @property
    def degenerate(self):
        return math.isclose(self.alpha * self.beta, self.gamma**2, rel_tol=1e-12, abs_tol=1e-15)

    @property
    def sparsity_diagnostic(self):
        """log n / (n rho); small values mean the semi-sparse regime holds."""
        return math.log(self.n) / (self.n * self.rho) if self.rho > 0 else math.inf

    def labels(self):
        return NodeLabeling(np.r_[np.zeros(self.n1, np.int64), np.ones(self.n2, np.int64)], k=2)

    def swapped(self):
        """Same model with the two classes exchanged."""
        return BlockModelParams(self.n, self.n2 / self.n, self.beta, self.alpha, self.gamma)

    def with_n(self, n):
        return BlockModelParams(n, self.pi, self.alpha, self.beta, self.gamma)


@dataclass(frozen=True)
class PopulationDensities:
    mu1: float
    mu2: float
    mu: float


def densities(params):
    n, p = params.n, params.frac1
    a, b, g = params.alpha, params.beta, params.gamma
    mu1 = p * a + (1 - p) * g - a / n
    mu2 = p * g + (1 - p) * b - b / n
    return PopulationDensities(mu1, mu2, p * mu1 + (1 - p) * mu2)


def load_params(source):
    """Parse flat ``key=value`` text (keys n, pi, alpha, beta, gamma, seed)."""
    from .config import ConfigError, parse_key_values

    kv = parse_key_values(source)
    unknown = set(kv) - {"n", "pi", "alpha", "beta", "gamma", "seed"}
    if unknown:
        raise ConfigError(f"field {sorted(unknown)[0]!r}: not a model parameter")
    try:
        params = BlockModelParams(
            int(kv["n"]), float(kv["pi"]), float(kv["alpha"]), float(kv["beta"]), float(kv["gamma"])
        )
        seed = int(kv.get("seed", 0))
    except KeyError as exc:
        raise ConfigError(f"field {exc.args[0]!r}: missing") from None
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return params, seed


# ---------------------------------------------------------------- sampling


def _upper_probabilities(params, rows):
    """Edge probabilities of pairs (i, j>i) for i in ``rows``, row-major."""
    n, n1 = params.n, params.n1
    parts = []
    for i in rows:
        j = np.arange(i + 1, n)
        if i < n1:
            parts.append(np.where(j < n1, params.alpha, params.gamma))
        else:
            parts.append(np.full(len(j), params.beta))
    return parts


def sample(params, seed=0):
    """Draw one graph from the blockmodel.

    Nodes ``0..n1-1`` form class 0 and the rest class 1.  One uniform is
    consumed per unordered pair in row-major order of the upper triangle, so
    the output is reproducible from ``(params, seed)``.
    """
    rows = lambda r: _upper_probabilities(params, r)  # noqa: E731
    return _sample_rows(params.n, rows, np.random.default_rng(seed)), params.labels()


def sample_blocks(sizes, probs, seed=0):
    """Draw from a general k-block model with consecutive blocks of ``sizes``
    and symmetric ``k x k`` connection probabilities ``probs``.

    Returns ``(graph, labels)``; used for planted multi-block checks.
    """
    sizes = np.asarray(sizes, dtype=np.int64)
    probs = np.asarray(probs, dtype=float)
    k = len(sizes)
    if probs.shape != (k, k) or not np.allclose(probs, probs.T):
        raise ValueError("probs must be a symmetric k x k matrix")
    if (probs < 0).any() or (probs > 1).any() or (sizes < 0).any():
        raise ValueError("probabilities must lie in [0, 1] and sizes be nonnegative")
    labels = np.repeat(np.arange(k), sizes)
    n = len(labels)

    def rows(r):
        return [probs[labels[i], labels[i + 1:]] for i in r]

    return _sample_rows(n, rows, np.random.default_rng(seed)), labels


def _sample_rows(n, upper_probs, rng):
    edges = []
    row = 0
    while row < n - 1:
        # rows [row, stop) contribute sum(n-1-i) pairs
        stop, count = row, 0
        while stop < n - 1 and (count == 0 or count + (n - 1 - stop) <= _SAMPLE_CHUNK):
            count += n - 1 - stop
            stop += 1
        u = rng.random(count)
        p = np.concatenate(upper_probs(range(row, stop)))
        hit = np.flatnonzero(u < p)
        if len(hit):
            # recover (i, j) from flat offsets within this block of rows
            lengths = n - 1 - np.arange(row, stop)
            starts = np.r_[0, np.cumsum(lengths)[:-1]]
            r = np.searchsorted(starts, hit, side="right") - 1
            i = row + r
            j = i + 1 + (hit - starts[r])
            edges.append(np.column_stack([i, j]))
        row = stop
    e = np.concatenate(edges) if edges else np.zeros((0, 2), np.int64)
    return Graph(n, e)


# ---------------------------------------------------------------- population matrices


def _check_dense(params):
    if params.n > DENSE_LIMIT:
        raise ValueError(f"n={params.n} too large to materialize densely (limit {DENSE_LIMIT})")


def population_matrix(params):
    """Expected adjacency P: blockwise alpha/gamma/beta with zero diagonal."""
    _check_dense(params)
    n1 = params.n1
    z = np.zeros(params.n, dtype=bool)
    z[:n1] = True
    p = np.where(np.outer(z, z), params.alpha, np.where(np.outer(~z, ~z), params.beta, params.gamma))
    np.fill_diagonal(p, 0.0)
    return p


def expected_degrees(params):
    m = densities(params)
    return np.r_[np.full(params.n1, params.n * m.mu1), np.full(params.n2, params.n * m.mu2)]


def population_matrix_normalized(params):
    m = densities(params)
    if m.mu1 <= 0 or m.mu2 <= 0:
        raise ValueError("a class has zero expected degree; normalized population matrix undefined")
    s = 1.0 / np.sqrt(expected_degrees(params))
    return population_matrix(params) * np.outer(s, s)


@dataclass(frozen=True)
class PopulationSpectrum:
    lambda1: float
    lambda2: float
    x1: float
    x2: float
    y1: float
    y2: float
    nu1: float
    nu2: float
    xt1: float
    xt2: float
    yt1: float
    yt2: float

    def vectors(self, n1, n2, normalized=False):
        """Blockwise-constant population eigenvectors as an ``n x 2`` array."""
        if normalized:
            cols = [(self.xt1, self.yt1), (self.xt2, self.yt2)]
        else:
            cols = [(self.x1, self.y1), (self.x2, self.y2)]
        return np.column_stack([np.r_[np.full(n1, a), np.full(n2, b)] for a, b in cols])


def reduced_eigen(params):
    """Eigenpairs of the 2x2 class-level reduction of P, ordered by |lambda|.

    Returns ``(values, x, y)`` where ``x[i]``/``y[i]`` are the class-1/class-2
    entries of the i-th unit eigenvector of the full blockwise matrix.  The
    O(rho) zero-diagonal correction is ignored.
    """
    n, p = params.n, params.frac1
    off = n * math.sqrt(p * (1 - p)) * params.gamma
    m = np.array([[n * p * params.alpha, off], [off, n * (1 - p) * params.beta]])
    w, v = np.linalg.eigh(m)
    order = sorted(range(2), key=lambda i: -abs(w[i]))
    vals, x, y = [], [], []
    for i in order:
        a, b = v[:, i]
        if a < 0 or (a == 0 and b < 0):
            a, b = -a, -b
        vals.append(float(w[i]))
        x.append(a / math.sqrt(n * p))
        y.append(b / math.sqrt(n * (1 - p)))
    return np.array(vals), np.array(x), np.array(y)


def population_spectrum(params):
    """Principal eigenvalues and blockwise eigenvector entries of P and of
    its degree-normalized counterpart."""
    if params.degenerate:
        raise DegenerateModelError("alpha*beta == gamma^2: expectation has rank one")
    n, p = params.n, params.frac1
    lam, x, y = reduced_eigen(params)
    m = densities(params)
    if m.mu1 <= 0 or m.mu2 <= 0:
        raise ValueError("a class has zero expected degree")
    nu2 = 1 - params.gamma * m.mu / (m.mu1 * m.mu2)
    return PopulationSpectrum(
        lambda1=lam[0], lambda2=lam[1], x1=x[0], x2=x[1], y1=y[0], y2=y[1],
        nu1=1.0,
        nu2=nu2,
        xt1=math.sqrt(m.mu1 / (n * m.mu)),
        yt1=math.sqrt(m.mu2 / (n * m.mu)),
        xt2=math.sqrt((1 - p) * m.mu2 / (n * p * m.mu)),
        yt2=-math.sqrt(p * m.mu1 / (n * (1 - p) * m.mu)),
    )


# ---------------------------------------------------------------- analytic distances


@dataclass(frozen=True)
class AnalyticDistances:
    d11_sq_unnorm: float
    d12_sq_unnorm: float
    d11_sq_norm: float
    d12_sq_norm: float
    ratio_d11: float
    zero_communication: bool = False


def _d11_unnorm(params, spec):
    n, p = params.n, params.frac1
    a, g = params.alpha, params.gamma
    wx = spec.x1**2 / spec.lambda1**2 + spec.x2**2 / spec.lambda2**2
    wy = spec.y1**2 / spec.lambda1**2 + spec.y2**2 / spec.lambda2**2
    return wx * n * p * a * (1 - a) + wy * n * (1 - p) * g * (1 - g)


def _d11_norm(params, spec):
    n, p = params.n, params.frac1
    a, g = params.alpha, params.gamma
    m = densities(params)
    nu2sq = spec.nu2**2
    t1 = n * p * a * (1 - a) / (n**3 * p * m.mu1**2) * (0.25 + (1 - p) * g / (m.mu1 * nu2sq))
    t2 = n * (1 - p) * g * (1 - g) / (n**3 * m.mu1**2) * (1 / (4 * p) + p * a / ((1 - p) * m.mu2 * nu2sq))
    return t1 + t2


def _zero_comm_distances(params):
    # two disconnected Erdos-Renyi blocks; sum of squared centered degrees
    # replaced by its expectation m(m-1)p(1-p)
    m, a = params.n1, params.alpha
    if a <= 0 or m < 2:
        raise ValueError("zero-communication formulas need alpha > 0 and a class of size >= 2")
    sum_dbar_sq = m * (m - 1) * a * (1 - a)
    r_unnorm = (sum_dbar_sq / m) / ((m - 1) * a) ** 2
    r_norm = (sum_dbar_sq / m) / (4 * m * (m - 1) * a**2)
    d12 = 1 / (params.n * params.frac1 * (1 - params.frac1))
    d11u, d11n = r_unnorm / m, r_norm / m
    ratio = d11n / d11u if d11u > 0 else math.nan
    return AnalyticDistances(d11u, d12, d11n, d12, ratio, zero_communication=True)


def analytic_distances(params, cls=1):
    """Asymptotic within-class (d11) and between-center (d12) squared
    distances for the unnormalized and normalized embeddings.

    ``cls=2`` gives the class-2 analogues by exchanging the class roles.
    With ``gamma == 0`` the Erdos-Renyi block formulas are used instead.
    """
    if cls == 2:
        return analytic_distances(params.swapped())
    if cls != 1:
        raise ValueError("cls must be 1 or 2")
    if params.gamma == 0:
        return _zero_comm_distances(params)
    spec = population_spectrum(params)
    p = params.frac1
    d12 = 1 / (params.n * p * (1 - p))
    du = _d11_unnorm(params, spec)
    dn = _d11_norm(params, spec)
    # alpha, gamma in {0, 1} leave no variance and the ratio undefined
    return AnalyticDistances(du, d12, dn, d12, dn / du if du > 0 else math.nan)


def sparse_limit_ratio(x):
    """Limit of normalized/unnormalized d11 for pi=1/2, alpha=beta,
    gamma = x*alpha as the edge density vanishes."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("x must be nonnegative")
    out = 0.25 + 1.5 * x / (1 + x**2)
    return float(out) if out.ndim == 0 else out


def guess_vector_ug0(g, labeling):
    """Second-eigenvector guess for the normalized adjacency:
    ``sqrt(d_i)/E_1`` on class 0 and ``-sqrt(d_i)/E_2`` on class 1."""
    lab = np.asarray(labeling.labels if isinstance(labeling, NodeLabeling) else labeling)
    d = g.degrees.astype(float)
    in1 = lab == 0
    e1, e2 = d[in1].sum(), d[~in1].sum()
    if e1 == 0 or e2 == 0:
        raise ValueError("both classes need positive total degree")
    return np.where(in1, np.sqrt(d) / e1, -np.sqrt(d) / e2)


def warn_if_degenerate(params):
    if params.degenerate:
        warnings.warn("alpha*beta == gamma^2: the model is rank one (excluded regime)",
                      DegenerateModelWarning, stacklevel=3)
        return True
    return False

"""Monte Carlo reference for the posterior of mutual information.

Samples are drawn in fixed-size chunks, chunk ``k`` using its own generator
seeded from ``SeedSequence(seed, spawn_key=(k,))``.  Chunks may run on any
number of worker threads; results are reassembled in chunk order so the output
is bit-identical for a given ``(table, samples, seed)`` whatever the worker
count.
"""
from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import xlogy

from .errors import InputError, UnsupportedInputError
from .tables import CountTable

CHUNK_SIZE = 1 << 16
N_BATCHES = 100


def _rng(seed: int, chunk: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(chunk),)))


def _dirichlet(rng: np.random.Generator, alphas: np.ndarray, size: int) -> np.ndarray:
    g = rng.standard_gamma(np.broadcast_to(alphas, (size,) + alphas.shape))
    axes = tuple(range(1, g.ndim))
    g /= g.sum(axis=axes, keepdims=True)
    return g


def sample_dirichlet(alphas, seed: int, size: int | None = None) -> np.ndarray:
    """Dirichlet draws by normalizing independent Gamma(alpha_i, 1) variates.

    ``alphas`` may be a vector or a matrix (treated as one flattened simplex).
    Returns one draw of the same shape, or ``size`` draws stacked on axis 0.
    """
    a = np.asarray(alphas, dtype=np.float64)
    if not np.all(a > 0) or not np.all(np.isfinite(a)):
        raise InputError("Dirichlet parameters must be positive and finite")
    out = _dirichlet(_rng(seed, 0), a, 1 if size is None else int(size))
    return out[0] if size is None else out


def mi_of_samples(pi: np.ndarray) -> np.ndarray:
    """I for a stack of joint matrices of shape (m, r, s)."""
    rows = pi.sum(axis=2)
    cols = pi.sum(axis=1)
    val = xlogy(pi, pi).sum(axis=(1, 2)) - xlogy(rows, rows).sum(axis=1) - xlogy(cols, cols).sum(axis=1)
    return np.maximum(val, 0.0)


def _chunk_sizes(samples: int, chunk: int) -> list[int]:
    full, rest = divmod(samples, chunk)
    return [chunk] * full + ([rest] if rest else [])


def _moments(x: np.ndarray) -> tuple[float, float, float, float]:
    mean = float(np.mean(x))
    d = x - mean
    var = float(np.mean(d * d))
    if var <= 0:
        return mean, var, math.nan, math.nan
    skew = float(np.mean(d**3) / var**1.5)
    kurt = float(np.mean(d**4) / var**2)
    return mean, var, skew, kurt


@dataclass(frozen=True, eq=False)
class McResult:
    sample_count: int
    seed: int
    mean: float
    variance: float
    skewness: float
    kurtosis: float
    se: dict
    i_max: float
    histogram_edges: np.ndarray
    histogram_mass: np.ndarray
    sorted_samples: np.ndarray = field(repr=False)
    flags: tuple = ()

    @property
    def histogram_density(self) -> np.ndarray:
        return self.histogram_mass / np.diff(self.histogram_edges)

    def ecdf(self, x):
        """Empirical cdf at ``x``."""
        return np.searchsorted(self.sorted_samples, x, side="right") / self.sample_count

    def quantile(self, p: float) -> float:
        return float(np.quantile(self.sorted_samples, p))

    def sup_distance(self, cdf) -> float:
        """Kolmogorov distance between the empirical cdf and the callable ``cdf``."""
        x = self.sorted_samples
        f = np.asarray(cdf(x), dtype=np.float64)
        k = np.arange(1, len(x) + 1) / len(x)
        return float(max(np.max(np.abs(f - k)), np.max(np.abs(f - (k - 1.0 / len(x))))))

    def to_dict(self) -> dict:
        return {
            "sample_count": self.sample_count,
            "seed": self.seed,
            "mean": self.mean,
            "variance": self.variance,
            "skewness": self.skewness,
            "kurtosis": self.kurtosis,
            "se": dict(self.se),
            "i_max": self.i_max,
            "flags": list(self.flags),
        }


def summarize_samples(values: np.ndarray, seed: int, i_max: float, bins: int = 200) -> McResult:
    """Moments, batch-means standard errors and histogram of MI samples."""
    x = np.asarray(values, dtype=np.float64)
    m = len(x)
    flags = []
    mean, var, skew, kurt = _moments(x)
    se = {"mean": math.nan, "variance": math.nan, "skewness": math.nan, "kurtosis": math.nan}
    if m >= 2 * N_BATCHES:
        usable = (m // N_BATCHES) * N_BATCHES
        stats = np.array([_moments(b) for b in x[:usable].reshape(N_BATCHES, -1)])
        for k, name in enumerate(("mean", "variance", "skewness", "kurtosis")):
            se[name] = float(np.std(stats[:, k], ddof=1) / math.sqrt(N_BATCHES))
    else:
        flags.append("too-few-samples-for-batch-means")
    if m == 1 or var == 0:
        flags.append("degenerate")
    edges = np.linspace(0.0, i_max, bins + 1)
    counts, _ = np.histogram(np.minimum(x, i_max), edges)
    return McResult(
        sample_count=m,
        seed=int(seed),
        mean=mean,
        variance=var,
        skewness=skew,
        kurtosis=kurt,
        se=se,
        i_max=i_max,
        histogram_edges=edges,
        histogram_mass=counts / m,
        sorted_samples=np.sort(x),
        flags=tuple(flags),
    )


def mi_samples(table: CountTable, samples: int, seed: int, workers: int = 1, chunk_size: int = CHUNK_SIZE) -> np.ndarray:
    """Raw posterior draws of I, in deterministic chunk order."""
    if not table.is_complete:
        raise UnsupportedInputError("Dirichlet MC needs complete data; see sample_incomplete_posterior")
    if samples < 1:
        raise InputError(f"samples must be positive, got {samples}")
    alphas = table.counts
    if np.any(alphas <= 0):
        raise InputError("every cell must be positive for Dirichlet sampling; apply a prior")
    sizes = _chunk_sizes(int(samples), int(chunk_size))

    def run(k):
        return mi_of_samples(_dirichlet(_rng(seed, k), alphas, sizes[k]))

    if workers <= 1 or len(sizes) == 1:
        parts = [run(k) for k in range(len(sizes))]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, range(len(sizes))))
    return np.concatenate(parts)


def mi_posterior_mc(table: CountTable, samples: int, seed: int, workers: int = 1, bins: int = 200) -> McResult:
    """Monte Carlo moments, histogram and empirical cdf of p(I|n)."""
    return summarize_samples(mi_samples(table, samples, seed, workers), seed, table.i_max, bins)


@dataclass(frozen=True)
class TailProbe:
    exponent: float
    expected: float
    conclusive: bool
    bins_used: int
    q10: float


def tail_exponent_probe(
    table: CountTable,
    samples: int,
    seed: int,
    n_bins: int = 20,
    min_count: int = 20,
    workers: int = 1,
    values: np.ndarray | None = None,
) -> TailProbe:
    """Small-I power-law exponent of the posterior density.

    Log-spaced bins cover ``[q10/100, q10]`` with ``q10`` the 10% quantile.
    ``ln density = c + a ln I + b I`` is fitted by count-weighted least squares;
    the linear term absorbs the first correction to the pure power law.  The
    probe is inconclusive when any bin holds fewer than ``min_count`` samples.
    """
    x = mi_samples(table, samples, seed, workers) if values is None else np.asarray(values)
    dbar = (table.r - 1) * (table.s - 1)
    q10 = float(np.quantile(x, 0.1))
    expected = dbar / 2.0 - 1.0
    if not q10 > 0:
        return TailProbe(math.nan, expected, False, 0, q10)
    edges = np.geomspace(q10 * 1e-2, q10, n_bins + 1)
    counts, _ = np.histogram(x, edges)
    if np.any(counts < min_count):
        return TailProbe(math.nan, expected, False, int(np.sum(counts >= min_count)), q10)
    centers = np.sqrt(edges[1:] * edges[:-1])
    dens = counts / (len(x) * np.diff(edges))
    design = np.column_stack([np.ones(n_bins), np.log(centers), centers])
    w = np.sqrt(counts.astype(np.float64))
    coef = np.linalg.lstsq(design * w[:, None], np.log(dens) * w, rcond=None)[0]
    return TailProbe(float(coef[1]), expected, True, n_bins, q10)


def _gibbs_chains(table: CountTable, samples: int, seed: int, chains: int, burn_in: int) -> np.ndarray:
    counts = table.counts
    rm = table.row_missing
    cm = table.col_missing
    if not (np.all(rm == np.round(rm)) and np.all(cm == np.round(cm))):
        raise InputError("data augmentation needs integer margin-only counts")
    rm = rm.astype(np.int64)
    cm = cm.astype(np.int64)
    rng = _rng(seed, 0)
    pi = _dirichlet(rng, counts, chains)
    steps = burn_in + math.ceil(samples / chains)
    out = []
    for step in range(steps):
        rows = pi / pi.sum(axis=2, keepdims=True)
        cols = np.swapaxes(pi / pi.sum(axis=1, keepdims=True), 1, 2)
        fill_r = rng.multinomial(rm, rows)  # (chains, r, s)
        fill_c = np.swapaxes(rng.multinomial(cm, cols), 1, 2)
        alphas = counts[None] + fill_r + fill_c
        g = rng.standard_gamma(alphas)
        pi = g / g.sum(axis=(1, 2), keepdims=True)
        if step >= burn_in:
            out.append(mi_of_samples(pi))
    return np.concatenate(out)[:samples]


def sample_incomplete_posterior(table: CountTable, samples: int, seed: int, chains: int = 2000, burn_in: int = 200) -> np.ndarray:
    """Posterior draws of I under missing-at-random margin counts (small tables).

    The target density is proportional to
    ``prod pi_ij^(n_ij - 1) prod pi_i+^(n_i?) prod pi_+j^(n_?j)``, i.e. the
    complete-data Dirichlet times the likelihood of the margin-only units.
    When only one variable is missing the posterior factorizes exactly into a
    Dirichlet over the observed-side marginal and independent conditional
    Dirichlets.  Otherwise a data-augmentation Gibbs sampler runs ``chains``
    parallel chains after ``burn_in`` sweeps.
    """
    if table.r * table.s > 9:
        raise UnsupportedInputError("the incomplete-data sampler is a test utility for rs <= 9")
    if np.any(table.counts <= 0):
        raise InputError("every joint cell must be positive")
    has_row = np.any(table.row_missing > 0)
    has_col = np.any(table.col_missing > 0)
    if has_row and has_col:
        return _gibbs_chains(table, samples, seed, chains, burn_in)
    t = table.transpose() if has_col else table
    rng = _rng(seed, 0)
    marg = _dirichlet(rng, t.counts.sum(axis=1) + t.row_missing, samples)  # (m, r)
    cond = np.stack([_dirichlet(rng, t.counts[i], samples) for i in range(t.r)], axis=1)  # (m, r, s)
    return mi_of_samples(marg[:, :, None] * cond)


def write_histogram_csv(path, result: McResult):
    centers = 0.5 * (result.histogram_edges[1:] + result.histogram_edges[:-1])
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "density"])
        for x, d in zip(centers, result.histogram_density):
            w.writerow([repr(float(x)), repr(float(d))])


def write_cdf_csv(path, result: McResult, points: int = 201):
    x = np.linspace(0.0, result.i_max, points)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "cumulative"])
        for xv, c in zip(x, result.ecdf(x)):
            w.writerow([repr(float(xv)), repr(float(c))])

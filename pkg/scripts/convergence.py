"""Error of the series approximations as n grows on a fixed chance matrix.

The exact variance and higher central moments of a 2x2 posterior come from
Gauss-Jacobi quadrature over the stick-breaking representation, so errors far
below Monte Carlo resolution are visible.  Prints one row per n and the ratio
of successive errors.
"""
import argparse
from dataclasses import dataclass

import numpy as np
from scipy.special import roots_jacobi, xlogy

from bayesmi import moments
from bayesmi.tables import CountTable


@dataclass
class Config:
    pi: tuple = (40 / 150, 10 / 150, 20 / 150, 80 / 150)
    sizes: tuple = (100, 200, 400, 800, 1600)
    nodes: int = 150


def quadrature_moments(alphas, npts):
    a = np.asarray(alphas, dtype=float)
    nodes, weights = [], []
    rest = a.sum()
    for k in range(3):
        x, w = roots_jacobi(npts, rest - a[k] - 1.0, a[k] - 1.0)
        nodes.append((x + 1.0) / 2.0)
        weights.append(w / w.sum())
        rest -= a[k]
    v1, v2, v3 = np.meshgrid(*nodes, indexing="ij")
    w = np.einsum("i,j,k->ijk", *weights)
    p = np.stack([v1, (1 - v1) * v2, (1 - v1) * (1 - v2) * v3, (1 - v1) * (1 - v2) * (1 - v3)], -1)
    rows = np.stack([p[..., 0] + p[..., 1], p[..., 2] + p[..., 3]], -1)
    cols = np.stack([p[..., 0] + p[..., 2], p[..., 1] + p[..., 3]], -1)
    info = xlogy(p, p).sum(-1) - xlogy(rows, rows).sum(-1) - xlogy(cols, cols).sum(-1)
    m = float((w * info).sum())
    c = info - m
    c2, c3, c4 = (float((w * c**k).sum()) for k in (2, 3, 4))
    return m, c2, c3 / c2**1.5, c4 / c2**2


def run(cfg: Config):
    print(f"{'n':>6} {'err_mean2':>11} {'err_var2':>11} {'skew':>9} {'skew_ex':>9} {'kurt-3':>9} {'kurt-3_ex':>9}")
    prev = None
    for n in cfg.sizes:
        counts = np.asarray(cfg.pi) * n
        s = moments.summarize(CountTable(counts.reshape(2, 2)))
        _, var, skew, kurt = quadrature_moments(counts, cfg.nodes)
        row = (abs(s.mean_order2 - s.mean_exact), abs(s.var_order2 - var), s.skewness, skew, s.kurtosis - 3, kurt - 3)
        print(f"{n:>6} " + " ".join(f"{v:>11.3e}" if k < 2 else f"{v:>9.4f}" for k, v in enumerate(row)))
        if prev is not None:
            print(f"{'':>6} ratios: mean {prev[0] / row[0]:.2f}  var {prev[1] / row[1]:.2f}  "
                  f"|kurt-3| {abs(prev[4] / row[4]):.2f}")
        prev = row


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--nodes", type=int, default=Config.nodes)
    run(Config(nodes=p.parse_args().nodes))


if __name__ == "__main__":
    main()

"""F, FF and BF filters on synthetic sequential streams.

For each stream prints final accuracy and mean attribute count per filter and
whether FF is significantly different from F (paired t-test, 0.05).
"""
import argparse
from dataclasses import dataclass

import numpy as np

from bayesmi import dataio, filters, seqnb


@dataclass
class Config:
    streams: int = 20
    n: int = 500
    n_attributes: int = 10
    n_informative: int = 3
    missing_rate: float = 0.0
    epsilon: float = 0.003
    p_bar: float = 0.95
    seed: int = 0


def run(cfg: Config):
    fc = filters.FilterConfig(epsilon=cfg.epsilon, p_bar=cfg.p_bar)
    kinds = ("F", "FF", "BF")
    acc = {k: [] for k in kinds}
    used = {k: [] for k in kinds}
    for k in range(cfg.streams):
        ds = dataio.generate_stream(cfg.n, cfg.n_attributes, cfg.n_informative,
                                    missing_rate=cfg.missing_rate, seed=cfg.seed + k)
        runs = seqnb.run_sequential(ds, kinds, fc)
        tt = seqnb.paired_t_test(runs["FF"].correct, runs["F"].correct)
        for kind in kinds:
            acc[kind].append(runs[kind].accuracy)
            used[kind].append(runs[kind].mean_attributes)
        print(f"stream {k:>2}: " + "  ".join(f"{kind} {runs[kind].accuracy:.3f}/{runs[kind].mean_attributes:.2f}"
                                             for kind in kinds) + f"  FF-F significant={tt.significant}")
    print("mean:      " + "  ".join(f"{k} {np.mean(acc[k]):.3f}/{np.mean(used[k]):.2f}" for k in kinds))


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--streams", type=int, default=Config.streams)
    p.add_argument("--n", type=int, default=Config.n)
    p.add_argument("--missing-rate", type=float, default=Config.missing_rate)
    p.add_argument("--seed", type=int, default=Config.seed)
    a = p.parse_args()
    run(Config(streams=a.streams, n=a.n, missing_rate=a.missing_rate, seed=a.seed))


if __name__ == "__main__":
    main()

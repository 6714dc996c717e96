"""Small-I density exponent of the posterior for independent tables."""
import argparse
from dataclasses import dataclass

import numpy as np

from bayesmi import mc
from bayesmi.tables import CountTable


@dataclass
class Config:
    shapes: tuple = ((2, 2), (2, 3), (3, 3))
    cell_count: float = 10.0
    samples: int = 10_000_000
    seed: int = 8
    workers: int = 1


def run(cfg: Config):
    for shape in cfg.shapes:
        t = CountTable(np.full(shape, cfg.cell_count))
        probe = mc.tail_exponent_probe(t, cfg.samples, cfg.seed, workers=cfg.workers)
        print(f"{shape[0]}x{shape[1]}: exponent={probe.exponent:.4f} expected={probe.expected:.2f} "
              f"conclusive={probe.conclusive} q10={probe.q10:.3e}")


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--samples", type=int, default=Config.samples)
    p.add_argument("--seed", type=int, default=Config.seed)
    p.add_argument("--workers", type=int, default=Config.workers)
    a = p.parse_args()
    run(Config(samples=a.samples, seed=a.seed, workers=a.workers))


if __name__ == "__main__":
    main()

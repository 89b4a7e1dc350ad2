"""Stability diagrams and the sign table for the abstract appendix cases."""

import argparse
from dataclasses import dataclass

from turingcl.cli import main


@dataclass
class Config:
    out: str = "results/appendix_b"
    eps: float = 1e-2
    n_kappa: int = 73


def run(cfg: Config) -> int:
    return main(["appendix-b", "--out", cfg.out, "--eps", str(cfg.eps), "--grid-n", str(cfg.n_kappa)])


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=Config.out)
    ap.add_argument("--n-kappa", type=int, default=Config.n_kappa)
    a = ap.parse_args()
    raise SystemExit(run(Config(out=a.out, n_kappa=a.n_kappa)))

"""Continue example-model waves and compare Bloch eigenvalues with the reduced matrix."""

import argparse
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from turingcl import pdecheck as P
from turingcl.io import dump_json


@dataclass
class Config:
    eps_list: list = field(default_factory=lambda: [0.05, 0.025])
    n_sigma: int = 11
    M: int = 32
    out: str = "results/bloch"


def run(cfg: Config) -> list:
    prob = P.example_problem()
    rows = []
    for eps in cfg.eps_list:
        w = P.newton_wave(prob, eps, M=cfg.M, tol=1e-14)
        sample = P.bloch_matrix(prob, w, 0.0)
        rep = P.spectral_match(prob, w, np.linspace(-eps**2, eps**2, cfg.n_sigma))
        rows.append({"eps": eps, "newton": w.history, "zeros": P.count_zero_eigenvalues(sample),
                     "stable_predicted": 2 * eps**2 * P.wave_alpha(prob, w) ** 2 * prob.coeffs.gamma.real,
                     "near_zero": sample.near_zero, **rep.to_dict()})
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    dump_json(rows, out / "bloch_match.json")
    return rows


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=Config.out)
    for r in run(Config(out=ap.parse_args().out)):
        print(f"eps={r['eps']}: zeros={r['zeros']}, max mismatch/eps^2={r['max_scaled_mismatch']:.3e}")

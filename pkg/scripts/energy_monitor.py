"""Energy of the rescaled hyperbolic model started at half the bound."""

import argparse
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from turingcl import ampsim as S
from turingcl.stability import ModelCoeffs
from turingcl.svgplot import line_plot


@dataclass
class Config:
    c: complex = -3 + 3j
    eps: float = 0.05
    bound: float = 1.0
    N: int = 128
    dt: float = 1e-3
    out: str = "results/energy"


def initial_state(cfg: Config, co: ModelCoeffs) -> S.FieldState:
    L = 2 * np.pi
    x = np.arange(cfg.N) * L / cfg.N
    A0 = 1 + 0.5 * np.cos(x) + 0.3j * np.sin(2 * x)
    B0 = 0.2 * np.cos(x)

    def make(m):
        return S.FieldState(L, cfg.N, m * A0, m * B0, 0.0, cfg.eps, "hyperbolic", co)

    lo, hi = 0.0, 2.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if S.energy(make(mid)).E < 0.5 * cfg.bound else (lo, mid)
    return make(lo)


def run(cfg: Config):
    co = ModelCoeffs.scalar(a=1 + 1j, b=1, c=cfg.c, d=1, f=1, h=1)
    # slow time 1 is fast time 1/eps
    tr = S.simulate(initial_state(cfg, co), 1.0, cfg.dt, observers={"E": lambda s: S.energy(s).E}, stride=10)
    t = np.array(tr.times) / cfg.eps
    E = np.array(tr.observed["E"])
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    np.savetxt(out / "energy.csv", np.column_stack([t, E]), delimiter=",", header="t_fast,E", comments="",
               fmt="%.12e")
    line_plot([("E", t, E)], out / "energy.svg", title="energy monitor", xlabel="fast time", ylabel="E",
              hline=cfg.bound)
    return t, E


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--c", default="-3+3j", type=complex)
    ap.add_argument("--out", default=Config.out)
    a = ap.parse_args()
    t, E = run(Config(c=a.c, out=a.out))
    print(f"E(0) = {E[0]:.4f}, max E = {E.max():.4f} up to t = {t[-1]:.1f}")

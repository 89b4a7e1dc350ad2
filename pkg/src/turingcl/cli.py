"""Command line entry point: ``turingcl <command> [options]``.

Exit status 0 on success, 1 for bad input, 2 when a numerical step fails.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import ampsim, stability
from .amplitude import amplitude_coefficients
from .io import dump_json, load_model
from .spectral import SpectralError, check_hypotheses, find_critical
from .svgplot import line_plot

COMMANDS = ("analyze", "coeffs", "wave", "stability", "scan", "simulate", "bloch", "appendix-b")


class InputError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    model_path: str | None = None
    overrides: list = field(default_factory=list)
    output_dir: str = "out"
    seed: int = 0
    eps: float | None = None
    kappa: float = 0.0
    rho: float | None = None
    sigma_max: float | None = None
    grid_n: int | None = None
    dt: float | None = None
    t_final: float | None = None


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------


def parse_number(text: str) -> complex:
    t = text.strip().replace(" ", "").replace("i", "j")
    try:
        return complex(t)
    except ValueError as exc:
        raise InputError(f"cannot parse number {text!r}") from exc


def parse_overrides(items) -> dict:
    out = {}
    for item in items or []:
        if "=" not in item:
            raise InputError(f"--set expects key=value, got {item!r}")
        key, val = item.split("=", 1)
        vals = [parse_number(v) for v in val.split(",")]
        out[key.strip()] = vals[0] if len(vals) == 1 else vals
    return out


def write_csv(path, header, rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(f"{float(v):.12e}" for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def _load(cfg: RunConfig):
    if not cfg.model_path:
        raise InputError("--model is required for this command")
    try:
        return load_model(cfg.model_path)
    except FileNotFoundError as exc:
        raise InputError(f"model file not found: {cfg.model_path}") from exc
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed model file: {exc}") from exc


def _critical(sym):
    return find_critical(sym)


def _abstract_coeffs(cfg: RunConfig) -> stability.ModelCoeffs:
    """Model coefficients from a model file, else the appendix defaults, then --set."""
    if cfg.model_path:
        sym, spec = _load(cfg)
        co, _ = amplitude_coefficients(sym, _critical(sym), spec)
        base = stability.ModelCoeffs.from_amplitude(co)
    else:
        base = stability.appendix_coeffs(-3 + 3j, 1 - 1j)
    ov = parse_overrides(cfg.overrides)
    conv = {}
    for k, v in ov.items():
        if k in ("a", "b", "c"):
            conv[k] = v
        elif k in ("d", "g"):
            conv[k] = np.atleast_1d(v)
        else:
            arr = np.atleast_1d(np.real(v))
            conv[k] = arr.reshape(1, 1) if k in ("f", "e_B") and arr.size == 1 else arr
    try:
        return base.with_overrides(**conv)
    except KeyError as exc:
        raise InputError(f"unknown coefficient {exc}") from exc


def _outdir(cfg: RunConfig) -> Path:
    p = Path(cfg.output_dir)
    p.mkdir(parents=True, exist_ok=True)
    return p


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_analyze(cfg: RunConfig) -> None:
    sym, _ = _load(cfg)
    crit = _critical(sym)
    ks = crit.k_star
    rep = check_hypotheses(sym, np.linspace(0.0, 4 * ks, 81), np.linspace(-0.05, 0.05, 5), k_guess=ks)
    out = _outdir(cfg)
    dump_json({"hypotheses": rep.to_dict(), "critical": crit.to_dict()}, out / "analyze.json")


def cmd_coeffs(cfg: RunConfig) -> None:
    sym, spec = _load(cfg)
    co, _ = amplitude_coefficients(sym, _critical(sym), spec)
    dump_json(co.to_dict(), _outdir(cfg) / "coeffs.json")


def _problem(cfg: RunConfig):
    from .pdecheck import WaveProblem

    sym, spec = _load(cfg)
    crit = _critical(sym)
    co, psi = amplitude_coefficients(sym, crit, spec)
    return WaveProblem(sym, spec, crit, co, psi)


def cmd_wave(cfg: RunConfig) -> None:
    from .pdecheck import newton_wave, wave_alpha

    prob = _problem(cfg)
    eps = 0.05 if cfg.eps is None else cfg.eps
    w = newton_wave(prob, eps, cfg.kappa, M=cfg.grid_n or 32)
    d = w.to_dict()
    d["alpha_measured"] = wave_alpha(prob, w)
    d["alpha_predicted"] = w.alpha_predicted
    d["newton_history"] = w.history
    dump_json(d, _outdir(cfg) / "wave.json")


def cmd_stability(cfg: RunConfig) -> None:
    co = _abstract_coeffs(cfg)
    eps = stability.APPENDIX_EPS if cfg.eps is None else cfg.eps
    wave = stability.wave_family(co, cfg.kappa)
    smax = cfg.sigma_max if cfg.sigma_max is not None else 10 * eps
    sig = np.linspace(-smax, smax, cfg.grid_n or 201)
    out = _outdir(cfg)
    for model in ("truncated", "hyperbolic"):
        br = stability.track_branches(co, wave, eps, sig, model)
        rows = [[s, *np.ravel(np.column_stack([br[j].real, br[j].imag]))] for j, s in enumerate(sig)]
        header = ["sigma"] + [f"{p}_l{j + 1}" for j in range(br.shape[1]) for p in ("re", "im")]
        write_csv(out / f"dispersion_{model}.csv", header, rows)
    report = {"kappa": cfg.kappa, "eps": eps, "wave": {"alpha": wave.alpha, "omega": wave.omega}}
    try:
        ne = stability.neutral_expansion(co, wave, eps)
        report["expansion"] = {"lam_t": ne.lam_t, "lam_c": ne.lam_c, "mu_t_leading": ne.mu_t_leading,
                               "mu_c_leading_printed": ne.mu_c_leading, "semisimple": ne.semisimple}
    except stability.StabilityError as exc:
        report["expansion"] = {"error": type(exc).__name__, "message": str(exc)}
    try:
        C2, kp, kc = stability.darcy_expansion(co, kappa=cfg.kappa)
        report["darcy"] = {"C2": C2, "kappaS2_printed": kp, "kappaS2_curvature": kc}
    except stability.StabilityError as exc:
        report["darcy"] = {"error": type(exc).__name__}
    report["balance"] = stability.balance_check(co, wave, eps)
    dump_json(report, out / "expansion.json")


def _scan_case(co, eps, rho, n_kappa, n_sigma, out: Path, stem: str, title: str):
    kE = np.sqrt(co.b_eff.real / co.a.real)
    kap = np.linspace(-0.9 * kE, 0.9 * kE, n_kappa)
    S = stability.scan_S(co, eps, rho, kap, n_sigma=n_sigma)
    SD = stability.scan_SD(co, kap, n_sigma=n_sigma)
    write_csv(out / f"{stem}.csv", ["kappa", "S", "S_D"], np.column_stack([kap, S[:, 1], SD[:, 1]]))
    line_plot([("S (hyperbolic)", kap, S[:, 1]), ("S_D (Darcy)", kap, SD[:, 1])], out / f"{stem}.svg",
              title=title, xlabel="kappa", ylabel="max Re lambda")
    return kap, S[:, 1], SD[:, 1]


def cmd_scan(cfg: RunConfig) -> None:
    co = _abstract_coeffs(cfg)
    eps = stability.APPENDIX_EPS if cfg.eps is None else cfg.eps
    rho = 10 * eps if cfg.rho is None else cfg.rho
    _scan_case(co, eps, rho, cfg.grid_n or 73, 401, _outdir(cfg), "scan", "stability diagram")


def cmd_simulate(cfg: RunConfig) -> None:
    co = _abstract_coeffs(cfg)
    eps = stability.APPENDIX_EPS if cfg.eps is None else cfg.eps
    wave = stability.wave_family(co, cfg.kappa)
    N = cfg.grid_n or 256
    L = 2 * np.pi / 0.05
    base = ampsim.exponential_state(co, wave, L, N, eps, "hyperbolic")
    rng = np.random.default_rng(cfg.seed)
    noise = 1e-3 * (rng.standard_normal(N) + 1j * rng.standard_normal(N))
    noise = np.fft.ifft(np.fft.fft(noise) * (np.abs(base.wavenumbers) <= 1.0))
    st = ampsim.FieldState(L, N, base.A + noise, base.B, 0.0, eps, "hyperbolic", co)
    tr = ampsim.simulate(st, cfg.t_final or 1.0, cfg.dt or 1e-3)
    tr.to_csv(_outdir(cfg) / "trajectory.csv")


def cmd_bloch(cfg: RunConfig) -> None:
    from .pdecheck import bloch_matrix, newton_wave, spectral_match

    prob = _problem(cfg)
    eps = 0.05 if cfg.eps is None else cfg.eps
    w = newton_wave(prob, eps, cfg.kappa, M=32)
    smax = eps**2 if cfg.sigma_max is None else cfg.sigma_max
    sig = np.linspace(-smax, smax, cfg.grid_n or 21)
    rep = spectral_match(prob, w, sig)
    out = _outdir(cfg)
    dump_json(rep.to_dict(), out / "bloch_match.json")
    rows = []
    for s in sig:
        ev = np.sort_complex(bloch_matrix(prob, w, s).near_zero)
        rows.append([s, *np.ravel(np.column_stack([ev.real, ev.imag]))])
    m = (len(rows[0]) - 1) // 2
    write_csv(out / "bloch.csv", ["sigma"] + [f"{p}_lambda_{j + 1}" for j in range(m) for p in ("re", "im")], rows)


def cmd_appendix_b(cfg: RunConfig) -> None:
    eps = stability.APPENDIX_EPS if cfg.eps is None else cfg.eps
    rho = 10 * eps if cfg.rho is None else cfg.rho
    out = _outdir(cfg)
    cases = list(stability.APPENDIX_TABLE_CASES) + list(stability.APPENDIX_GENERIC_CASES)
    for j, (c, d) in enumerate(cases):
        co = stability.appendix_coeffs(c, d)
        _scan_case(co, eps, rho, cfg.grid_n or 73, 401, out, f"case{j + 1}", f"c={c}, d={d}")
    table = stability.sign_table(eps)
    lines = ["c_re,c_im,d_re,d_im,sign_mu_t,sign_mu_c,expected_mu_t,expected_mu_c"]
    for (c, d), (st, sc) in table.items():
        et, ec = stability.APPENDIX_TABLE_CASES[(c, d)]
        lines.append(f"{c.real:.6f},{c.imag:.6f},{d.real:.6f},{d.imag:.6f},{st:+d},{sc:+d},{et:+d},{ec:+d}")
    (out / "sign_table.csv").write_text("\n".join(lines) + "\n")
    grid = {"rows": "Re d (sign of mu_c)", "cols": "Im c (sign of mu_t)",
            "table": [[f"{c}|{d}", table[(c, d)]] for (c, d) in table]}
    dump_json(grid, out / "sign_table.json")


HANDLERS = {
    "analyze": cmd_analyze,
    "coeffs": cmd_coeffs,
    "wave": cmd_wave,
    "stability": cmd_stability,
    "scan": cmd_scan,
    "simulate": cmd_simulate,
    "bloch": cmd_bloch,
    "appendix-b": cmd_appendix_b,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="turingcl", description=__doc__)
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--model", dest="model_path")
    ap.add_argument("--out", dest="output_dir", default="out")
    ap.add_argument("--eps", type=float)
    ap.add_argument("--kappa", type=float, default=0.0)
    ap.add_argument("--rho", type=float)
    ap.add_argument("--sigma-max", type=float)
    ap.add_argument("--grid-n", type=int)
    ap.add_argument("--dt", type=float)
    ap.add_argument("--t-final", type=float)
    ap.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE")
    ap.add_argument("--seed", type=int, default=0)
    return ap


def run(cfg: RunConfig) -> int:
    try:
        HANDLERS[cfg.command](cfg)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 1
    except SpectralError as exc:
        print(f"numerical failure [{type(exc).__name__}]: {exc}", file=sys.stderr)
        return 2
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = RunConfig(**vars(args))
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())

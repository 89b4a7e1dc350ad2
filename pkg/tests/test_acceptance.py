"""Acceptance criteria, one test per criterion; each prints a PASS/FAIL line.

Sub-items that cannot be met as stated are separate strict xfails so their
FAIL line stays visible without breaking the suite.
"""

import dataclasses

import numpy as np
import pytest

from turingcl import ampsim as S
from turingcl import pdecheck as P
from turingcl.amplitude import residual_oracle
from turingcl.cli import main
from turingcl.spectral import kernel_projection, mean_diffusion, solve_example_family, spectral_curvature
from turingcl.stability import (
    APPENDIX_TABLE_CASES, appendix_coeffs, branch_derivatives, max_growth, neutral_expansion, scan_S, scan_SD,
    sign_table, wave_family,
)

from test_properties import curvature_fd, random_instance


@pytest.fixture
def emit(capsys):
    def _emit(label, checks):
        ok = all(v for _, v in checks)
        failed = [name for name, v in checks if not v]
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} {label}" + ("" if ok else f"  [failed: {', '.join(failed)}]"))
        assert ok, failed
    return _emit


def test_ac1_example_regression(example, emit):
    c1, c2, ks, dmu = solve_example_family()
    c = example.crit
    emit("AC1 example-model regression (lam tilde sign reported separately)", [
        ("c1", abs(c1 - 10.5558) < 1e-3),
        ("c2", abs(c2 - 1.2247) < 1e-3),
        ("k*", abs(ks - 0.7598) < 1e-3),
        ("|lam|", abs(abs(c.lam) - 1.0746) < 1e-3 and abs(c.lam.real) < 1e-3),
        ("lam_mu", abs(c.lam_mu - (0.0661 - 0.0710j)) < 1e-3),
        ("lam_k", abs(c.lam_k - (-2.2689j)) < 1e-3),
        ("lam_kk", abs(c.lam_kk - (-1.3292 - 1.4717j)) < 1e-3),
        ("delta_mu", abs(dmu / 1.18e6 - 1) < 0.05),
    ])


@pytest.mark.xfail(strict=True, reason="printed lam tilde has the opposite sign of Im; see ledger")
def test_ac1_lam_tilde_printed_sign(example, emit):
    emit(f"AC1 lam tilde = +1.0746i (computed {example.crit.lam:.5f})",
         [("lam", abs(example.crit.lam - 1.0746j) < 1e-3)])


def test_ac2_mean_structure(example, emit):
    sym = example.sym
    P0 = kernel_projection(sym, 0.0)
    block = (P0 @ sym.dk(0.0, 0.0, 2) @ P0)
    D = mean_diffusion(sym, P0, correction=False)[0, 0]
    emit("AC2 Pi0 S_kk Pi0 and mean diffusion (printed N1 reported separately)", [
        ("Pi0 S_kk Pi0", np.array_equal(block, np.array([[-4, 0], [0, 0]], dtype=block.dtype))),
        ("D", float(np.real(D)) == 2.0 and float(example.co.D_mat[0, 0]) == 2.0),
    ])


@pytest.mark.xfail(strict=True, reason="printed N1 constant not reproduced by the reduced inverse; see ledger")
def test_ac2_printed_N1(example, emit):
    v = (np.eye(2) - example.psi.P1) @ np.array([1.0, 0.3])
    s = ((example.psi.N1 @ v) / v)[0]
    target = 1 / (-3.0394 + 2.0052j)
    emit(f"AC2 N1 = 1/(-3.0394+2.0052i) (computed 1/({1 / s:.4f}))", [("N1", abs(s - target) < 1e-3)])


def test_ac3_spectral_identity(example, emit):
    c, sym = example.crit, example.sym
    M0 = sym(c.k_star) - c.lam * np.eye(2)
    val = spectral_curvature(M0, sym.dk(c.k_star, 0, 1), 0.5 * sym.dk(c.k_star, 0, 2), c.r_vec, c.l_vec)
    base0 = sym(c.k_star)
    S1, S2 = sym.dk(c.k_star, 0, 1), 0.5 * sym.dk(c.k_star, 0, 2)
    fd = curvature_fd(base0, S1, S2, c.lam)
    checks = [("example", abs(val - fd) < 1e-5 * abs(val))]
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(20):
        A0, A1, A2, lam = random_instance(rng)
        w, V = np.linalg.eig(A0)
        j = int(np.argmin(abs(w - lam)))
        got = spectral_curvature(A0 - lam * np.eye(3), A1, A2, V[:, j], np.linalg.inv(V)[j])
        worst = max(worst, abs(got - curvature_fd(A0, A1, A2, lam)) / max(1.0, abs(got)))
    checks.append(("random", worst < 1e-5))
    emit(f"AC3 spectral curvature vs finite differences (random worst {worst:.1e})", checks)


def test_ac4_residual_oracle(example, emit):
    eps = [0.1, 0.05, 0.025]
    good = residual_oracle(example.sym, example.spec, example.crit, example.co, example.psi, eps)
    bad = residual_oracle(example.sym, example.spec, example.crit,
                          dataclasses.replace(example.co, gamma=2 * example.co.gamma), example.psi, eps)
    emit(f"AC4 residual slope {good.slope1:.2f}, doubled gamma {bad.slope1:.2f}",
         [("slope", good.slope1 >= 2.7), ("mutation", bad.slope1 < 2.5)])


def test_ac5_sign_table(emit):
    table = sign_table()
    emit("AC5 appendix sign table", [(f"{k}", table[k] == v) for k, v in APPENDIX_TABLE_CASES.items()])


def test_ac6_stability_diagrams(emit):
    eps = 1e-2
    kg = np.linspace(-0.9, 0.9, 73)  # kappa_E = 1 for all appendix cases
    S1 = scan_S(appendix_coeffs(-3 + 3j, 1 - 1j), eps, 10 * eps, kg)
    checks = [("unstable everywhere", bool(np.all(S1[:, 1] > 1e-10)))]
    co = appendix_coeffs(-3 + 2j, -1 + 2j / 3)
    S2 = scan_S(co, eps, 10 * eps, kg)
    stable = S2[:, 1] <= 1e-10
    checks.append(("stable band", bool(stable.any())))
    necessary = True
    for (c, d) in list(APPENDIX_TABLE_CASES):
        cc = appendix_coeffs(c, d)
        Sv = scan_S(cc, eps, 10 * eps, kg)[:, 1]
        SD = scan_SD(cc, kg)[:, 1]
        necessary &= bool(np.all(SD[Sv <= 1e-10] <= 1e-10))
    checks.append(("Darcy necessary", necessary))
    emit(f"AC6 stability diagrams ({int(stable.sum())} stable kappa samples)", checks)


def test_ac7_expansion_vs_eigenvalues(emit):
    eps = 1e-2
    worst = 0.0
    for case in APPENDIX_TABLE_CASES:
        co = appendix_coeffs(*case)
        w = wave_family(co, 0.5)
        ne = neutral_expansion(co, w, eps)
        l0, d1, d2 = branch_derivatives(co, w, eps, 1e-4 * eps)
        for first, second in (ne.lam_t, ne.lam_c):
            j = int(np.argmin(abs(l0) + abs(d1 - first)))
            worst = max(worst, abs(d1[j] / first - 1), abs(0.5 * d2[j] / second - 1))
    emit(f"AC7 Kato coefficients vs continued eigenvalues (worst rel {worst:.1e}; printed mu_c separately)",
         [("rel 5%", worst < 0.05)])


@pytest.mark.xfail(strict=True, reason="printed mu_c closed form misses a factor 1/A0; see ledger")
def test_ac7_printed_mu_c(emit):
    ratios = []
    for case in APPENDIX_TABLE_CASES:
        co = appendix_coeffs(*case)
        ne = neutral_expansion(co, wave_family(co, 0.5), 1e-3)
        ratios.append(ne.lam_c[1].real / ne.mu_c_leading)
    emit(f"AC7 mu_c printed closed form at eps=1e-3 (ratios {np.round(ratios, 4).tolist()})",
         [("1%", all(abs(r - 1) < 0.01 for r in ratios))])


def test_ac8_solver(emit):
    eps = 1e-2
    L = 2 * np.pi / 0.05
    co = appendix_coeffs(-3 + 3j, 1 - 1j)
    w = wave_family(co, 0.3)
    st = S.exponential_state(co, w, L, 256, eps, "hyperbolic")
    fin = S.simulate(st, 1.0, 1e-3, stride=1000).final
    exp_err = np.max(np.abs(fin.A - w.alpha * np.exp(1j * (w.kappa * st.x - w.omega)))) / w.alpha

    c3 = co.with_overrides(e_B=[[0.3]])
    Lm = 20.0
    ms = S.grid_state(c3, Lm, 128, lambda x: 0.3 * np.exp(2j * np.pi * x / Lm) * (1 + 0.2 * np.cos(4 * np.pi * x / Lm)),
                      lambda x: 0.1 + 0.2 * np.cos(2 * np.pi * x / Lm), eps=eps, model="truncated")
    tr = S.simulate(ms, 1.0, 1e-4, stride=1000)
    drift = max(abs(r["mass_B"][0] - ms.B.mean()) for r in tr.records)

    from test_ampsim import rescaled_energy_run
    E = rescaled_energy_run(-3 + 3j)

    signs = []
    for case, kap, sgn in [((-3 + 3j, 1 - 1j), 0.0, 1), ((-3 + 3j, 1 - 1j), 0.3, 1),
                           ((-3 + 2j, -1 + 2j / 3), 0.0, -1), ((-3 + 2j, -1 + 2j / 3), 0.1, -1)]:
        cc = appendix_coeffs(*case)
        Sv = scan_S(cc, eps, 10 * eps, [kap])[0, 1]
        rate = S.perturbation_growth(cc, wave_family(cc, kap), eps, L, 256, 2.0, 2e-3)["rate"]
        signs.append((Sv > 1e-10) == (rate > 0) == (sgn > 0))
    emit(f"AC8 solver (exp err {exp_err:.1e}, mass drift {drift:.1e}, max E {E.max():.3f})", [
        ("exponential", exp_err < 1e-6),
        ("mass", drift < 1e-12),
        ("energy", E.max() <= 1.0 and abs(E[0] - 0.5) < 1e-10),
        ("growth signs", all(signs)),
    ])


def test_ac9_bloch(example, waves, emit):
    prob = example.problem
    eps = 0.05
    w = waves[eps]
    sample = P.bloch_matrix(prob, w, 0.0)
    target = 2 * eps**2 * P.wave_alpha(prob, w) ** 2 * prob.coeffs.gamma.real
    small = sample.near_zero[np.abs(sample.near_zero) > 1e-8]
    stable = small[np.argmin(abs(small - target))]
    reps = [P.spectral_match(prob, waves[e], np.linspace(-e**2, e**2, 11)) for e in (0.05, 0.025)]
    w16 = P.newton_wave(prob, eps, M=16, tol=1e-14)
    trunc = max(np.max(np.abs(np.sort_complex(P.bloch_matrix(prob, w16, s).near_zero)
                              - np.sort_complex(P.bloch_matrix(prob, w, s).near_zero))) for s in (0.0, 0.001, 0.0025))
    real = max(np.max(np.abs(np.sort_complex(P.bloch_matrix(prob, w, s).near_zero)
                             - np.sort_complex(P.bloch_matrix(prob, w, -s).near_zero.conj()))) for s in (0.001, 0.0025))
    h = w.history
    quad = len(h) >= 3 and all(h[i + 1] <= 10 * h[i] ** 2 / h[0] + 1e-16 for i in range(len(h) - 3, len(h) - 1))
    emit(f"AC9 Bloch ground truth (mismatch/eps^2 {reps[0].max_scaled_mismatch:.2e} -> "
         f"{reps[1].max_scaled_mismatch:.2e}, stable {stable.real:.3e} vs {target:.3e})", [
        ("two zeros", P.count_zero_eigenvalues(sample) == 2),
        ("stable eigenvalue 15%", abs(stable - target) < 0.15 * abs(target)),
        ("mismatch decreases", reps[1].max_scaled_mismatch < reps[0].max_scaled_mismatch),
        ("reality", real < 1e-10),
        ("truncation", trunc < 1e-9),
        ("newton quadratic", quad),
    ])


def test_ac10_determinism(tmp_path, emit):
    outs = []
    for name in ("a", "b"):
        d = tmp_path / name
        main(["simulate", "--out", str(d), "--seed", "11", "--t-final", "0.05", "--grid-n", "64"])
        main(["scan", "--out", str(d), "--grid-n", "9"])
        outs.append(((d / "trajectory.csv").read_bytes(), (d / "scan.csv").read_bytes()))
    emit("AC10 determinism", [("trajectory", outs[0][0] == outs[1][0]), ("scan", outs[0][1] == outs[1][1])])

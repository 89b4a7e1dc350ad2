import dataclasses

import numpy as np
import pytest

from turingcl.amplitude import (
    AmplitudeError, NonlinearitySpec, SingularF, SlopeTooShallow, amplitude_coefficients, darcy_reduce,
    multiplier_C, multiplier_Q, multiplier_Qnu, residual_oracle,
)
from turingcl.stability import appendix_coeffs

EPS = [0.1, 0.05, 0.025]


def close(x, y, tol=1e-8):
    return np.allclose(np.asarray(x, complex), np.asarray(y, complex), atol=tol, rtol=0)


def test_example_cgl_coefficients(example):
    co = example.co
    assert close(co.a, 0.66461167 + 0.73585147j)
    assert close(co.a, -0.5 * example.crit.lam_kk, 1e-14)
    assert close(co.b, example.crit.lam_mu, 1e-14)
    assert close(co.gamma, -0.022084168747 - 0.007596582611j, 1e-10)
    assert close(co.V1, [0.4947174195509961j], 1e-12)


def test_example_mean_coefficients(example):
    co = example.co
    assert close(co.D_mat, [[2.0]], 1e-14)
    assert close(co.F_mat, [[2.268877913759776]], 1e-12)
    assert close(co.H_vec, [0.0040775790978973], 1e-12)
    assert close(co.W0, [0.030435464730467], 1e-12)
    assert close(co.v_vec, [-0.00073893072 + 0.00068765252j], 1e-10)
    assert close(co.extras["V0"], [0.0300659994], 1e-9)
    assert not co.compat_F and not co.compat_H


def test_example_speed_coefficient_is_group_velocity(example):
    # F equals d* + delta = -Im lam_k for the example
    assert abs(example.co.F_mat[0, 0] + example.crit.lam_k.imag) < 1e-12


def test_example_psi(example):
    p = example.psi
    assert close(p.psi0_coeff, [0, 0.03043546])
    assert close(p.psi1_coeff, [0.01576664 - 0.00113492j, 0.05490023 - 0.05899414j])
    assert close(p.psi2_coeff, [-0.0057275 + 0.00535114j, 0.00379893 - 0.01583967j])


def test_example_darcy(example):
    co = example.co
    assert close(co.darcy_ctilde, -0.0220841687 - 0.0084856782j, 1e-9)
    assert close(co.darcy_deltaA, -0.00088909562j, 1e-10)
    # deltaA = -V1 H / F
    assert close(co.darcy_deltaA, -co.V1[0] * co.H_vec[0] / co.F_mat[0, 0], 1e-15)


def test_psi_equations(example):
    sym, crit, p = example.sym, example.crit, example.psi
    ks, r = crit.k_star, crit.r_vec
    shift = 1j * crit.d_star * ks
    Q2 = multiplier_Q(example.spec, ks, ks, outer=True)(r, r)
    lhs = (sym(2 * ks) + 2 * shift * np.eye(2)) @ p.psi2_coeff
    assert np.linalg.norm(lhs + 0.5 * Q2) < 1e-12
    # psi1 solves the detuned equation on the complement of r
    res = (sym(ks) + shift * np.eye(2)) @ p.psi1_coeff - (np.eye(2) - p.P1) @ (sym.dk(ks, 0, 1) @ r)
    assert np.linalg.norm(res) < 1e-12
    assert abs(crit.l_vec @ p.psi1_coeff) < 1e-12


def test_N1_scalar(example):
    v = (np.eye(2) - example.psi.P1) @ np.array([1.0, 0.3])
    s = (example.psi.N1 @ v) / v
    assert abs(s[0] - s[1]) < 1e-12
    assert close(s[0], -0.16193214 - 0.15069483j, 1e-7)


def test_Q_symmetry_and_reality(example, rng):
    spec = example.spec
    for _ in range(10):
        z1, z2 = rng.normal(size=2)
        u = rng.normal(size=2) + 1j * rng.normal(size=2)
        w = rng.normal(size=2) + 1j * rng.normal(size=2)
        Q = multiplier_Q(spec, z1, z2)
        assert np.allclose(Q(u, w), multiplier_Q(spec, z2, z1)(w, u), atol=1e-13)
        assert np.allclose(np.conj(Q(u, w)), multiplier_Q(spec, -z1, -z2)(u.conj(), w.conj()), atol=1e-13)
        C = multiplier_C(spec, z1, z2, 0.3)
        assert np.allclose(C(u, w, u), multiplier_C(spec, z2, 0.3, z1)(w, u, u), atol=1e-13)


def test_Qnu_matches_fd(example, rng):
    spec, h = example.spec, 1e-6
    for _ in range(5):
        z1, z2 = rng.normal(size=2)
        u = rng.normal(size=2) + 1j * rng.normal(size=2)
        w = rng.normal(size=2) + 1j * rng.normal(size=2)
        fd = (multiplier_Q(spec, z1 + h, z2)(u, w) - multiplier_Q(spec, z1 - h, z2)(u, w)) / (2 * h)
        assert np.allclose(-1j * fd, multiplier_Qnu(spec, z1, z2)(u, w), atol=1e-7)


def test_evaluate_single_mode_matches_multipliers(example):
    spec, k = example.spec, 0.9
    Ng = 16
    u = np.array([0.3 + 0.1j, -0.2 + 0.4j])
    U = np.zeros((2, Ng), complex)
    U[:, 1], U[:, -1] = u, u.conj()
    out = spec.evaluate(U, k)
    Q = multiplier_Q(spec, k, k, outer=True)(u, u)
    assert np.allclose(out[:, 2], Q, atol=1e-13)


def test_gauge_invariance(example):
    chi = 0.7
    crit = dataclasses.replace(example.crit, r_vec=example.crit.r_vec * np.exp(1j * chi),
                               l_vec=example.crit.l_vec * np.exp(-1j * chi))
    co, _ = amplitude_coefficients(example.sym, crit, example.spec)
    for name in ("gamma", "V1", "F_mat", "H_vec", "W0", "v_vec"):
        assert close(getattr(co, name), getattr(example.co, name), 1e-12), name


def test_real_rescaling_scales_cubic(example):
    s = 1.7
    crit = dataclasses.replace(example.crit, r_vec=example.crit.r_vec * s, l_vec=example.crit.l_vec / s)
    co, _ = amplitude_coefficients(example.sym, crit, example.spec)
    assert close(co.gamma, s**2 * example.co.gamma, 1e-12)
    assert close(co.H_vec, s**2 * example.co.H_vec, 1e-12)


def test_swift_hohenberg_coefficients(sh):
    co = sh.co
    assert close(co.a, 4, 1e-8) and close(co.b, 1, 1e-10)
    assert close(co.gamma, 1 / 18 - 0.75, 1e-6)
    assert close(co.V1, [-2], 1e-8)
    assert close(co.D_mat, [[1]], 1e-10)
    assert close(co.F_mat, [[0]], 1e-12) and close(co.H_vec, [0], 1e-12) and close(co.W0, [0], 1e-12)
    assert close(co.v_vec, [1], 1e-8)
    assert close(co.extras["V0"], [0.5], 1e-8)
    assert co.compat_F and co.compat_H
    assert co.darcy_ctilde is None


def test_swift_hohenberg_darcy_undefined(sh):
    with pytest.raises(SingularF):
        darcy_reduce(sh.co)


def test_appendix_ctilde_closed_forms():
    assert abs(appendix_coeffs(-3 + 3j, 1 - 1j).ctilde - (-5 + 5j)) < 1e-14
    assert abs(appendix_coeffs(-3 + 2j, 1 - 2j / 3).ctilde - (-5 + 10j / 3)) < 1e-14


def test_residual_oracle_slope(example):
    r = residual_oracle(example.sym, example.spec, example.crit, example.co, example.psi, EPS, min_slope=2.7)
    assert r.slope1 >= 2.7
    assert np.all(r.mode0 < 1e-12)


def test_residual_oracle_detuned_family(example):
    r = residual_oracle(example.sym, example.spec, example.crit, example.co, example.psi, EPS,
                        kappa=0.3, beta=[0.2])
    assert r.slope1 >= 2.7


def test_residual_oracle_mutation(example):
    bad = dataclasses.replace(example.co, gamma=2 * example.co.gamma)
    with pytest.raises(SlopeTooShallow):
        residual_oracle(example.sym, example.spec, example.crit, bad, example.psi, EPS, min_slope=2.7)
    r = residual_oracle(example.sym, example.spec, example.crit, bad, example.psi, EPS)
    assert r.slope1 < 2.5


def test_residual_oracle_zero_amplitude(example):
    r = residual_oracle(example.sym, example.spec, example.crit, example.co, example.psi, EPS, alpha=0.0)
    assert np.all(r.mode1 == 0) and np.all(r.mode0 == 0)


def test_subcritical_rejected(example):
    bad = dataclasses.replace(example.co, gamma=-example.co.gamma)
    with pytest.raises(AmplitudeError):
        residual_oracle(example.sym, example.spec, example.crit, bad, example.psi, EPS)


def test_spec_validation():
    with pytest.raises(ValueError):
        NonlinearitySpec.from_dict({"rows": [[{"coeff": 1.0, "factors": [[0, 0]]}]], "conserved_outer": [False]})
    with pytest.raises(ValueError):
        NonlinearitySpec.from_dict({"rows": [[{"coeff": 1.0, "factors": [[3, 0], [0, 0]]}]]})
    spec = NonlinearitySpec.from_dict({"rows": [[{"coeff": 2.0, "factors": [[0, 1], [0, 0]]}]]})
    assert NonlinearitySpec.from_dict(spec.to_dict()) == spec


def test_example_convection_coefficient_closed_form(example):
    # H = |r_1|^2 / 4 for the example, with l normalised so its last entry is 1
    assert abs(example.crit.l_vec[1] - 1) < 1e-14
    assert abs(example.co.H_vec[0] - abs(example.crit.r_vec[0]) ** 2 / 4) < 1e-15


def test_example_psi0_closed_form(example):
    r2 = example.crit.r_vec[1]
    assert np.allclose(example.psi.psi0_coeff, [0, abs(r2) ** 2 / 4], atol=1e-15)


def test_example_quadratic_row(example, rng):
    x = rng.normal(size=2) + 1j * rng.normal(size=2)
    y = rng.normal(size=2) + 1j * rng.normal(size=2)
    assert abs(multiplier_Q(example.spec, 0.3, -1.1)(x, y)[1] - 0.5 * x[1] * y[1]) < 1e-15


def test_sign_conditions(example, sh):
    for b in (example, sh):
        assert b.co.a.real > 0 and b.co.b.real > 0


def test_o2_coefficients_real(sh):
    co = sh.co
    for z in (co.a, co.b, co.gamma, *np.atleast_1d(co.V1), *np.atleast_1d(co.W0), *np.atleast_1d(co.v_vec)):
        assert abs(np.imag(z)) < 1e-10
    assert np.allclose(np.real(sh.psi.psi1_coeff), 0)

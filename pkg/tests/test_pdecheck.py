import numpy as np
import pytest

from turingcl import pdecheck as P


@pytest.fixture(scope="module")
def prob(example):
    return example.problem


def sigma_grid(eps, n=11):
    return np.linspace(-eps**2, eps**2, n)


def test_newton_quadratic(prob, waves):
    h = waves[0.05].history
    assert h[-1] < 1e-14 and len(h) <= 4
    # each step roughly squares the residual
    for r0, r1 in zip(h, h[1:]):
        assert r1 < 10 * r0**2 / h[0] + 1e-16


def test_wave_amplitude_matches_prediction(prob, waves):
    errs = []
    for eps in (0.05, 0.025):
        w = waves[eps]
        errs.append(abs(P.wave_alpha(prob, w) - w.alpha_predicted) / w.alpha_predicted)
    assert errs[0] < 1e-3
    assert np.log2(errs[0] / errs[1]) > 1.5


def test_wave_speed_near_critical(prob, waves):
    for eps, w in waves.items():
        assert abs(w.d - prob.crit.d_star) < 5 * eps**2


def test_conserved_mode_residual(prob, waves):
    w = waves[0.05]
    assert P.conserved_mode0_residual(prob, w.modes, w.d, w.k, w.mu) < 1e-14


def test_translation_mode(prob, waves):
    assert P.translation_residual(prob, waves[0.05]) < 1e-12


def test_coperiodic_spectrum(prob, waves):
    eps = 0.05
    w = waves[eps]
    sample = P.bloch_matrix(prob, w, 0.0)
    assert P.count_zero_eigenvalues(sample) == 2
    target = 2 * eps**2 * P.wave_alpha(prob, w) ** 2 * prob.coeffs.gamma.real
    small = sample.near_zero[np.abs(sample.near_zero) > 1e-8]
    j = np.argmin(abs(small - target))
    assert abs(small[j] - target) < 0.15 * abs(target)
    assert abs(small[j].imag) < 1e-10


def test_truncation_convergence(prob, waves):
    w16 = P.newton_wave(prob, 0.05, M=16, tol=1e-14)
    w32 = waves[0.05]
    for s in (0.0, 0.001, 0.0025):
        a = np.sort_complex(P.bloch_matrix(prob, w16, s).near_zero)
        b = np.sort_complex(P.bloch_matrix(prob, w32, s).near_zero)
        assert np.max(np.abs(a - b)) < 1e-9


def test_reality_symmetry(prob, waves):
    w = waves[0.05]
    for s in (0.001, 0.0025):
        b = np.sort_complex(P.bloch_matrix(prob, w, s).near_zero)
        c = np.sort_complex(P.bloch_matrix(prob, w, -s).near_zero.conj())
        assert np.max(np.abs(b - c)) < 1e-11


def test_spectral_match_improves(prob, waves):
    reps = [P.spectral_match(prob, waves[e], sigma_grid(e)) for e in (0.05, 0.025)]
    assert reps[0].max_scaled_mismatch < 1e-3
    assert reps[1].max_scaled_mismatch < reps[0].max_scaled_mismatch
    assert reps[0].sigma0_relative < 5e-3
    d = reps[0].to_dict()
    assert set(d) >= {"eps", "max_scaled_mismatch", "sigma0_relative"}


def test_far_spectrum_stable(prob, waves):
    assert P.far_spectrum_growth(prob, waves[0.05], 0.01) < 0


def test_frame_speed_matches_fd(prob, waves):
    eps, kt = 0.05, 0.2
    fd = P.frame_speed_fd(prob, eps, kt)
    k = prob.crit.k_star + eps * kt
    assert abs(fd - k * (prob.crit.d_star + prob.crit.delta)) < 1e-3
    assert abs(P.frame_speed(prob, waves[eps]) + prob.crit.k_star * prob.crit.lam_k.imag) < 1e-12


def test_speed_depends_smoothly_on_mean(prob):
    b = 0.05
    wp = P.newton_wave(prob, 0.05, beta=[b], M=16)
    wm = P.newton_wave(prob, 0.05, beta=[-b], M=16)
    w0 = P.newton_wave(prob, 0.05, beta=[0.0], M=16)
    slope = (wp.d - wm.d) / (2 * b)
    assert np.isfinite(slope)
    # centred difference consistent with one-sided ones
    assert abs((wp.d - w0.d) / b - slope) < 0.1 * max(abs(slope), 1e-3) + 1e-3


def test_detuned_wave_first_order_error(prob):
    # detuned waves carry an O(eps) amplitude correction; halving eps halves it
    errs = []
    for eps in (0.05, 0.025):
        w = P.newton_wave(prob, eps, 0.3, M=16)
        assert w.history[-1] < 1e-12
        errs.append(abs(P.wave_alpha(prob, w) - w.alpha_predicted) / w.alpha_predicted)
    assert 0.9 < np.log2(errs[0] / errs[1]) < 1.1


def test_predictor_outside_band(prob):
    with pytest.raises(P.PDECheckError):
        P.newton_wave(prob, 0.05, kappa_tilde=10.0, M=16)


def test_wave_serialisation(waves):
    d = waves[0.05].to_dict()
    assert d["M"] == 32 and len(d["modes"]) == 65


def test_wave_norm_scaling_and_leading_mode(prob, waves):
    norms = {e: np.linalg.norm(w.modes) for e, w in waves.items()}
    assert 0.9 < np.log2(norms[0.05] / norms[0.025]) < 1.1
    dev = {}
    for e, w in waves.items():
        lead = 0.5 * e * w.alpha_predicted * prob.crit.r_vec
        dev[e] = np.linalg.norm(w.mode(1) - lead)
    # the leading-mode defect is at least O(eps^2); at kappa_tilde = 0 it is O(eps^3)
    assert np.log2(dev[0.05] / dev[0.025]) > 1.9


def test_mean_constraint(prob):
    w = P.newton_wave(prob, 0.05, beta=[0.3], M=16)
    E = np.array([1.0, 0.0])
    assert abs(E @ w.mode(0).real - 0.05**2 * 0.3) < 1e-12

"""Full-PDE checks: periodic traveling waves by Newton and their Bloch spectra.

Waves solve S(k eta, mu) U_eta + i d k eta U_eta + N(U)_eta = 0 on Fourier
modes |eta| <= M of a 2*pi-periodic profile, with k = k* + eps*kappa_tilde and
mu = eps^2.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .amplitude import AmplitudeCoeffs, AmplitudeError, NonlinearitySpec, PsiCorrections, _family_amplitude
from .spectral import CriticalData, FourierSymbol, SpectralError, conserved_basis
from .stability import ModelCoeffs, ReducedExampleData, build_M, wave_family


class PDECheckError(SpectralError):
    pass


class NewtonDiverged(PDECheckError):
    pass


class PredictorInvalid(PDECheckError):
    pass


class BranchMatchingFailed(PDECheckError):
    pass


@dataclass
class WaveProblem:
    """Everything needed to continue waves of one model."""

    sym: FourierSymbol
    spec: NonlinearitySpec
    crit: CriticalData
    coeffs: AmplitudeCoeffs
    psi: PsiCorrections

    @property
    def n(self) -> int:
        return self.sym.n


@dataclass
class TravelingWave:
    eps: float
    kappa_tilde: float
    beta: np.ndarray
    modes: np.ndarray  # shape (2M+1, n), index j <-> Fourier mode j - M
    d: float
    M: int
    residual_norm: float
    k: float
    mu: float
    history: list = field(default_factory=list)
    alpha_predicted: float = float("nan")

    def mode(self, eta: int) -> np.ndarray:
        return self.modes[eta + self.M]

    def to_dict(self) -> dict:
        from .io import encode

        return encode({"eps": self.eps, "kappa_tilde": self.kappa_tilde, "beta": self.beta, "d": self.d,
                       "M": self.M, "k": self.k, "mu": self.mu, "residual_norm": self.residual_norm,
                       "modes": self.modes})


@dataclass
class BlochSample:
    sigma: float
    matrix: np.ndarray
    eigenvalues: np.ndarray
    near_zero: np.ndarray


# ---------------------------------------------------------------------------
# residual and linearization on truncated Fourier series
# ---------------------------------------------------------------------------


def _grid_size(M: int) -> int:
    need = 4 * M + 2
    return 1 << int(np.ceil(np.log2(need)))


def _to_fft(modes: np.ndarray, Ng: int) -> np.ndarray:
    """(2M+1, n) centred modes -> (n, Ng) FFT-ordered coefficients."""
    M = (modes.shape[0] - 1) // 2
    out = np.zeros((modes.shape[1], Ng), dtype=complex)
    for j in range(-M, M + 1):
        out[:, j % Ng] = modes[j + M]
    return out


def _from_fft(Uh: np.ndarray, M: int) -> np.ndarray:
    Ng = Uh.shape[1]
    return np.array([Uh[:, j % Ng] for j in range(-M, M + 1)])


def wave_residual(prob: WaveProblem, modes: np.ndarray, d: float, k: float, mu: float) -> np.ndarray:
    """Residual modes (2M+1, n) of the traveling-wave equation."""
    M = (modes.shape[0] - 1) // 2
    Ng = _grid_size(M)
    Nh = _from_fft(prob.spec.evaluate(_to_fft(modes, Ng), k), M)
    R = np.empty_like(modes)
    for j, eta in enumerate(range(-M, M + 1)):
        R[j] = prob.sym(k * eta, mu) @ modes[j] + 1j * d * k * eta * modes[j] + Nh[j]
    return R


def _linearization(prob: WaveProblem, modes: np.ndarray, k: float, mu: float, d: float, sigma: float,
                   frame: float | None) -> np.ndarray:
    """Matrix of L(k,mu;sigma) + d k d_xi + i sigma C + DN(sigma) on modes -M..M.

    ``frame`` is C; if None the Bloch shift d k (d_xi + i sigma) is used instead.
    """
    n = prob.n
    M = (modes.shape[0] - 1) // 2
    size = 2 * M + 1
    Ng = _grid_size(M)
    fields = prob.spec.linearization_fields(_to_fft(modes, Ng), k)
    G = {key: np.fft.fft(val) / Ng for key, val in fields.items()}
    etas = np.arange(-M, M + 1)
    J = np.zeros((size * n, size * n), dtype=complex)
    for (p, i, a), gh in G.items():
        outer = (1j * k * (etas + sigma)) if prob.spec.conserved_outer[p] else np.ones(size)
        mult = (1j * k * (etas + sigma)) ** a
        # Toeplitz block: row eta, column nu, coefficient gh[eta - nu]
        diff = (etas[:, None] - etas[None, :]) % Ng
        block = gh[diff] * mult[None, :] * outer[:, None]
        J[p::n, i::n] += block
    for j, eta in enumerate(etas):
        sl = slice(j * n, (j + 1) * n)
        J[sl, sl] += prob.sym(k * (eta + sigma), mu)
        shift = 1j * d * k * eta + (1j * sigma * frame if frame is not None else 1j * d * k * sigma)
        J[sl, sl] += shift * np.eye(n)
    return J


# ---------------------------------------------------------------------------
# Newton continuation
# ---------------------------------------------------------------------------


def predictor(prob: WaveProblem, eps: float, kappa_tilde: float, beta, M: int):
    """Leading terms of the small-amplitude expansion as a Newton initial guess."""
    E, _ = conserved_basis(prob.psi.P0)
    beta = np.atleast_1d(np.asarray(beta, dtype=float))
    try:
        alpha, omega = _family_amplitude(prob.coeffs, kappa_tilde, beta)
    except AmplitudeError as exc:
        raise PredictorInvalid(str(exc)) from exc
    if alpha <= 0:
        raise PredictorInvalid("predicted amplitude is zero")
    crit, psi = prob.crit, prob.psi
    k = crit.k_star + eps * kappa_tilde
    modes = np.zeros((2 * M + 1, prob.n), dtype=complex)
    modes[M] = (eps**2 * (E @ beta + alpha**2 * psi.psi0_coeff)).real
    c1 = 0.5 * eps * alpha * crit.r_vec + 0.5 * eps**2 * (-kappa_tilde * alpha) * psi.psi1_coeff
    modes[M + 1], modes[M - 1] = c1, c1.conj()
    if M >= 2:
        c2 = 0.5 * eps**2 * alpha**2 * psi.psi2_coeff
        modes[M + 2], modes[M - 2] = c2, c2.conj()
    Om = crit.k_star * crit.d_star + eps * kappa_tilde * (crit.d_star + crit.delta) + eps**2 * omega
    # rotate so that l . mode_1 is real and positive
    ph = crit.l_vec @ modes[M + 1]
    rot = np.conj(ph) / abs(ph)
    for j in range(1, M + 1):
        modes[M + j] *= rot**j
        modes[M - j] = modes[M + j].conj()
    return modes, Om / k, alpha


class _Packer:
    """Real unknowns <-> centred complex modes of a real profile, plus d."""

    def __init__(self, n: int, M: int):
        self.n, self.M = n, M
        self.size = n + 2 * n * M + 1

    def pack(self, modes, d) -> np.ndarray:
        M = self.M
        pos = modes[M + 1:]
        return np.concatenate([modes[M].real, pos.real.ravel(), pos.imag.ravel(), [d]])

    def unpack(self, x):
        n, M = self.n, self.M
        m0 = x[:n]
        re = x[n:n + n * M].reshape(M, n)
        im = x[n + n * M:n + 2 * n * M].reshape(M, n)
        pos = re + 1j * im
        modes = np.concatenate([pos[::-1].conj(), m0[None, :].astype(complex), pos])
        return modes, float(x[-1])

    def basis_to_modes(self) -> np.ndarray:
        """Complex Jacobian of the flattened modes (eta-major) w.r.t. the real unknowns (without d)."""
        n, M = self.n, self.M
        size = 2 * M + 1
        T = np.zeros((size * n, self.size - 1), dtype=complex)
        for i in range(n):
            T[M * n + i, i] = 1.0
        for j in range(1, M + 1):
            for i in range(n):
                cr = n + (j - 1) * n + i
                ci = n + n * M + (j - 1) * n + i
                T[(M + j) * n + i, cr] = 1.0
                T[(M + j) * n + i, ci] = 1j
                T[(M - j) * n + i, cr] = 1.0
                T[(M - j) * n + i, ci] = -1j
        return T


def _equations(prob, R, modes, zc, el, beta, eps, M):
    """Stack the real equations: mode-0 complement rows, mean constraints, modes 1..M, phase."""
    r0 = R[M].real
    parts = [zc.T @ r0, el @ modes[M].real - eps**2 * beta]
    pos = R[M + 1:]
    parts += [pos.real.ravel(), pos.imag.ravel(), [np.imag(prob.crit.l_vec @ modes[M + 1])]]
    return np.concatenate(parts)


def newton_wave(prob: WaveProblem, eps: float, kappa_tilde: float = 0.0, beta=None, M: int = 32,
                tol: float = 1e-12, max_iter: int = 30) -> TravelingWave:
    """Continue the small-amplitude wave from the expansion predictor by Newton."""
    n = prob.n
    E, EL = conserved_basis(prob.psi.P0)
    r = E.shape[1]
    beta = np.zeros(r) if beta is None else np.atleast_1d(np.asarray(beta, dtype=float))
    # mode-0 residual lives in ker(EL); use an orthonormal basis of it
    _, _, vh = np.linalg.svd(EL)
    zc = vh[r:].T.conj().real
    k = prob.crit.k_star + eps * kappa_tilde
    mu = eps**2
    modes, d, alpha = predictor(prob, eps, kappa_tilde, beta, M)
    pk = _Packer(n, M)
    T = pk.basis_to_modes()
    x = pk.pack(modes, d)
    history = []
    for _ in range(max_iter):
        modes, d = pk.unpack(x)
        R = wave_residual(prob, modes, d, k, mu)
        F = _equations(prob, R, modes, zc, EL, beta, eps, M)
        res = float(np.max(np.abs(F)))
        history.append(res)
        if not np.isfinite(res) or res > 1e3:
            raise NewtonDiverged(f"residual {res:.3e}")
        if res < tol:
            break
        J = _linearization(prob, modes, k, mu, d, 0.0, frame=None)
        dR = J @ T  # d(flattened R)/d(real unknowns), complex
        etas = np.arange(-M, M + 1)
        dRdd = (1j * k * etas[:, None] * modes).ravel()
        full = np.concatenate([dR, dRdd[:, None]], axis=1)
        full = full.reshape(2 * M + 1, n, -1)
        rows = [zc.T @ full[M].real]
        mean_row = np.zeros((r, pk.size))
        mean_row[:, :n] = EL.real
        rows.append(mean_row)
        rows.append(full[M + 1:].real.reshape(M * n, -1))
        rows.append(full[M + 1:].imag.reshape(M * n, -1))
        ph = np.zeros((1, pk.size))
        l = prob.crit.l_vec
        ph[0, n:n + n] = np.imag(l)   # d Im(l.c)/d Re c
        ph[0, n + n * M:n + n * M + n] = np.real(l)
        rows.append(ph)
        Jr = np.vstack(rows)
        x = x - np.linalg.solve(Jr, F)
    else:
        raise NewtonDiverged(f"no convergence after {max_iter} iterations, residual {history[-1]:.3e}")
    modes, d = pk.unpack(x)
    R = wave_residual(prob, modes, d, k, mu)
    resn = float(np.max(np.abs(np.concatenate([(zc.T @ R[M].real), R[M + 1:].ravel()]))))
    return TravelingWave(float(eps), float(kappa_tilde), beta, modes, d, M, resn, k, mu, history, alpha)


def wave_alpha(prob: WaveProblem, wave: TravelingWave) -> float:
    """Amplitude read off the first mode: 2|l . mode_1| / eps."""
    return float(2 * abs(prob.crit.l_vec @ wave.mode(1)) / wave.eps)


def conserved_mode0_residual(prob: WaveProblem, modes: np.ndarray, d: float, k: float, mu: float) -> float:
    """Size of the conserved-row mean residual, identically zero by structure."""
    _, EL = conserved_basis(prob.psi.P0)
    M = (modes.shape[0] - 1) // 2
    R = wave_residual(prob, modes, d, k, mu)
    return float(np.max(np.abs(EL @ R[M])))


# ---------------------------------------------------------------------------
# Bloch spectra
# ---------------------------------------------------------------------------


def frame_speed(prob: WaveProblem, wave: TravelingWave) -> float:
    """C = k (d* + delta): the group-velocity frame of the Bloch operator."""
    return wave.k * (prob.crit.d_star + prob.crit.delta)


def frame_speed_fd(prob: WaveProblem, eps: float, kappa_tilde: float, h: float = 1e-3, M: int = 16) -> float:
    """k (d* + k* d_eps / kappa_tilde) with d_eps from centred differences of Newton waves.

    ``eps`` is only used to set k; the derivative is taken at eps = 0 from
    waves at +-h, the wave speed being even in the amplitude branch.
    """
    d_plus = newton_wave(prob, h, kappa_tilde, M=M).d
    d_minus_k = newton_wave(prob, h, -kappa_tilde, M=M).d
    # d(eps, kappa) - d(eps, -kappa) isolates the part linear in eps*kappa
    d_eps = (d_plus - d_minus_k) / (2 * h)
    ks = prob.crit.k_star
    k = ks + eps * kappa_tilde
    return float(k * (prob.crit.d_star + ks * d_eps / kappa_tilde))


def bloch_matrix(prob: WaveProblem, wave: TravelingWave, sigma: float, n_near: int | None = None,
                 frame: float | None = None) -> BlochSample:
    """Assemble the Bloch operator at Floquet exponent ``sigma`` and its spectrum."""
    C = frame_speed(prob, wave) if frame is None else frame
    J = _linearization(prob, wave.modes, wave.k, wave.mu, wave.d, sigma, frame=C)
    ev = np.linalg.eigvals(J)
    r = conserved_basis(prob.psi.P0)[0].shape[1]
    n_near = r + 2 if n_near is None else n_near
    near = ev[np.argsort(np.abs(ev))[:n_near]]
    return BlochSample(float(sigma), J, ev, near)


def count_zero_eigenvalues(sample: BlochSample, tol: float = 1e-8) -> int:
    return int(np.sum(np.abs(sample.eigenvalues) < tol))


def translation_residual(prob: WaveProblem, wave: TravelingWave) -> float:
    """|B(0) d_xi u| for the profile derivative, a kernel element by translation invariance."""
    J = _linearization(prob, wave.modes, wave.k, wave.mu, wave.d, 0.0, frame=frame_speed(prob, wave))
    etas = np.arange(-wave.M, wave.M + 1)
    du = (1j * etas[:, None] * wave.modes).ravel()
    return float(np.max(np.abs(J @ du)))


def reduced_model(prob: WaveProblem, wave: TravelingWave) -> tuple[ModelCoeffs, object, ReducedExampleData]:
    co = ModelCoeffs.from_amplitude(prob.coeffs, B0=wave.beta)
    w = wave_family(co, wave.kappa_tilde)
    extra = ReducedExampleData(prob.crit.k_star, wave.k, wave_alpha(prob, wave))
    return co, w, extra


def reduced_eigenvalues(prob: WaveProblem, wave: TravelingWave, sigma: float) -> np.ndarray:
    co, w, extra = reduced_model(prob, wave)
    return build_M(co, w, wave.eps, sigma, "reduced_example", extra).eigenvalues()


def _assign(a: np.ndarray, b: np.ndarray, tol: float):
    cost = np.abs(a[:, None] - b[None, :])
    ri, ci = linear_sum_assignment(cost)
    best = cost[ri, ci]
    # ambiguity: a different pairing of similar total cost giving different errors
    tot = best.sum()
    for perm in itertools.permutations(range(len(b))):
        if tuple(perm) == tuple(ci):
            continue
        alt = cost[np.arange(len(a)), perm]
        if abs(alt.sum() - tot) <= tol and abs(alt.max() - best.max()) > max(tol, 0.1 * best.max()):
            raise BranchMatchingFailed("eigenvalue assignment is ambiguous")
    return ci, best


@dataclass
class MatchReport:
    eps: float
    sigmas: np.ndarray
    bloch: np.ndarray
    reduced: np.ndarray
    mismatch: np.ndarray
    max_scaled_mismatch: float
    sigma0_relative: float

    def to_dict(self) -> dict:
        from .io import encode

        return encode({"eps": self.eps, "sigmas": self.sigmas, "bloch": self.bloch, "reduced": self.reduced,
                       "mismatch": self.mismatch, "max_scaled_mismatch": self.max_scaled_mismatch,
                       "sigma0_relative": self.sigma0_relative})


def spectral_match(prob: WaveProblem, wave: TravelingWave, sigma_grid, tol: float = 1e-12) -> MatchReport:
    """Compare the small Bloch eigenvalues with the reduced amplitude matrix."""
    sig = np.asarray(sigma_grid, dtype=float)
    B_all, R_all, mis = [], [], []
    for s in sig:
        bl = bloch_matrix(prob, wave, s).near_zero
        rd = reduced_eigenvalues(prob, wave, s)
        ci, err = _assign(bl, rd, tol)
        B_all.append(bl)
        R_all.append(rd[ci])
        mis.append(err)
    mis = np.array(mis)
    eps = wave.eps
    j0 = int(np.argmin(np.abs(sig)))
    b0, r0 = np.array(B_all[j0]), np.array(R_all[j0])
    jst = int(np.argmin(r0.real))
    rel = float(abs(b0[jst] - r0[jst]) / abs(r0[jst]))
    return MatchReport(eps, sig, np.array(B_all), np.array(R_all), mis, float(mis.max() / eps**2), rel)


def far_spectrum_growth(prob: WaveProblem, wave: TravelingWave, sigma0: float, n: int = 11) -> float:
    """max Re spec over a coarse grid of |sigma| in [sigma0, 1/2] (reported, not asserted)."""
    best = -np.inf
    for s in np.linspace(sigma0, 0.5, n):
        best = max(best, float(np.max(bloch_matrix(prob, wave, s).eigenvalues.real)))
    return best


def example_problem() -> WaveProblem:
    from .amplitude import amplitude_coefficients
    from .io import load_model
    from .spectral import critical_data_at, solve_example_family

    sym, spec = load_model("example_so2.json")
    _, _, ks, _ = solve_example_family()
    crit = critical_data_at(sym, ks)
    co, psi = amplitude_coefficients(sym, crit, spec)
    return WaveProblem(sym, spec, crit, co, psi)

"""Linear stability of exponential solutions of the coupled amplitude models.

Eigenvalues are those of M(eps, sigma) = -sigma^2 M2 + i sigma M1 + M0 for a
perturbation proportional to exp(i sigma X + lambda T), so Re lambda > 0 means
growth.  Models with r conserved quantities give (2 + r) x (2 + r) matrices.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg

from .spectral import SpectralError, reduced_inverse


class StabilityError(SpectralError):
    pass


class OutsideExistenceBand(StabilityError):
    pass


class NegativeAmplitude(StabilityError):
    pass


class DegenerateDenominator(StabilityError):
    pass


MODELS = ("truncated", "hyperbolic", "darcy", "reduced_example")


@dataclass(frozen=True)
class ModelCoeffs:
    """Abstract coefficients of the truncated system.

    A_T = a A_XX + b A + c|A|^2 A + A d.B
    B_T = e_B B_XX + eps^-1 (f B + h |A|^2)_X + d/dX Re(g A conj(A_X))
    """

    a: complex
    b: complex
    c: complex
    d: np.ndarray
    f: np.ndarray
    h: np.ndarray
    e_B: np.ndarray
    g: np.ndarray
    B0: np.ndarray
    W0: np.ndarray

    @classmethod
    def scalar(cls, a, b, c, d, f, h, e_B=0.0, g=0.0, B0=0.0, W0=0.0) -> "ModelCoeffs":
        return cls(complex(a), complex(b), complex(c),
                   np.array([complex(d)]), np.array([[float(f)]]), np.array([float(h)]),
                   np.array([[float(e_B)]]), np.array([complex(g)]), np.array([float(B0)]),
                   np.array([float(W0)]))

    @classmethod
    def from_amplitude(cls, co, B0=None) -> "ModelCoeffs":
        r = len(np.atleast_1d(co.V1))
        return cls(complex(co.a), complex(co.b), complex(co.gamma),
                   np.atleast_1d(np.asarray(co.V1, dtype=complex)),
                   np.atleast_2d(np.asarray(co.F_mat, dtype=float)),
                   np.atleast_1d(np.asarray(co.H_vec).real.astype(float)),
                   np.atleast_2d(np.asarray(co.D_mat, dtype=float)),
                   np.atleast_1d(np.asarray(co.v_vec, dtype=complex)),
                   np.zeros(r) if B0 is None else np.atleast_1d(np.asarray(B0, dtype=float)),
                   np.atleast_1d(np.asarray(co.W0, dtype=float)))

    @property
    def r(self) -> int:
        return len(self.d)

    @property
    def b_eff(self) -> complex:
        return complex(self.b + self.d @ self.B0)

    @property
    def ctilde(self) -> complex:
        closure = np.linalg.solve(self.f, self.h)
        return complex(self.c - self.d @ closure)

    def with_overrides(self, **kw) -> "ModelCoeffs":
        conv = {}
        for k, v in kw.items():
            if k in ("a", "b", "c"):
                conv[k] = complex(v)
            elif k in ("d", "g"):
                conv[k] = np.atleast_1d(np.asarray(v, dtype=complex))
            elif k in ("f", "e_B"):
                conv[k] = np.atleast_2d(np.asarray(v, dtype=float))
            elif k in ("h", "B0", "W0"):
                conv[k] = np.atleast_1d(np.asarray(v, dtype=float))
            else:
                raise KeyError(k)
        return replace(self, **conv)


APPENDIX_BASE = dict(a=1 + 1j, b=1.0, f=1.0, h=2.0, B0=0.0)
APPENDIX_EPS = 1e-2
APPENDIX_TABLE_CASES = {
    (-3 + 3j, 1 - 1j): (+1, +1),
    (-3 + 3j, -1 + 1j): (+1, -1),
    (-3 + 2j, -1 + 2j / 3): (-1, -1),
    (-3 + 2j, 1 - 2j / 3): (-1, +1),
}
APPENDIX_GENERIC_CASES = [(-3 + 2j, 1 - 1j), (-3 + 2j, -1 + 1j), (-3 + 2j, 1 + 1j), (-3 + 2j, -1 - 1j)]


def appendix_coeffs(c, d) -> ModelCoeffs:
    return ModelCoeffs.scalar(c=c, d=d, **APPENDIX_BASE)


# ---------------------------------------------------------------------------
# exponential solutions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WaveParams:
    kappa: float
    B0: np.ndarray
    alpha: float
    omega: float
    kappaE2: float


def wave_family(coeffs: ModelCoeffs, kappa: float, B0=None, cubic: complex | None = None) -> WaveParams:
    """Amplitude and frequency of A = alpha exp(i(kappa X - omega T)), B = B0."""
    B0 = coeffs.B0 if B0 is None else np.atleast_1d(np.asarray(B0, dtype=float))
    c = coeffs.c if cubic is None else complex(cubic)
    bb = complex(coeffs.b + coeffs.d @ B0)
    if bb.real <= 0:
        raise OutsideExistenceBand("Re(b + d.B0) <= 0: no waves")
    kE2 = bb.real / coeffs.a.real
    if kappa**2 > kE2 * (1 + 1e-14):
        raise OutsideExistenceBand(f"kappa^2={kappa**2:.6g} exceeds kappa_E^2={kE2:.6g}")
    if c.real >= 0:
        raise NegativeAmplitude("Re c >= 0: squared amplitude is negative")
    alpha2 = max((-bb.real + coeffs.a.real * kappa**2) / c.real, 0.0)
    omega = coeffs.a.imag * kappa**2 - bb.imag - c.imag * alpha2
    return WaveParams(float(kappa), B0, float(np.sqrt(alpha2)), float(omega), float(kE2))


def darcy_wave(coeffs: ModelCoeffs, kappa: float) -> WaveParams:
    return wave_family(coeffs, kappa, cubic=coeffs.ctilde)


# ---------------------------------------------------------------------------
# matrices
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ReducedExampleData:
    """Extra data for the ghost-term matrix in Bloch scaling."""

    k_star: float
    k: float
    alpha: float


@dataclass
class StabilityMatrix:
    model: str
    eps: float
    sigma: float
    entries: np.ndarray

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvals(self.entries)


def _cx(z: complex) -> np.ndarray:
    return np.array([[z.real, -z.imag], [z.imag, z.real]])


def matrix_parts(coeffs: ModelCoeffs, wave: WaveParams, eps: float, model: str = "truncated",
                 extra: ReducedExampleData | None = None):
    """Return (M2, M1, M0) with M = -sigma^2 M2 + i sigma M1 + M0."""
    if model not in MODELS:
        raise ValueError(f"unknown model {model!r}")
    a, kap, al = coeffs.a, wave.kappa, wave.alpha
    A2 = _cx(a)
    A1 = kap * np.array([[-2 * a.imag, -2 * a.real], [2 * a.real, -2 * a.imag]])
    if model == "darcy":
        ct = coeffs.ctilde
        M0 = np.array([[2 * al**2 * ct.real, 0.0], [2 * al**2 * ct.imag, 0.0]])
        return A2.astype(complex), A1.astype(complex), M0.astype(complex)

    r = coeffs.r
    n = 2 + r
    M2 = np.zeros((n, n), dtype=complex)
    M1 = np.zeros((n, n), dtype=complex)
    M0 = np.zeros((n, n), dtype=complex)
    M0[0, 0] = 2 * al**2 * coeffs.c.real
    M0[1, 0] = 2 * al**2 * coeffs.c.imag
    M0[0, 2:] = al * coeffs.d.real
    M0[1, 2:] = al * coeffs.d.imag
    if model == "reduced_example":
        if extra is None:
            raise ValueError("reduced_example needs ReducedExampleData")
        ks, k = extra.k_star, extra.k
        al_b = extra.alpha
        M0 = M0 * eps**2
        M0[:2, 0] = np.array([2 * al_b**2 * coeffs.c.real, 2 * al_b**2 * coeffs.c.imag]) * eps**2
        M0[0, 2:] = al_b * coeffs.d.real * eps**2
        M0[1, 2:] = al_b * coeffs.d.imag * eps**2
        # ghost terms: singular transport and advected amplitude, exact in k
        M1[2:, 0] = 2 * k * al_b * coeffs.h
        M1[2:, 2:] = k * coeffs.f
        # cGL dispersion and slow mean-mode coupling
        M1[:2, :2] = eps * ks * A1
        M1[2:, 0] += eps * ks * 2 * kap * al_b * coeffs.g.imag
        M2[:2, :2] = ks**2 * A2
        M2[2:, 0] = ks**2 * al_b * (coeffs.g.real + 2 * coeffs.W0)
        M2[2:, 1] = ks**2 * al_b * coeffs.g.imag
        M2[2:, 2:] = ks**2 * coeffs.e_B
        return M2, M1, M0
    M2[:2, :2] = A2
    M1[:2, :2] = A1
    M1[2:, 0] = 2 * al * coeffs.h / eps
    M1[2:, 2:] = coeffs.f / eps
    if model == "truncated":
        M2[2:, 0] = al * coeffs.g.real
        M2[2:, 1] = al * coeffs.g.imag
        M2[2:, 2:] = coeffs.e_B
        M1[2:, 0] += 2 * kap * al * coeffs.g.imag
    return M2, M1, M0


def build_M(coeffs: ModelCoeffs, wave: WaveParams, eps: float, sigma: float, model: str = "truncated",
            extra: ReducedExampleData | None = None) -> StabilityMatrix:
    M2, M1, M0 = matrix_parts(coeffs, wave, eps, model, extra)
    return StabilityMatrix(model, float(eps), float(sigma), -sigma**2 * M2 + 1j * sigma * M1 + M0)


def truncated_eigenvectors(coeffs: ModelCoeffs, wave: WaveParams) -> dict:
    """Closed-form (generalised) eigenvectors of M(eps, 0), scalar case."""
    c, d, A0 = coeffs.c, complex(coeffs.d[0]), wave.alpha
    p = -d.real / (2 * A0 * c.real)
    q = -c.imag / c.real
    return {
        "R_t": np.array([0.0, 1.0, 0.0]),
        "R_c": np.array([p, 0.0, 1.0]),
        "R_s": np.array([1.0, -q, 0.0]),
        "L_t": np.array([q, 1.0, -p * q]),
        "L_c": np.array([0.0, 0.0, 1.0]),
        "L_s": np.array([1.0, 0.0, -p]),
        "p": p,
        "q": q,
        "jordan": bool(abs(c.real * d.imag - c.imag * d.real) > 1e-12 * max(1.0, abs(c) * abs(d))),
    }


# ---------------------------------------------------------------------------
# expansions
# ---------------------------------------------------------------------------


@dataclass
class NeutralExpansion:
    p: float
    q: float
    F_eps: complex
    lam_t: tuple  # (first-order coefficient, second-order coefficient)
    lam_c: tuple
    mu_c_leading: float
    mu_t_leading: float
    F_prime0: float
    semisimple: bool
    details: dict = field(default_factory=dict)


def _kato_second_order(M2, M1, M0, R, L):
    """Split a semisimple zero eigenvalue of M0 to first and second order in sigma.

    R (n x m) and L (m x n) span the zero eigenspace with L R = I.  Returns
    first-order coefficients, second-order coefficients and the 2 x 2
    eigenvector coordinates of the first-order matrix.
    """
    T1 = 1j * M1
    T2 = -M2
    P = R @ L
    S = reduced_inverse(M0, P)
    A = L @ T1 @ R
    w, Y = np.linalg.eig(A)
    Z = np.linalg.inv(Y)
    B = L @ (T2 - T1 @ S @ T1) @ R
    second = np.array([Z[j] @ B @ Y[:, j] for j in range(len(w))])
    return w, second, Y


def neutral_expansion(coeffs: ModelCoeffs, wave: WaveParams, eps: float, model: str = "hyperbolic",
                      tol: float = 1e-12) -> NeutralExpansion:
    """Small-sigma expansion of the translational and conserved neutral eigenvalues."""
    if coeffs.r != 1:
        raise StabilityError("neutral expansions are implemented for one conserved quantity")
    a, c = coeffs.a, coeffs.c
    d = complex(coeffs.d[0])
    f, h = float(coeffs.f[0, 0]), float(coeffs.h[0])
    g = complex(coeffs.g[0]) if model == "truncated" else 0j
    A0, kap = wave.alpha, wave.kappa
    ev = truncated_eigenvectors(coeffs, wave)
    p, q = ev["p"], ev["q"]
    den0 = 2 * A0 * h * p + f
    if abs(den0) < tol:
        raise DegenerateDenominator("2 A0 h p + f vanishes")
    num = -p * q * den0 / eps + 2 * kap * (-a.imag * p * q + a.real * p - p**2 * q * A0 * g.imag)
    den = den0 / eps + 2 * A0 * kap * g.imag * p + 2 * kap * (a.real * q + a.imag)
    F_eps = num / den
    lam_t1 = -2j * kap * (a.real * q + a.imag)
    lam_c1 = 1j * (den0 / eps + 2 * A0 * kap * g.imag * p)
    F_prime0 = 2 * kap * p * (1 + q**2) * a.real / den0
    ct = coeffs.ctilde
    mu_c_leading = d.real * f * h * ct.real / (2 * A0 * c.real**3)
    mu_t_leading = -a.real + a.imag * q - (2 * kap * a.real / (2 * A0**2 * c.real)) * (
        2 * kap * a.real * q**2 + 2 * kap * a.real - 2 * F_prime0 * A0 * h)

    M2, M1, M0 = matrix_parts(coeffs, wave, eps, model)
    semisimple = not ev["jordan"]
    lam_t2 = lam_c2 = np.nan
    details = {}
    if semisimple:
        R = np.stack([ev["R_t"], ev["R_c"]], axis=1).astype(complex)
        L = np.stack([ev["L_t"], ev["L_c"]]).astype(complex)
        w, second, Y = _kato_second_order(M2, M1, M0, R, L)
        it = int(np.argmin(abs(w - lam_t1)))
        ic = 1 - it
        lam_t1_exact, lam_c1_exact = w[it], w[ic]
        lam_t2, lam_c2 = second[it], second[ic]
        details = {"lam_t1_kato": lam_t1_exact, "lam_c1_kato": lam_c1_exact}
    return NeutralExpansion(p, q, complex(F_eps), (complex(lam_t1), complex(lam_t2)),
                            (complex(lam_c1), complex(lam_c2)), float(mu_c_leading / eps**2),
                            float(mu_t_leading), float(F_prime0), semisimple, details)


def darcy_second_coefficient(coeffs: ModelCoeffs, wave: WaveParams) -> tuple[float, float]:
    """(printed rational expression, sigma^2 coefficient of the neutral eigenvalue)."""
    a, ct = coeffs.a, coeffs.ctilde
    A2 = wave.alpha**2
    printed = (2 * wave.kappa**2 * ct.imag**2 * a.real**2 + A2 * a.imag * ct.imag * ct.real**2
               + a.real * ct.real**2 * (2 * wave.kappa**2 * a.real + A2 * ct.real)) / (A2 * ct.real**3)
    return float(printed), float(-printed)


def eckhaus_printed(lam_k: complex, lam_mu: complex, gamma: complex) -> float:
    """The printed rational Eckhaus bound, with Re gamma^2 read as (Re gamma)^2."""
    lk, lm, g = lam_k, lam_mu, gamma
    num = 2 * (lk.imag * g.imag * lm.real * g.real + lk.real * lm.real * g.real**2)
    den = lk.real * (2 * g.imag**2 * lk.real + lk.imag * g.imag * g.real + 3 * lk.real * g.real**2)
    return float(num / den)


def eckhaus_from_curvature(a: complex, b: complex, c: complex) -> float:
    """kappa_S^2 from the zero of the sigma^2 coefficient of the neutral cGL eigenvalue.

    C2 = -Re a - Im a Im c / Re c - 2 kappa^2 (Re a)^2 |c|^2 / (alpha^2 (Re c)^2 ... )
    is linear-fractional in kappa^2, solved in closed form.
    """
    ra, ia, rb = a.real, a.imag, b.real
    rc, ic = c.real, c.imag
    base = -ra - ia * ic / rc
    # C2 * (rb - ra k2) / rc ... multiply through by alpha^2 Re c = ra k2 - rb
    # base (ra k2 - rb) - 2 k2 ra^2 |c|^2 / rc^2 = 0
    coef = base * ra - 2 * ra**2 * abs(c) ** 2 / rc**2
    return float(base * rb / coef)


def darcy_expansion(coeffs: ModelCoeffs, wave: WaveParams | None = None, kappa: float = 0.0):
    """(C2 with stable iff C2 < 0, kappa_S^2 printed, kappa_S^2 from curvature)."""
    ct = coeffs.ctilde
    w = darcy_wave(coeffs, kappa) if wave is None else wave
    _, C2 = darcy_second_coefficient(coeffs, w)
    kS2_printed = eckhaus_printed(coeffs.a, coeffs.b_eff, ct)
    kS2 = eckhaus_from_curvature(coeffs.a, coeffs.b_eff, ct)
    return C2, kS2_printed, kS2


# ---------------------------------------------------------------------------
# scans and branch tracking
# ---------------------------------------------------------------------------


def max_growth(coeffs: ModelCoeffs, wave: WaveParams, eps: float, sigmas, model: str) -> float:
    M2, M1, M0 = matrix_parts(coeffs, wave, eps, model)
    best = -np.inf
    for s in sigmas:
        best = max(best, float(np.max(np.linalg.eigvals(-s * s * M2 + 1j * s * M1 + M0).real)))
    return best


def scan_S(coeffs: ModelCoeffs, eps: float, rho: float, kappa_grid, n_sigma: int = 401,
           model: str = "hyperbolic") -> np.ndarray:
    sig = np.linspace(-rho, rho, n_sigma)
    out = []
    for kap in kappa_grid:
        w = wave_family(coeffs, kap)
        out.append((kap, max_growth(coeffs, w, eps, sig, model)))
    return np.array(out)


def scan_SD(coeffs: ModelCoeffs, kappa_grid, sigma_max: float = 1.0, n_sigma: int = 401) -> np.ndarray:
    sig = np.linspace(-sigma_max, sigma_max, n_sigma)
    out = []
    for kap in kappa_grid:
        try:
            w = darcy_wave(coeffs, kap)
            val = max_growth(coeffs, w, 1.0, sig, "darcy")
        except (OutsideExistenceBand, NegativeAmplitude):
            val = np.inf
        out.append((kap, val))
    return np.array(out)


def track_branches(coeffs: ModelCoeffs, wave: WaveParams, eps: float, sigmas, model: str = "hyperbolic"):
    """Eigenvalues on a sigma grid, continued by nearest match from the first grid point."""
    M2, M1, M0 = matrix_parts(coeffs, wave, eps, model)
    rows = []
    prev = None
    for s in sigmas:
        lam = np.linalg.eigvals(-s * s * M2 + 1j * s * M1 + M0)
        if prev is not None:
            from scipy.optimize import linear_sum_assignment

            cost = abs(prev[:, None] - lam[None, :])
            _, col = linear_sum_assignment(cost)
            lam = lam[col]
        rows.append(lam)
        prev = lam
    return np.array(rows)


def branch_derivatives(coeffs: ModelCoeffs, wave: WaveParams, eps: float, h: float, model: str = "hyperbolic"):
    """Centred finite-difference first and second sigma-derivatives of each branch at 0."""
    lam = track_branches(coeffs, wave, eps, [0.0, h, -h], model)
    # re-track -h from 0 separately so both sides follow the same branch
    lam_m = track_branches(coeffs, wave, eps, [0.0, -h], model)[1]
    lp, l0 = lam[1], lam[0]
    d1 = (lp - lam_m) / (2 * h)
    d2 = (lp + lam_m - 2 * l0) / (h * h)
    return l0, d1, d2


# ---------------------------------------------------------------------------
# balancing diagnostic
# ---------------------------------------------------------------------------


def _neutral_block(M0: np.ndarray, m: int):
    n = M0.shape[0]
    T, Z, sdim = scipy.linalg.schur(M0, output="complex", sort=lambda x: abs(x) < 1e-9 * max(1.0, np.abs(M0).max()))
    if sdim != m:
        order = np.argsort(abs(np.diag(T)))
        raise StabilityError(f"expected {m} neutral eigenvalues, found {sdim}: {np.diag(T)[order]}")
    R = Z[:, :m]
    Tl, Zl, sdl = scipy.linalg.schur(M0.conj().T, output="complex",
                                     sort=lambda x: abs(x) < 1e-9 * max(1.0, np.abs(M0).max()))
    Y = Zl[:, :m]
    L = np.linalg.solve(Y.conj().T @ R, Y.conj().T)
    return R, L


def balance_check(coeffs: ModelCoeffs, wave: WaveParams, eps: float, model: str = "hyperbolic") -> dict:
    """Reduce to the neutral 2-block, balance with diag(sigma, 1) and report splitting."""
    M2, M1, M0 = matrix_parts(coeffs, wave, eps, model)
    n = M0.shape[0]
    scale = max(1.0, np.abs(M0).max())
    report: dict = {"block_triangular": bool(np.allclose(coeffs.d, 0))}
    R, L = _neutral_block(M0, 2)
    N0 = L @ M0 @ R
    T1 = 1j * M1
    A1 = L @ T1 @ R
    # stable-part reduced resolvent for the second-order correction
    P = R @ L
    Q = np.eye(n) - P
    Ms = Q @ M0 @ Q + P
    S = Q @ np.linalg.solve(Ms, Q)
    A2 = L @ (-M2 - T1 @ S @ T1) @ R
    jordan = bool(np.abs(N0).max() > 1e-9 * scale)
    report["jordan_at_zero"] = jordan
    if jordan:
        # put N0 in the form [[0, Xi], [0, 0]]
        u, s_, vh = np.linalg.svd(N0)
        e1 = vh.conj().T[:, 1]  # kernel of N0
        e2 = vh.conj().T[:, 0]
        B = np.stack([N0 @ e2, e2], axis=1)
        Bi = np.linalg.inv(B)
        A1b = Bi @ A1 @ B
        A2b = Bi @ A2 @ B
        Xi = (Bi @ N0 @ B)[0, 1]
        report["first_order_lower_left"] = complex(A1b[1, 0])
        first = np.array([[A1b[0, 0], Xi], [A2b[1, 0], A1b[1, 1]]])
        report["puiseux_risk"] = bool(abs(A1b[1, 0]) > 1e-9 * max(1.0, np.abs(A1b).max()))
    else:
        first = A1
        report["puiseux_risk"] = False
    w = np.linalg.eigvals(first)
    gap = float(abs(w[0] - w[1]))
    report["first_order_eigs"] = w
    report["first_order_gap"] = gap
    report["split"] = bool(gap > 1e-8 * max(1.0, np.abs(first).max()))
    report["first_order_jordan"] = bool(not report["split"] and np.abs(first - np.diag(np.diag(first))).max() > 1e-12)
    report["radius_estimate"] = discriminant_radius(M2, M1, M0)
    report["eps"] = eps
    return report


def discriminant_radius(M2, M1, M0, rho: float | None = None) -> float:
    """Smallest nonzero complex sigma at which M(sigma) has a repeated eigenvalue."""
    n = M0.shape[0]
    deg = max(2 * n * (n - 1), 2)
    npts = 4 * deg
    scale = 1.0 / max(1e-300, np.abs(M1).max()) if rho is None else rho
    z = scale * np.exp(2j * np.pi * np.arange(npts) / npts)
    vals = []
    for s in z:
        cp = np.poly(-s * s * M2 + 1j * s * M1 + M0)
        vals.append(_poly_discriminant(cp))
    coef = np.fft.fft(np.array(vals)) / npts
    coef = coef[: deg + 1] / scale ** np.arange(deg + 1)
    big = np.abs(coef).max()
    coef[np.abs(coef) < 1e-10 * big] = 0
    nz = np.nonzero(coef)[0]
    if len(nz) == 0:
        return np.inf
    low = nz[0]
    roots = np.roots(coef[low:][::-1])
    roots = roots[np.abs(roots) > 0]
    return float(np.min(np.abs(roots))) if len(roots) else np.inf


def _poly_discriminant(cp: np.ndarray) -> complex:
    r = np.roots(cp)
    out = 1.0 + 0j
    for i in range(len(r)):
        for j in range(i + 1, len(r)):
            out *= (r[i] - r[j]) ** 2
    return out * cp[0] ** (2 * len(r) - 2)


def sign_table(eps: float = APPENDIX_EPS, n_kappa: int = 37, tol: float = 1e-8) -> dict:
    """Signs of (mu_t, mu_c) for the four degenerate appendix cases.

    A sign is -1 when the coefficient is negative on some interval of the
    band |kappa| <= 0.9 kappa_E ("good somewhere") and +1 otherwise.
    """
    out = {}
    for (c, d) in APPENDIX_TABLE_CASES:
        co = appendix_coeffs(c, d)
        kE = np.sqrt(co.b_eff.real / co.a.real)
        mt, mc = [], []
        for kap in np.linspace(-0.9 * kE, 0.9 * kE, n_kappa):
            ne = neutral_expansion(co, wave_family(co, kap), eps)
            mt.append(ne.lam_t[1].real)
            mc.append(ne.lam_c[1].real)
        out[(c, d)] = (-1 if min(mt) < -tol else 1, -1 if min(mc) < -tol else 1)
    return out

"""Amplitude-system coefficients for a Turing instability with conserved modes.

Bilinear and trilinear multipliers are stored as dense tensors ``T[p, i, j]``
(``T[p, i, j, l]``) so that ``Q(x, y)_p = sum T[p, i, j] x_i y_j``.  All
frequencies passed to the multipliers are physical wavenumbers.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .spectral import (
    CriticalData,
    FourierSymbol,
    SingularComplement,
    SpectralError,
    conserved_basis,
    kernel_projection,
    reduced_inverse,
)


class AmplitudeError(SpectralError):
    pass


class SingularReducedBlock(AmplitudeError):
    pass


class SingularF(AmplitudeError):
    pass


class SlopeTooShallow(AmplitudeError):
    pass


# ---------------------------------------------------------------------------
# nonlinearity data model
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Monomial:
    coeff: float
    factors: tuple[tuple[int, int], ...]  # (component, derivative order)

    @property
    def degree(self) -> int:
        return len(self.factors)


@dataclass(frozen=True)
class NonlinearitySpec:
    """Polynomial nonlinearity N = M(d/dx) Ntilde, one list of monomials per row."""

    rows: tuple[tuple[Monomial, ...], ...]
    conserved_outer: tuple[bool, ...]

    def __post_init__(self):
        if len(self.rows) != len(self.conserved_outer):
            raise ValueError("rows and conserved_outer must have equal length")
        for row in self.rows:
            for mono in row:
                if mono.degree not in (2, 3):
                    raise ValueError("only quadratic and cubic monomials are supported")
                for i, a in mono.factors:
                    if not (0 <= i < len(self.rows)) or a < 0:
                        raise ValueError(f"bad factor {(i, a)}")

    @property
    def n(self) -> int:
        return len(self.rows)

    @classmethod
    def from_dict(cls, d: dict, n: int | None = None) -> "NonlinearitySpec":
        rows = tuple(
            tuple(Monomial(float(m["coeff"]), tuple((int(i), int(a)) for i, a in m["factors"])) for m in row)
            for row in d["rows"]
        )
        outer = tuple(bool(x) for x in d.get("conserved_outer", [False] * len(rows)))
        if n is not None and len(rows) != n:
            raise ValueError(f"nonlinearity has {len(rows)} rows, symbol has n={n}")
        return cls(rows, outer)

    def to_dict(self) -> dict:
        return {
            "rows": [[{"coeff": m.coeff, "factors": [list(f) for f in m.factors]} for m in row] for row in self.rows],
            "conserved_outer": list(self.conserved_outer),
        }

    def scaled(self, quad: float = 1.0, cubic: float = 1.0) -> "NonlinearitySpec":
        rows = tuple(
            tuple(Monomial(m.coeff * (quad if m.degree == 2 else cubic), m.factors) for m in row) for row in self.rows
        )
        return NonlinearitySpec(rows, self.conserved_outer)

    def outer_factor(self, zeta: float) -> np.ndarray:
        """Diagonal of M(i zeta): i*zeta on conserved rows, 1 elsewhere."""
        return np.array([1j * zeta if c else 1.0 for c in self.conserved_outer], dtype=complex)

    # -- grid evaluation --------------------------------------------------

    def _derivs(self, Uhat: np.ndarray, k: float, shift: float = 0.0):
        N = Uhat.shape[1]
        eta = np.fft.fftfreq(N, 1.0 / N)
        cache = {}

        def get(i, a):
            if (i, a) not in cache:
                cache[(i, a)] = np.fft.ifft((1j * k * (eta + shift)) ** a * Uhat[i]) * N
            return cache[(i, a)]

        return eta, get

    def evaluate(self, Uhat: np.ndarray, k: float) -> np.ndarray:
        """Fourier coefficients of N(U) for U given by coefficients ``Uhat`` (shape n x N).

        ``Uhat`` is in numpy FFT ordering with the 1/N normalisation, on a
        2*pi-periodic phase grid whose physical wavenumber is ``k``.
        """
        n, N = Uhat.shape
        eta, get = self._derivs(Uhat, k)
        out = np.zeros((n, N), dtype=complex)
        for p, row in enumerate(self.rows):
            acc = np.zeros(N, dtype=complex)
            for m in row:
                term = np.full(N, m.coeff, dtype=complex)
                for i, a in m.factors:
                    term = term * get(i, a)
                acc += term
            h = np.fft.fft(acc) / N
            if self.conserved_outer[p]:
                h = h * (1j * k * eta)
            out[p] = h
        return out

    def linearization_fields(self, Uhat: np.ndarray, k: float) -> dict:
        """Pointwise coefficients G[(p, i, a)](theta) with DNtilde(U)V_p = sum G * d^a V_i."""
        _, get = self._derivs(Uhat, k)
        fields: dict = {}
        for p, row in enumerate(self.rows):
            for m in row:
                for s, (i, a) in enumerate(m.factors):
                    g = np.full(Uhat.shape[1], m.coeff, dtype=complex)
                    for t, (j, b) in enumerate(m.factors):
                        if t != s:
                            g = g * get(j, b)
                    key = (p, i, a)
                    fields[key] = fields.get(key, 0) + g
        return fields


# ---------------------------------------------------------------------------
# multipliers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MultiForm:
    """A multilinear form given by a coefficient tensor; call as form(x, y[, z])."""

    tensor: np.ndarray

    def __call__(self, *args) -> np.ndarray:
        t = self.tensor
        for v in args:
            t = np.tensordot(t, np.asarray(v, dtype=complex), axes=([1], [0]))
        return t

    def with_outer(self, diag: np.ndarray) -> "MultiForm":
        return MultiForm(diag[(slice(None),) + (None,) * (self.tensor.ndim - 1)] * self.tensor)


def _power(z: complex, a: int) -> complex:
    return 1.0 if a == 0 else z**a


def multiplier_Q(spec: NonlinearitySpec, zeta1: float, zeta2: float, outer: bool = False) -> MultiForm:
    """Symmetric bilinear multiplier of Ntilde at physical frequencies (zeta1, zeta2)."""
    n = spec.n
    T = np.zeros((n, n, n), dtype=complex)
    z1, z2 = 1j * zeta1, 1j * zeta2
    for p, row in enumerate(spec.rows):
        for m in row:
            if m.degree != 2:
                continue
            (i, a), (j, b) = m.factors
            T[p, i, j] += 0.5 * m.coeff * _power(z1, a) * _power(z2, b)
            T[p, j, i] += 0.5 * m.coeff * _power(z1, b) * _power(z2, a)
    form = MultiForm(T)
    return form.with_outer(spec.outer_factor(zeta1 + zeta2)) if outer else form


def multiplier_Qnu(spec: NonlinearitySpec, zeta1: float, zeta2: float) -> MultiForm:
    """-i d/dzeta1 of the bilinear multiplier (no outer factor)."""
    n = spec.n
    T = np.zeros((n, n, n), dtype=complex)
    z1, z2 = 1j * zeta1, 1j * zeta2

    def dpow(z, a):
        return 0.0 if a == 0 else a * _power(z, a - 1)

    for p, row in enumerate(spec.rows):
        for m in row:
            if m.degree != 2:
                continue
            (i, a), (j, b) = m.factors
            T[p, i, j] += 0.5 * m.coeff * dpow(z1, a) * _power(z2, b)
            T[p, j, i] += 0.5 * m.coeff * dpow(z1, b) * _power(z2, a)
    return MultiForm(T)


def multiplier_C(spec: NonlinearitySpec, zeta1: float, zeta2: float, zeta3: float, outer: bool = False) -> MultiForm:
    """Fully symmetrised trilinear multiplier, C(u,u,u) = Ntilde_3(u) for a single mode."""
    n = spec.n
    T = np.zeros((n, n, n, n), dtype=complex)
    zs = (1j * zeta1, 1j * zeta2, 1j * zeta3)
    for p, row in enumerate(spec.rows):
        for m in row:
            if m.degree != 3:
                continue
            for perm in itertools.permutations(range(3)):
                # factor s receives argument slot perm[s]
                idx = [0, 0, 0]
                val = m.coeff / 6.0
                for s, (i, a) in enumerate(m.factors):
                    idx[perm[s]] = i
                    val *= _power(zs[perm[s]], a)
                T[p, idx[0], idx[1], idx[2]] += val
    form = MultiForm(T)
    return form.with_outer(spec.outer_factor(zeta1 + zeta2 + zeta3)) if outer else form


def outer_matches_projection(spec: NonlinearitySpec, P0: np.ndarray, tol: float = 1e-10) -> bool:
    d = np.array([1.0 if c else 0.0 for c in spec.conserved_outer])
    return bool(np.allclose(P0, np.diag(d), atol=tol))


# ---------------------------------------------------------------------------
# corrections and coefficients
# ---------------------------------------------------------------------------


@dataclass
class PsiCorrections:
    N0: np.ndarray
    N1: np.ndarray
    N2: np.ndarray
    psi0_coeff: np.ndarray
    psi1_coeff: np.ndarray
    psi2_coeff: np.ndarray
    P0: np.ndarray
    P1: np.ndarray


def compute_psi(sym: FourierSymbol, crit: CriticalData, spec: NonlinearitySpec) -> PsiCorrections:
    n = sym.n
    ks, r = crit.k_star, crit.r_vec
    P0 = kernel_projection(sym, 0.0)
    if not outer_matches_projection(spec, P0):
        raise AmplitudeError("conserved_outer rows must coincide with the kernel projection")
    I = np.eye(n)
    try:
        N0 = -reduced_inverse(sym(0.0, 0.0), P0).real
        P1 = np.outer(r, crit.l_vec)
        shift = 1j * crit.d_star * ks
        N1 = reduced_inverse(sym(ks, 0.0) + shift * I, P1)
    except SingularComplement as exc:
        raise SingularReducedBlock(str(exc)) from exc
    M2 = sym(2 * ks, 0.0) + 2 * shift * I
    if np.linalg.cond(M2) > 1e12:
        raise SingularReducedBlock("mode-2 block is singular (2k* resonance)")
    N2 = np.linalg.inv(M2)

    Q_rr = multiplier_Q(spec, ks, -ks)(r, r.conj())
    psi0 = 0.5 * N0 @ ((I - P0) @ Q_rr)
    psi1 = N1 @ (sym.dk(ks, 0.0, 1) @ r)
    Q2 = multiplier_Q(spec, ks, ks, outer=True)(r, r)
    psi2 = -0.5 * N2 @ Q2
    return PsiCorrections(N0, N1, N2, psi0.real, psi1, psi2, P0, P1)


@dataclass
class AmplitudeCoeffs:
    a: complex
    b: complex
    gamma: complex
    V1: np.ndarray
    D_mat: np.ndarray
    F_mat: np.ndarray
    H_vec: np.ndarray
    W0: np.ndarray
    v_vec: np.ndarray
    compat_F: bool
    compat_H: bool
    darcy_ctilde: complex | None = None
    darcy_deltaA: complex | None = None
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        from .io import encode

        d = {k: getattr(self, k) for k in (
            "a", "b", "gamma", "V1", "D_mat", "F_mat", "H_vec", "W0", "v_vec",
            "compat_F", "compat_H", "darcy_ctilde", "darcy_deltaA")}
        d["extras"] = self.extras
        return encode(d)


def compute_cgl_coeffs(sym, crit: CriticalData, spec: NonlinearitySpec, psi: PsiCorrections):
    ks, r, l = crit.k_star, crit.r_vec, crit.l_vec
    E, _ = conserved_basis(psi.P0)
    outer = spec.outer_factor(ks)
    Qk0 = multiplier_Q(spec, ks, 0.0)
    terms = (
        Qk0(r, psi.psi0_coeff)
        + 0.5 * multiplier_Q(spec, -ks, 2 * ks)(r.conj(), psi.psi2_coeff)
        + 0.375 * multiplier_C(spec, ks, ks, -ks)(r, r, r.conj())
    )
    gamma = complex(2 * l @ (outer * terms))
    V1 = np.array([2 * l @ (outer * Qk0(r, E[:, j])) for j in range(E.shape[1])], dtype=complex)
    a = -0.5 * crit.lam_kk
    b = crit.lam_mu
    return complex(a), complex(b), gamma, V1


def mean_diffusion_matrix(sym, P0, N0, E, EL, correction: bool = True) -> np.ndarray:
    Sk = sym.dk(0.0, 0.0, 1)
    Skk = sym.dk(0.0, 0.0, 2)
    D = -0.5 * P0 @ Skk @ P0
    if correction:
        D = D - P0 @ Sk @ N0 @ Sk @ P0
    return (EL @ D @ E).real


def compute_mean_coeffs(sym, crit: CriticalData, spec: NonlinearitySpec, psi: PsiCorrections,
                        diffusion_correction: bool = True, tol: float = 1e-9):
    ks, r = crit.k_star, crit.r_vec
    n = sym.n
    I = np.eye(n)
    P0, N0 = psi.P0, psi.N0
    E, EL = conserved_basis(P0)
    L1 = -1j * sym.dk(0.0, 0.0, 1)  # real first-order coefficient at mu = 0
    L2 = -0.5 * sym.dk(0.0, 0.0, 2)
    c_speed = crit.d_star + crit.delta
    Q_rr = multiplier_Q(spec, ks, -ks)(r, r.conj())

    F = EL @ (P0 @ L1 @ P0 + c_speed * P0) @ E
    H = EL @ (P0 @ L1 @ psi.psi0_coeff + 0.5 * P0 @ Q_rr)
    D = mean_diffusion_matrix(sym, P0, N0, E, EL, diffusion_correction)
    W0 = EL @ (P0 @ L2 @ psi.psi0_coeff + P0 @ L1 @ N0 @ (I - P0) @ (c_speed * I + L1) @ psi.psi0_coeff)
    lift = P0 + P0 @ L1 @ N0 @ (I - P0)
    src = multiplier_Q(spec, ks, -ks)(r, np.conj(1j * psi.psi1_coeff)) + np.conj(
        multiplier_Qnu(spec, ks, -ks)(r, r.conj()))
    v = EL @ (lift @ src)

    scale = max(1.0, np.linalg.norm(sym.dk(0.0, 0.0, 1)))
    compat_F = bool(np.linalg.norm(F) < tol * scale)
    compat_H = bool(np.linalg.norm(H) < tol * scale)
    return F.real, H.real if np.allclose(H.imag, 0, atol=1e-10) else H, D, W0.real, v, compat_F, compat_H


def darcy_reduce(coeffs: AmplitudeCoeffs, cond_max: float = 1e10):
    """Enforce fB + h|A|^2 = const; returns (ctilde, deltaA, closure matrix F^{-1}H)."""
    F = np.atleast_2d(np.asarray(coeffs.F_mat, dtype=float))
    H = np.atleast_1d(np.asarray(coeffs.H_vec))
    if F.size == 0 or np.linalg.norm(F) == 0 or np.linalg.cond(F) > cond_max:
        raise SingularF("F is singular: the Darcy closure is undefined")
    closure = np.linalg.solve(F, H)
    deltaA = complex(-np.atleast_1d(coeffs.V1) @ closure)
    return complex(coeffs.gamma + deltaA), deltaA, closure


def amplitude_coefficients(sym, crit: CriticalData, spec: NonlinearitySpec,
                           diffusion_correction: bool = True) -> tuple[AmplitudeCoeffs, PsiCorrections]:
    """Full pipeline: corrections, cGL coefficients, mean coefficients, Darcy data."""
    psi = compute_psi(sym, crit, spec)
    a, b, gamma, V1 = compute_cgl_coeffs(sym, crit, spec, psi)
    F, H, D, W0, v, cF, cH = compute_mean_coeffs(sym, crit, spec, psi, diffusion_correction)
    co = AmplitudeCoeffs(a, b, gamma, V1, D, F, H, W0, v, cF, cH)
    try:
        co.darcy_ctilde, co.darcy_deltaA, _ = darcy_reduce(co)
    except SingularF:
        pass
    co.extras["V0"] = W0 + 0.5 * v.real
    return co, psi


# ---------------------------------------------------------------------------
# residual oracle
# ---------------------------------------------------------------------------


@dataclass
class OracleResult:
    eps: np.ndarray
    mode1: np.ndarray
    mode0: np.ndarray
    slope1: float
    alpha: float
    omega: float


def _family_amplitude(coeffs: AmplitudeCoeffs, kappa: float, beta: np.ndarray):
    bb = coeffs.b + complex(np.atleast_1d(coeffs.V1) @ beta)
    g = coeffs.gamma
    if g.real >= 0:
        raise AmplitudeError("Re gamma >= 0: no supercritical wave family")
    alpha2 = (coeffs.a.real * kappa**2 - bb.real) / g.real
    if alpha2 < 0:
        raise AmplitudeError("negative squared amplitude for the requested wave")
    omega = coeffs.a.imag * kappa**2 - bb.imag - g.imag * alpha2
    return float(np.sqrt(alpha2)), float(omega)


def residual_oracle(sym, spec: NonlinearitySpec, crit: CriticalData, coeffs: AmplitudeCoeffs,
                    psi: PsiCorrections, eps_list, kappa: float = 0.0, beta=None,
                    n_grid: int = 256, alpha: float | None = None, min_slope: float | None = None
                    ) -> OracleResult:
    """Plug the two-scale ansatz into the PDE and measure what is left.

    The amplitude is the exact exponential solution of the cGL equation (or
    ``alpha`` if given, which the zero-amplitude check uses).  Returned norms
    are |l . R_1| / eps and |Pi0 R_0| / eps, i.e. residuals measured relative
    to the pattern amplitude.
    """
    E, EL = conserved_basis(psi.P0)
    beta = np.zeros(E.shape[1]) if beta is None else np.atleast_1d(np.asarray(beta, dtype=float))
    if alpha is None:
        alpha, omega = _family_amplitude(coeffs, kappa, beta)
    else:
        bb = coeffs.b + complex(np.atleast_1d(coeffs.V1) @ beta)
        omega = coeffs.a.imag * kappa**2 - bb.imag - coeffs.gamma.imag * alpha**2
    ks = crit.k_star
    n = sym.n
    eta = np.fft.fftfreq(n_grid, 1.0 / n_grid)
    m1, m0 = [], []
    for eps in eps_list:
        k = ks + eps * kappa
        mu = eps**2
        Om = ks * crit.d_star + eps * kappa * (crit.d_star + crit.delta) + eps**2 * omega
        U = np.zeros((n, n_grid), dtype=complex)
        c1 = 0.5 * eps * alpha * crit.r_vec + 0.5 * eps**2 * (-kappa * alpha) * psi.psi1_coeff
        c0 = eps**2 * (E @ beta + alpha**2 * psi.psi0_coeff)
        c2 = 0.5 * eps**2 * alpha**2 * psi.psi2_coeff
        U[:, 0] = c0
        U[:, 1], U[:, -1] = c1, c1.conj()
        U[:, 2], U[:, -2] = c2, c2.conj()
        R = -spec.evaluate(U, k)
        for j, e in enumerate(eta):
            R[:, j] += (-1j * e * Om) * U[:, j] - sym(k * e, mu) @ U[:, j]
        m1.append(abs(crit.l_vec @ R[:, 1]) / eps)
        m0.append(np.linalg.norm(EL @ R[:, 0]) / eps)
    eps_arr = np.asarray(eps_list, dtype=float)
    m1, m0 = np.asarray(m1), np.asarray(m0)
    slope = float(np.polyfit(np.log(eps_arr), np.log(np.maximum(m1, 1e-300)), 1)[0]) if len(eps_arr) > 1 else np.nan
    if min_slope is not None and not slope >= min_slope:
        raise SlopeTooShallow(f"mode-1 residual slope {slope:.3f} < {min_slope}")
    return OracleResult(eps_arr, m1, m0, slope, alpha, omega)

"""Pseudospectral integration of the amplitude models on a periodic domain.

The singular transport term eps^-1 (F B)_X is integrated exactly per Fourier
mode. When F is invertible the forcing eps^-1 (H|A|^2)_X is absorbed by
evolving the characteristic variable W = B + F^-1 H |A|^2, so no time step
restriction of order eps remains.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from scipy.linalg import expm

from .spectral import SpectralError
from .stability import ModelCoeffs

SIM_MODELS = ("truncated", "hyperbolic", "darcy")
BLOWUP = 1e8


class SimulationError(SpectralError):
    pass


class BlowupDetected(SimulationError):
    pass


class NonFiniteValue(SimulationError):
    pass


class SingularF(SimulationError):
    pass


@dataclass
class FieldState:
    """Amplitude fields on a uniform periodic grid of ``N`` points over [0, L)."""

    L: float
    N: int
    A: np.ndarray
    B: np.ndarray
    T: float
    eps: float
    model: str
    coeffs: ModelCoeffs

    def __post_init__(self):
        if self.N < 2 or self.N & (self.N - 1):
            raise ValueError("N must be a power of two")
        if self.model not in SIM_MODELS:
            raise ValueError(f"unknown model {self.model!r}")
        self.A = np.asarray(self.A, dtype=complex).reshape(self.N)
        self.B = np.asarray(self.B, dtype=float).reshape(self.coeffs.r, self.N)

    @property
    def dx(self) -> float:
        return self.L / self.N

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.N) * self.dx

    @property
    def wavenumbers(self) -> np.ndarray:
        return 2 * np.pi * np.fft.fftfreq(self.N, d=self.dx)

    def copy(self) -> "FieldState":
        return replace(self, A=self.A.copy(), B=self.B.copy())


@dataclass(frozen=True)
class EnergyDiagnostics:
    H1_A: float
    L2_Btilde: float
    E: float
    mass_B: np.ndarray


def grid_state(coeffs: ModelCoeffs, L: float, N: int, A_fn, B_fn=None, eps: float = 1e-2,
               model: str = "hyperbolic", T: float = 0.0) -> FieldState:
    x = np.arange(N) * (L / N)
    A = A_fn(x)
    B = np.zeros((coeffs.r, N)) if B_fn is None else np.atleast_2d(B_fn(x))
    return FieldState(L, N, A, B, T, eps, model, coeffs)


def exponential_state(coeffs: ModelCoeffs, wave, L: float, N: int, eps: float,
                      model: str = "hyperbolic") -> FieldState:
    """The exact solution alpha exp(i kappa X), B = B0 at T = 0."""
    x = np.arange(N) * (L / N)
    A = wave.alpha * np.exp(1j * wave.kappa * x)
    B = np.repeat(np.atleast_1d(wave.B0)[:, None], N, axis=1).astype(float)
    return FieldState(L, N, A, B, 0.0, eps, model, coeffs)


# ---------------------------------------------------------------------------
# the integrator
# ---------------------------------------------------------------------------


class _Stepper:
    """Integrating-factor Runge-Kutta for a fixed grid, model and time step."""

    def __init__(self, state: FieldState, dt: float, scheme: str = "if2", frame: bool | None = None):
        co = state.coeffs
        self.co, self.model, self.eps, self.dt = co, state.model, state.eps, dt
        self.N, self.r = state.N, co.r
        self.scheme = scheme
        s = state.wavenumbers
        self.ik = 1j * s
        self.ik[self.N // 2] = 0.0  # Nyquist mode carries no derivative
        self.k2 = s**2
        self.mask = np.abs(s) <= (2.0 / 3.0) * np.max(np.abs(s))

        invertible = abs(np.linalg.det(co.f)) > 1e-12
        if self.model == "darcy":
            if not invertible:
                raise SingularF("Darcy closure needs an invertible F")
            self.frame = False
        else:
            self.frame = invertible if frame is None else bool(frame and invertible)
        self.K = np.linalg.solve(co.f, co.h) if invertible else np.zeros(self.r)

        self.LA = -co.a * self.k2 + co.b
        self.EA = {h: np.exp(h * self.LA) for h in (dt / 2, dt)}
        self.EB = {h: self._b_propagator(h, s) for h in (dt / 2, dt)}

    def _b_propagator(self, h: float, s: np.ndarray) -> np.ndarray:
        co, eps = self.co, self.eps
        eB = co.e_B if self.model == "truncated" else np.zeros_like(co.e_B)
        if self.model == "darcy":
            return np.ones((self.N, self.r, self.r), dtype=complex)
        out = np.empty((self.N, self.r, self.r), dtype=complex)
        for j, sj in enumerate(s):
            ikj = self.ik[j]
            out[j] = expm(h * (-sj**2 * eB + ikj * co.f / eps))
        return out

    # fields are carried in Fourier space: (Ah, Wh) with Wh shape (r, N)
    def to_spectral(self, A: np.ndarray, B: np.ndarray):
        Ah = np.fft.fft(A)
        if self.frame:
            B = B + self.K[:, None] * np.abs(A)[None, :] ** 2
        Wh = np.fft.fft(B, axis=1)
        return Ah, Wh

    def to_physical(self, Ah: np.ndarray, Wh: np.ndarray):
        A = np.fft.ifft(Ah)
        B = np.fft.ifft(Wh, axis=1).real
        if self.frame:
            B = B - self.K[:, None] * np.abs(A)[None, :] ** 2
        return A, B

    def a_rhs_physical(self, A, B, Ah):
        """Full right side of the A equation in physical space."""
        co = self.co
        Axx = np.fft.ifft(-self.k2 * Ah)
        c = co.ctilde if self.model == "darcy" else co.c
        return co.a * Axx + co.b * A + c * np.abs(A) ** 2 * A + A * (co.d @ B)

    def nonlinear(self, Ah, Wh, B_mean):
        co = self.co
        A, B = self.to_physical(Ah, Wh)
        if self.model == "darcy":
            B = B_mean[:, None] - self.K[:, None] * (np.abs(A) ** 2 - np.mean(np.abs(A) ** 2))
            c = co.ctilde
            NA = c * np.abs(A) ** 2 * A + A * (co.d @ (B + self.K[:, None] * np.abs(A) ** 2))
            return self.mask * np.fft.fft(NA), np.zeros_like(Wh)
        NA = co.c * np.abs(A) ** 2 * A + A * (co.d @ B)
        NAh = self.mask * np.fft.fft(NA)

        A2 = np.abs(A) ** 2
        A2h = np.fft.fft(A2)
        NBh = np.zeros_like(Wh)
        if not self.frame:
            NBh += (self.ik * A2h)[None, :] * (co.h[:, None] / self.eps)
        if self.model == "truncated":
            Ax = np.fft.ifft(self.ik * Ah)
            flux = np.real(co.g[:, None] * (A * np.conj(Ax))[None, :])
            NBh += self.ik[None, :] * np.fft.fft(flux, axis=1)
            if self.frame:
                NBh -= (co.e_B @ self.K)[:, None] * (-self.k2 * A2h)[None, :]
        if self.frame:
            At = self.a_rhs_physical(A, B, Ah)
            dA2 = 2 * np.real(np.conj(A) * At)
            dA2h = np.fft.fft(dA2)
            dA2h[0] = 0.0
            NBh += self.K[:, None] * dA2h[None, :]
        NBh[:, 0] = 0.0  # divergence form: the mean of B never moves
        return NAh, self.mask[None, :] * NBh

    def prop(self, h, Ah, Wh):
        return self.EA[h] * Ah, np.einsum("jab,bj->aj", self.EB[h], Wh)

    def fix_mean(self, Ah, Wh, B_mean):
        if self.frame:
            Wh = Wh.copy()
            Wh[:, 0] = self.N * (B_mean + self.K * np.mean(np.abs(np.fft.ifft(Ah)) ** 2))
        return Wh

    def step(self, Ah, Wh, B_mean):
        dt = self.dt
        h2 = dt / 2
        if self.scheme == "if2":
            NA1, NB1 = self.nonlinear(Ah, Wh, B_mean)
            Am, Wm = self.prop(h2, Ah + h2 * NA1, Wh + h2 * NB1)
            Wm = self.fix_mean(Am, Wm, B_mean)
            NA2, NB2 = self.nonlinear(Am, Wm, B_mean)
            A0, W0 = self.prop(dt, Ah, Wh)
            P2A, P2B = self.prop(h2, NA2, NB2)
            An, Wn = A0 + dt * P2A, W0 + dt * P2B
        elif self.scheme == "if4":
            fm = lambda a, w: (a, self.fix_mean(a, w, B_mean))
            k1 = self.nonlinear(Ah, Wh, B_mean)
            a, w = fm(*self.prop(h2, Ah + h2 * k1[0], Wh + h2 * k1[1]))
            k2 = self.nonlinear(a, w, B_mean)
            E2 = self.prop(h2, Ah, Wh)
            a, w = fm(E2[0] + h2 * k2[0], E2[1] + h2 * k2[1])
            k3 = self.nonlinear(a, w, B_mean)
            E1 = self.prop(dt, Ah, Wh)
            p3 = self.prop(h2, *k3)
            a, w = fm(E1[0] + dt * p3[0], E1[1] + dt * p3[1])
            k4 = self.nonlinear(a, w, B_mean)
            p1 = self.prop(dt, *k1)
            p2 = self.prop(h2, *k2)
            An = E1[0] + dt / 6 * (p1[0] + 2 * p2[0] + 2 * p3[0] + k4[0])
            Wn = E1[1] + dt / 6 * (p1[1] + 2 * p2[1] + 2 * p3[1] + k4[1])
        else:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        return An, self.fix_mean(An, Wn, B_mean)


def _check(A, B) -> None:
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(B))):
        raise NonFiniteValue("non-finite field values")
    if max(np.max(np.abs(A)), np.max(np.abs(B)) if B.size else 0.0) > BLOWUP:
        raise BlowupDetected("field norm exceeded 1e8")


def _darcy_B(state_A, K, B_mean):
    A2 = np.abs(state_A) ** 2
    return B_mean[:, None] - K[:, None] * (A2 - np.mean(A2))


def step(state: FieldState, dt: float, scheme: str = "if2", frame: bool | None = None) -> FieldState:
    """Advance one step of size ``dt``; see ``simulate`` for many steps."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    st = _Stepper(state, dt, scheme, frame)
    B_mean = state.B.mean(axis=1)
    Ah, Wh = st.to_spectral(state.A, state.B)
    Ah, Wh = st.step(Ah, Wh, B_mean)
    A, B = st.to_physical(Ah, Wh)
    if state.model == "darcy":
        B = _darcy_B(A, st.K, B_mean)
    _check(A, B)
    return replace(state, A=A, B=B, T=state.T + dt)


def energy(state: FieldState) -> EnergyDiagnostics:
    """H1 norm of A, L2 norm of B + |A|^2 and their half sum, as torus integrals."""
    s = state.wavenumbers
    Ah = np.fft.fft(state.A)
    w = state.L / state.N**2
    H1 = float(np.sum((1 + s**2) * np.abs(Ah) ** 2) * w)
    Bt = state.B + np.abs(state.A)[None, :] ** 2
    L2 = float(np.sum(Bt**2) * state.dx)
    return EnergyDiagnostics(H1, L2, 0.5 * (H1 + L2), state.B.mean(axis=1))


def norms(state: FieldState) -> dict:
    s = state.wavenumbers
    Ah = np.fft.fft(state.A)
    w = state.L / state.N**2
    en = energy(state)
    return {
        "T": state.T,
        "A_L2": float(np.sqrt(np.sum(np.abs(Ah) ** 2) * w)),
        "A_H1": float(np.sqrt(np.sum((1 + s**2) * np.abs(Ah) ** 2) * w)),
        "B_L2": float(np.sqrt(np.sum(state.B**2) * state.dx)),
        "mass_B": state.B.mean(axis=1).tolist(),
        "E": en.E,
    }


@dataclass
class Trajectory:
    times: list = field(default_factory=list)
    records: list = field(default_factory=list)
    observed: dict = field(default_factory=dict)
    final: FieldState | None = None

    def column(self, key: str) -> np.ndarray:
        return np.array([r[key] for r in self.records])

    def to_csv(self, path) -> None:
        r = len(self.records[0]["mass_B"]) if self.records else 0
        head = ["T", "A_L2", "A_H1", "B_L2"] + [f"mass_B{j}" for j in range(r)] + ["E"]
        lines = [",".join(head)]
        for rec in self.records:
            row = [rec["T"], rec["A_L2"], rec["A_H1"], rec["B_L2"], *rec["mass_B"], rec["E"]]
            lines.append(",".join(f"{v:.12e}" for v in row))
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")


def simulate(state: FieldState, T_final: float, dt: float,
             observers: dict[str, Callable[[FieldState], object]] | None = None,
             stride: int = 10, scheme: str = "if2", frame: bool | None = None) -> Trajectory:
    """Step from ``state.T`` to ``T_final``. Observers run every ``stride`` steps."""
    n_steps = int(round((T_final - state.T) / dt))
    if n_steps < 0:
        raise ValueError("T_final precedes the current time")
    dt = (T_final - state.T) / n_steps if n_steps else dt
    observers = observers or {}
    traj = Trajectory(observed={k: [] for k in observers})
    st = _Stepper(state, dt, scheme, frame)
    B_mean = state.B.mean(axis=1)
    Ah, Wh = st.to_spectral(state.A, state.B)
    cur = state

    def record(s: FieldState):
        traj.times.append(s.T)
        traj.records.append(norms(s))
        for k, fn in observers.items():
            traj.observed[k].append(fn(s))

    record(cur)
    for i in range(1, n_steps + 1):
        Ah, Wh = st.step(Ah, Wh, B_mean)
        if i % stride == 0 or i == n_steps:
            A, B = st.to_physical(Ah, Wh)
            if state.model == "darcy":
                B = _darcy_B(A, st.K, B_mean)
            _check(A, B)
            cur = replace(state, A=A, B=B, T=state.T + i * dt)
            record(cur)
    traj.final = cur
    return traj


# ---------------------------------------------------------------------------
# Darcy model with the B0 solvability ODE
# ---------------------------------------------------------------------------


@dataclass
class DarcyTrajectory:
    times: np.ndarray
    B0: np.ndarray
    B0_rate: np.ndarray
    mass_B: np.ndarray
    final: FieldState


def darcy_run(coeffs: ModelCoeffs, state_A: FieldState, B0_init, T_final: float, dt: float,
              stride: int = 10, scheme: str = "if2") -> DarcyTrajectory:
    """Integrate the Darcy model A equation with B = B0(T) - F^-1 H |A|^2.

    B0 follows the solvability ODE dB0/dT = mean(F^-1 H d|A|^2/dT). The state
    is carried with B0 determined by the conserved mean of B, and the ODE right
    side (from the A equation) is recorded alongside for comparison.
    """
    if abs(np.linalg.det(coeffs.f)) <= 1e-12:
        raise SingularF("Darcy closure needs an invertible F")
    K = np.linalg.solve(coeffs.f, coeffs.h)
    B0 = np.atleast_1d(np.asarray(B0_init, dtype=float))
    A = state_A.A
    B_mean = B0 - K * np.mean(np.abs(A) ** 2)
    B = _darcy_B(A, K, B_mean)
    s0 = FieldState(state_A.L, state_A.N, A, B, state_A.T, state_A.eps, "darcy", coeffs)
    st = _Stepper(s0, dt, scheme)

    def b0_of(A_):
        return B_mean + K * np.mean(np.abs(A_) ** 2)

    def rate(A_):
        Ah_ = np.fft.fft(A_)
        B0_ = b0_of(A_)
        At = (coeffs.a * np.fft.ifft(-st.k2 * Ah_) + coeffs.b * A_
              + coeffs.ctilde * np.abs(A_) ** 2 * A_ + A_ * (coeffs.d @ B0_))
        return K * np.mean(2 * np.real(np.conj(A_) * At))

    traj = simulate(s0, T_final, dt, observers={"B0": lambda s: b0_of(s.A), "rate": lambda s: rate(s.A)},
                    stride=stride, scheme=scheme)
    return DarcyTrajectory(np.array(traj.times), np.array(traj.observed["B0"]),
                           np.array(traj.observed["rate"]),
                           np.array([r["mass_B"] for r in traj.records]), traj.final)


# ---------------------------------------------------------------------------
# perturbation growth
# ---------------------------------------------------------------------------


def perturbation_growth(coeffs: ModelCoeffs, wave, eps: float, L: float, N: int, T_final: float,
                        dt: float, amplitude: float = 1e-3, model: str = "hyperbolic",
                        seed: int = 0, scheme: str = "if2") -> dict:
    """Evolve a perturbed exponential solution and fit the perturbation growth rate."""
    rng = np.random.default_rng(seed)
    base = exponential_state(coeffs, wave, L, N, eps, model)
    x = base.x
    s = base.wavenumbers
    keep = (np.abs(s) > 0) & (np.abs(s) <= 0.25 * np.max(np.abs(s)))
    noise = np.zeros(N, dtype=complex)
    noise[keep] = rng.standard_normal(keep.sum()) + 1j * rng.standard_normal(keep.sum())
    pA = np.fft.ifft(noise)
    pA *= amplitude / np.max(np.abs(pA))
    pert = replace(base, A=base.A * (1 + pA))

    def dev(st: FieldState):
        ref = wave.alpha * np.exp(1j * (wave.kappa * x - wave.omega * st.T))
        # remove the phase drift along the wave family
        ph = np.vdot(ref, st.A)
        ph = ph / abs(ph) if abs(ph) > 0 else 1.0
        return float(np.sqrt(np.sum(np.abs(st.A - ph * ref) ** 2) / N
                             + np.sum((st.B - wave.B0[:, None]) ** 2) / N))

    traj = simulate(pert, T_final, dt, observers={"dev": dev}, stride=max(1, int(0.01 / dt)), scheme=scheme)
    t = np.array(traj.times)
    d = np.array(traj.observed["dev"])
    half = t >= 0.5 * t[-1]
    rate = float(np.polyfit(t[half], np.log(np.maximum(d[half], 1e-300)), 1)[0])
    return {"times": t, "deviation": d, "rate": rate, "ratio": float(d[-1] / d[0])}

"""Fourier symbols of conservation-law systems and their critical spectral data.

A symbol is S(k, mu) = sum_j (ik)^j (L_j^0 + mu L_j^1) with real coefficient
matrices.  The rank-r kernel of L_0 carries the conserved (mean) modes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla


class SpectralError(Exception):
    """Base class for failures in this module."""


class KernelRankMismatch(SpectralError):
    pass


class NoCriticalPoint(SpectralError):
    pass


class MultipleCriticalPoints(SpectralError):
    pass


class NonSimpleCritical(SpectralError):
    pass


class SingularComplement(SpectralError):
    pass


class NoConvergence(SpectralError):
    pass


class NegativeDoubleRoot(SpectralError):
    pass


@dataclass(frozen=True)
class FourierSymbol:
    """Polynomial symbol with affine parameter dependence.

    ``coeffs0[j]`` and ``coeffs1[j]`` are the real n x n matrices multiplying
    (ik)^j and mu (ik)^j respectively; ``r`` is the declared conserved rank.
    """

    coeffs0: np.ndarray
    coeffs1: np.ndarray
    r: int

    def __post_init__(self):
        c0 = np.asarray(self.coeffs0, dtype=float)
        c1 = np.asarray(self.coeffs1, dtype=float)
        if c0.ndim != 3 or c0.shape[1] != c0.shape[2] or c0.shape != c1.shape:
            raise ValueError("coefficients must be (m+1, n, n) arrays of equal shape")
        object.__setattr__(self, "coeffs0", c0)
        object.__setattr__(self, "coeffs1", c1)

    @property
    def n(self) -> int:
        return self.coeffs0.shape[1]

    @property
    def m(self) -> int:
        return self.coeffs0.shape[0] - 1

    def L(self, j: int, mu: float = 0.0) -> np.ndarray:
        return self.coeffs0[j] + mu * self.coeffs1[j]

    def __call__(self, k: float, mu: float = 0.0) -> np.ndarray:
        return self.dk(k, mu, 0)

    def dk(self, k: float, mu: float = 0.0, order: int = 1) -> np.ndarray:
        """Exact k-derivative of the symbol of the given order."""
        out = np.zeros((self.n, self.n), dtype=complex)
        for j in range(order, self.m + 1):
            # d^order/dk^order (ik)^j = i^order j!/(j-order)! (ik)^(j-order)
            fall = float(np.prod(np.arange(j - order + 1, j + 1))) if order else 1.0
            out += (1j**order) * fall * (1j * k) ** (j - order) * self.L(j, mu)
        return out

    def dmu(self, k: float) -> np.ndarray:
        out = np.zeros((self.n, self.n), dtype=complex)
        for j in range(self.m + 1):
            out += (1j * k) ** j * self.coeffs1[j]
        return out

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "m": self.m,
            "r": self.r,
            "coeffs": [[self.coeffs0[j].tolist(), self.coeffs1[j].tolist()] for j in range(self.m + 1)],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FourierSymbol":
        n, m = int(d["n"]), int(d["m"])
        coeffs = d["coeffs"]
        if len(coeffs) != m + 1:
            raise ValueError(f"expected {m + 1} coefficient pairs, got {len(coeffs)}")
        c0 = np.array([pair[0] for pair in coeffs], dtype=float)
        c1 = np.array([pair[1] for pair in coeffs], dtype=float)
        if c0.shape != (m + 1, n, n):
            raise ValueError(f"coefficient matrices must be {n}x{n}")
        return cls(c0, c1, int(d["r"]))


def eval_symbol(sym: FourierSymbol, k: float, mu: float = 0.0) -> np.ndarray:
    return sym(k, mu)


def _null_space(A: np.ndarray, tol: float) -> np.ndarray:
    u, s, vh = np.linalg.svd(A)
    rank = int(np.sum(s > tol))
    return vh[rank:].conj().T


def kernel_projection(sym: FourierSymbol, mu: float = 0.0, tol: float = 1e-10) -> np.ndarray:
    """Spectral projection onto ker L_0(mu)."""
    L0 = sym.L(0, mu)
    scale = max(1.0, np.linalg.norm(L0, 2))
    V = _null_space(L0, tol * scale)
    W = _null_space(L0.T, tol * scale).T
    if V.shape[1] != sym.r or W.shape[0] != sym.r:
        raise KernelRankMismatch(f"kernel dimension {V.shape[1]} but declared r = {sym.r}")
    if sym.r == 0:
        return np.zeros((sym.n, sym.n))
    G = W @ V
    if np.linalg.cond(G) > 1e10:
        raise KernelRankMismatch("zero eigenvalue of L_0 is not semisimple")
    P = V @ np.linalg.solve(G, W)
    P = np.real_if_close(P)
    P[np.abs(P) < 1e-14] = 0.0
    return np.asarray(P, dtype=float)


def conserved_basis(P0: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Factor P0 = E @ EL with EL @ E = I.

    Coordinate projections use the selected coordinates so that the mean-mode
    variables are plain components of U.
    """
    n = P0.shape[0]
    d = np.diag(P0)
    if np.allclose(P0, np.diag(d)) and np.allclose(d * (1 - d), 0):
        idx = np.flatnonzero(d > 0.5)
        E = np.eye(n)[:, idx]
        return E, E.T.copy()
    u, s, _ = np.linalg.svd(P0)
    rank = int(np.sum(s > 1e-10))
    E = u[:, :rank]
    return E, E.T @ P0


def reduced_inverse(M: np.ndarray, P: np.ndarray, cond_max: float = 1e12) -> np.ndarray:
    """Inverse of (I-P) M (I-P) on range(I-P), extended by zero on range P."""
    n = M.shape[0]
    Q = np.eye(n) - P
    u, s, _ = np.linalg.svd(Q)
    rank = int(np.sum(s > 1e-10))
    if rank == 0:
        return np.zeros((n, n), dtype=complex)
    B = u[:, :rank]
    Ac = B.conj().T @ Q @ M @ B
    if np.linalg.cond(Ac) > cond_max:
        raise SingularComplement("reduced block is numerically singular")
    return B @ np.linalg.solve(Ac, B.conj().T @ Q)


def spectral_curvature(M0, M1, M2, r, l) -> complex:
    """Second derivative at 0 of the eigenvalue of M0 + x M1 + x^2 M2 through 0.

    ``r`` and ``l`` are right/left null vectors of M0 for a simple eigenvalue.
    """
    r = np.asarray(r, dtype=complex)
    l = np.asarray(l, dtype=complex)
    lr = l @ r
    Pi = np.outer(r, l) / lr
    N = reduced_inverse(np.asarray(M0, dtype=complex), Pi)
    Q = np.eye(len(r)) - Pi
    return complex(2 * (l @ M2 @ r - l @ M1 @ Q @ N @ Q @ M1 @ r) / lr)


@dataclass
class CriticalData:
    k_star: float
    lam: complex
    lam_k: complex
    lam_kk: complex
    lam_mu: complex
    r_vec: np.ndarray
    l_vec: np.ndarray
    d_star: float
    delta: float

    def to_dict(self) -> dict:
        from .io import encode

        return encode(
            {
                "k_star": self.k_star,
                "lambda": self.lam,
                "lambda_k": self.lam_k,
                "lambda_kk": self.lam_kk,
                "lambda_mu": self.lam_mu,
                "r_vec": self.r_vec,
                "l_vec": self.l_vec,
                "d_star": self.d_star,
                "delta": self.delta,
            }
        )


def growth(sym: FourierSymbol, k: float, mu: float = 0.0) -> float:
    """g(k) = max Re spec S(k, mu)."""
    return float(np.max(np.linalg.eigvals(sym(k, mu)).real))


def critical_eigenpair(sym: FourierSymbol, k: float, mu: float = 0.0):
    """Eigenvalue of largest real part with left/right vectors, l.r = 1.

    The left vector is scaled so that its last nonzero entry is 1.
    """
    S = sym(k, mu)
    w, vl, vr = sla.eig(S, left=True, right=True)
    j = int(np.argmax(w.real))
    lam = w[j]
    others = np.delete(w, j)
    scale = max(1.0, np.linalg.norm(S, 2))
    if others.size and np.min(np.abs(others - lam)) < 1e-8 * scale:
        raise NonSimpleCritical("tracked eigenvalue collides with another")
    l = vl[:, j].conj()
    nz = np.flatnonzero(np.abs(l) > 1e-12 * np.max(np.abs(l)))
    l = l / l[nz[-1]]
    r = vr[:, j] / (l @ vr[:, j])
    return complex(lam), r, l


def _branch_slope(sym: FourierSymbol, k: float) -> float:
    lam, r, l = critical_eigenpair(sym, k)
    return float((l @ sym.dk(k, 0.0, 1) @ r).real)


def find_critical(
    sym: FourierSymbol,
    k_guess: float = 1.0,
    n_grid: int = 2000,
    tol: float = 1e-12,
    zero_tol: float = 1e-8,
) -> CriticalData:
    """Locate the marginal wavenumber and the spectral data there."""
    ks = np.linspace(4 * k_guess / n_grid, 4 * k_guess, n_grid)
    g = np.array([growth(sym, k) for k in ks])
    # interior local maxima of g are candidate tangencies
    cand = [i for i in range(1, n_grid - 1) if g[i] >= g[i - 1] and g[i] >= g[i + 1]]
    roots = []
    for i in cand:
        a, b = ks[i - 1], ks[i + 1]
        try:
            fa, fb = _branch_slope(sym, a), _branch_slope(sym, b)
        except NonSimpleCritical:
            continue
        if fa * fb > 0:
            continue
        # bisection to a bracket, then secant polish
        while b - a > tol:
            c = 0.5 * (a + b)
            fc = _branch_slope(sym, c)
            if fa * fc <= 0:
                b, fb = c, fc
            else:
                a, fa = c, fc
            if b - a < 1e-6:
                break
        for _ in range(50):
            if fb == fa:
                break
            c = b - fb * (b - a) / (fb - fa)
            a, fa = b, fb
            b, fb = c, _branch_slope(sym, c)
            if abs(b - a) < tol:
                break
        kc = b
        scale = max(1.0, np.linalg.norm(sym(kc), 2))
        if abs(growth(sym, kc)) < zero_tol * scale:
            roots.append((i, kc))
    if not roots:
        raise NoCriticalPoint("max Re spec S(k,0) never touches zero")
    clusters = [roots[0]]
    for i, kc in roots[1:]:
        if i - clusters[-1][0] > 10:
            clusters.append((i, kc))
    if len(clusters) > 1:
        raise MultipleCriticalPoints(f"neutral wavenumbers at {[c[1] for c in clusters]}")
    k_star = clusters[0][1]
    return critical_data_at(sym, k_star)


def critical_data_at(sym: FourierSymbol, k_star: float) -> CriticalData:
    lam, r, l = critical_eigenpair(sym, k_star)
    Sk = sym.dk(k_star, 0.0, 1)
    Skk = sym.dk(k_star, 0.0, 2)
    lam_k = complex(l @ Sk @ r)
    lam_mu = complex(l @ sym.dmu(k_star) @ r)
    M0 = sym(k_star) - lam * np.eye(sym.n)
    lam_kk = spectral_curvature(M0, Sk, 0.5 * Skk, r, l)
    d_star = -lam.imag / k_star
    delta = -lam_k.imag - d_star
    return CriticalData(k_star, lam, lam_k, lam_kk, lam_mu, r, l, d_star, delta)


@dataclass
class HypothesisReport:
    items: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.items.values())

    def to_dict(self) -> dict:
        return {"passed": self.passed, "items": dict(self.items), "details": dict(self.details)}


def mean_diffusion(sym: FourierSymbol, P0: np.ndarray, correction: bool = True) -> np.ndarray:
    """D in B_t = D B_xx, restricted to range P0 (coordinates of conserved_basis)."""
    E, EL = conserved_basis(P0)
    D = -0.5 * P0 @ sym.dk(0.0, 0.0, 2) @ P0
    if correction:
        N0 = -reduced_inverse(sym(0.0), P0)
        Sk = sym.dk(0.0, 0.0, 1)
        D = D - P0 @ Sk @ N0 @ Sk @ P0
    return np.real_if_close(EL @ D @ E)


def check_hypotheses(sym: FourierSymbol, k_grid, mu_grid, k_guess: float = 1.0) -> HypothesisReport:
    """Sampled checks of the Turing hypotheses for a conservation-law symbol."""
    rep = HypothesisReport()
    k_grid = np.asarray(k_grid, dtype=float)
    mu_grid = np.asarray(mu_grid, dtype=float)

    dev = max(np.linalg.norm(sym(k, mu) - sym(-k, mu).conj()) for k in k_grid for mu in mu_grid)
    rep.items["reality"] = bool(dev < 1e-12)
    rep.details["reality_dev"] = float(dev)

    try:
        projs = [kernel_projection(sym, mu) for mu in mu_grid]
        const = max(np.linalg.norm(p - projs[0]) for p in projs)
        rep.items["kernel"] = bool(sym.r >= 1 and const < 1e-10)
        rep.details["kernel_projection_variation"] = float(const)
    except KernelRankMismatch as exc:
        rep.items["kernel"] = False
        rep.details["kernel"] = str(exc)
        projs = None

    neg = [mu for mu in mu_grid if mu < 0]
    kpos = k_grid[k_grid > 0]
    worst = max((growth(sym, k, mu) for k in kpos for mu in neg), default=-np.inf)
    rep.items["stable_below"] = bool(worst < 0)
    rep.details["max_growth_mu_negative"] = float(worst)

    crit = None
    try:
        crit = find_critical(sym, k_guess=k_guess)
        rep.items["unique_simple_critical"] = True
        rep.details["k_star"] = crit.k_star
    except SpectralError as exc:
        rep.items["unique_simple_critical"] = False
        rep.details["critical"] = f"{type(exc).__name__}: {exc}"

    if crit is not None:
        rep.items["signs"] = bool(
            abs(crit.lam.real) < 1e-8
            and abs(crit.lam_k.real) < 1e-8
            and crit.lam_kk.real < 0
            and crit.lam_mu.real > 0
        )
        # sampled sector bound away from {0, k*}
        away = kpos[(np.abs(kpos - crit.k_star) > 0.1 * crit.k_star) & (kpos > 0.1 * crit.k_star)]
        sector = max((growth(sym, k) for k in away), default=-np.inf)
        rep.items["sector"] = bool(sector < 0)
        rep.details["max_growth_off_critical"] = float(sector)
    else:
        rep.items["signs"] = False
        rep.items["sector"] = False

    if projs is not None and sym.r >= 1:
        P0 = projs[0]
        E, EL = conserved_basis(P0)
        hyps = []
        for mu in mu_grid:
            Hm = EL @ (-1j * sym.dk(0.0, mu, 1)) @ E
            w, V = np.linalg.eig(Hm)
            hyps.append(np.max(np.abs(w.imag)) < 1e-10 and np.linalg.cond(V) < 1e8)
        rep.items["hyperbolic"] = bool(all(hyps))
        try:
            D = mean_diffusion(sym, P0)
            rep.items["diffusion_positive"] = bool(np.all(np.linalg.eigvals(D).real > 0))
            rep.details["mean_diffusion"] = np.atleast_2d(D).real.tolist()
        except SingularComplement:
            rep.items["diffusion_positive"] = False
    else:
        rep.items["hyperbolic"] = False
        rep.items["diffusion_positive"] = False
    return rep


# ---------------------------------------------------------------------------
# the two-component example family


def example_symbol(c1: float, c2: float) -> FourierSymbol:
    c0 = np.zeros((3, 2, 2))
    c1m = np.zeros((3, 2, 2))
    c0[0] = [[0, 0], [0, -1]]
    c0[1] = [[0, 0], [c1, c2]]
    c0[2] = [[2, 1], [1, 2]]
    c1m[1] = [[0, 0], [1, 0]]
    return FourierSymbol(c0, c1m, 1)


def example_cubic(c1: float, c2: float) -> np.ndarray:
    """Coefficients (highest first) of the cubic in k^2 whose roots are the
    wavenumbers with a purely imaginary eigenvalue."""
    e = c1 - 2 * c2
    return np.array([48.0, 56 - e**2 - 4 * c2 * e, 19 - c2 * e, 2.0])


def cubic_discriminant(p) -> float:
    a, b, c, d = p
    return 18 * a * b * c * d - 4 * b**3 * d + b**2 * c**2 - 4 * a * c**3 - 27 * a**2 * d**2


def _disc_grad(c1: float, c2: float) -> np.ndarray:
    """Exact gradient of the discriminant with respect to (c1, c2)."""
    a, b, c, d = example_cubic(c1, c2)
    e = c1 - 2 * c2
    dD_db = 18 * a * c * d - 12 * b**2 * d + 2 * b * c**2
    dD_dc = 18 * a * b * d + 2 * b**2 * c - 12 * a * c**2
    db = np.array([-2 * e - 4 * c2, 8 * c2])
    dc = np.array([-c2, 2 * c2 - e])
    return dD_db * db + dD_dc * dc


def solve_example_family(seed=(10.5, 1.22), tol: float = 1e-12, max_iter: int = 60):
    """Point of the discriminant curve where c1 is stationary.

    Solves (Delta(c) = 0, dDelta/dc2 = 0) by Newton; the second equation picks
    the smallest c1 admitting a positive double root.  Returns
    (c1, c2, k_star, dDelta/dmu along c + mu (1, 0)).
    """
    c = np.array(seed, dtype=float)

    def F(x):
        return np.array([cubic_discriminant(example_cubic(*x)), _disc_grad(*x)[1]])

    for _ in range(max_iter):
        f = F(c)
        h = 1e-7
        J = np.column_stack([(F(c + h * e) - F(c - h * e)) / (2 * h) for e in np.eye(2)])
        step = np.linalg.solve(J, -f)
        c = c + step
        if np.max(np.abs(step)) < tol:
            break
    else:
        raise NoConvergence(f"family Newton did not converge from {seed}")
    p = example_cubic(*c)
    # the double root in k^2 is the common root of p and p'
    zs = np.roots(np.polyder(p))
    z = zs[np.argmin(np.abs(np.polyval(p, zs)))].real
    if z <= 0:
        raise NegativeDoubleRoot(f"double root k^2 = {z}")
    return float(c[0]), float(c[1]), float(np.sqrt(z)), float(_disc_grad(*c)[0])

"""Pseudo-spectral Benjamin-Ono solver on the 2pi-periodic torus.

States are zero-mean real functions stored by their positive-frequency
Fourier coefficients u_hat_n, 1 <= n <= M, in the convention

    u_hat_n = (1/2pi) int_0^{2pi} u(x) e^{-inx} dx,

so u(x) = 2 Re sum_{n>=1} u_hat_n e^{inx}.  The evolution

    u_t = H u_xx - (u^2)_x + eps * X_P(u)

is integrated with an integrating-factor RK4: the linear symbol i n|n|
is applied exactly through its propagator, the quadratic term is formed
on a collocation grid of power-of-two size >= 3M (alias-free for the
retained band) and the perturbation field is one of the two built-in
Hamiltonian families.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (BlowupDetected, NoConvergence, ParamDomain,
                     UnsupportedPerturbation)


@dataclass(frozen=True)
class RealState:
    """Zero-mean real function on the torus, stored spectrally."""

    coeffs: np.ndarray  # u_hat_1 .. u_hat_M

    def __post_init__(self):
        object.__setattr__(self, "coeffs", np.atleast_1d(np.asarray(self.coeffs, dtype=complex)))

    @property
    def M(self) -> int:
        return len(self.coeffs)

    def energy_half(self) -> float:
        """H^{1/2} diagnostic sum n |u_hat_n|^2."""
        n = np.arange(1, self.M + 1)
        return float(np.sum(n * np.abs(self.coeffs) ** 2))

    def resized(self, M: int) -> "RealState":
        c = np.zeros(M, dtype=complex)
        m = min(M, self.M)
        c[:m] = self.coeffs[:m]
        return RealState(c)


def default_grid(M: int) -> int:
    """Smallest power of two >= 3M (strictly > 3M, so products are alias-free)."""
    G = 1
    while G < 3 * M:
        G *= 2
    return G


def to_grid(state: RealState, G: int | None = None) -> np.ndarray:
    """Collocation values u(x_j), x_j = 2pi j / G."""
    G = G or default_grid(state.M)
    spec = np.zeros(G // 2 + 1, dtype=complex)
    spec[1 : state.M + 1] = state.coeffs * G
    return np.fft.irfft(spec, G)


def from_grid(values: np.ndarray, M: int) -> RealState:
    """Project grid samples onto the zero-mean band n = 1..M."""
    G = len(values)
    spec = np.fft.rfft(values)
    return RealState(spec[1 : M + 1] / G)


def grid_points(G: int) -> np.ndarray:
    return 2.0 * np.pi * np.arange(G) / G


def project_zero_mean(values: np.ndarray, M: int | None = None) -> RealState:
    """Subtract the mean of sampled values and return the spectral state."""
    G = len(values)
    if M is None:
        M = G // 3
    return from_grid(np.asarray(values, dtype=float), M)


def hilbert(state: RealState) -> RealState:
    """Fourier multiplier -i sgn(n); acts as -i on the stored band."""
    return RealState(-1j * state.coeffs)


def antiderivative(state: RealState) -> RealState:
    """Zero-mean primitive: divide u_hat_n by i n."""
    n = np.arange(1, state.M + 1)
    return RealState(state.coeffs / (1j * n))


def derivative(state: RealState) -> RealState:
    n = np.arange(1, state.M + 1)
    return RealState(1j * n * state.coeffs)


def _quadratic_coeffs(coeffs: np.ndarray, G: int) -> np.ndarray:
    """Spectral coefficients of u^2 on the dealiased grid, band-limited to M."""
    M = len(coeffs)
    spec = np.zeros(G // 2 + 1, dtype=complex)
    spec[1 : M + 1] = coeffs * G
    u = np.fft.irfft(spec, G)
    return np.fft.rfft(u * u)[1 : M + 1] / G


def bo_rhs(state: RealState, G: int | None = None) -> RealState:
    """Unperturbed right-hand side H u_xx - (u^2)_x."""
    G = G or default_grid(state.M)
    n = np.arange(1, state.M + 1)
    linear = 1j * n * n * state.coeffs
    nonlinear = -1j * n * _quadratic_coeffs(state.coeffs, G)
    return RealState(linear + nonlinear)


@dataclass(frozen=True)
class Perturbation:
    """Hamiltonian perturbation of strength epsilon.

    kind 'none'    : epsilon ignored, zero field.
    kind 'gassot'  : P = (1/2)<u,cos>^2 + (1/2)<u,sin>^2 with the (1/2pi)
                     normalized inner product; field
                     eps (<u,sin> cos x - <u,cos> sin x).
    kind 'gradient': P = (1/2pi) int F(x, dx^{-1} u) dx for a built-in
                     analytic family F; the field is sign * eps * Pi_0
                     f(x, dx^{-1}u) with f = dF/dy.  sign=-1 is the
                     Hamiltonian field of P in the Gardner structure
                     (conserves H_BO + eps P); sign=+1 is kept available
                     behind the flag.

    Gradient terms, as JSON-friendly dicts:
      {"power": j, "const": c, "cos": [a1, a2, ...], "sin": [b1, ...]}
         adds  c_j(x) y^j  with  c_j(x) = c + sum a_m cos(mx) + b_m sin(mx)
      {"freq": k, "phase": "cos"|"sin", "const": ..., "cos": ..., "sin": ...}
         adds  c(x) cos(ky)  or  c(x) sin(ky).
    """

    kind: str = "none"
    epsilon: float = 0.0
    sign: int = -1
    terms: tuple = ()

    def __post_init__(self):
        if self.kind not in ("none", "gassot", "gradient"):
            raise UnsupportedPerturbation(f"unknown perturbation kind {self.kind!r}")
        object.__setattr__(self, "terms", tuple(dict(t) for t in self.terms))


def _term_coefficient(term: dict, x: np.ndarray) -> np.ndarray:
    c = np.full_like(x, float(term.get("const", 0.0)))
    for m, a in enumerate(term.get("cos", []), start=1):
        c += a * np.cos(m * x)
    for m, b in enumerate(term.get("sin", []), start=1):
        c += b * np.sin(m * x)
    return c


def _gradient_F_f(p: Perturbation, x: np.ndarray, y: np.ndarray):
    """Pointwise F(x, y) and f = dF/dy for the built-in families."""
    F = np.zeros_like(y)
    f = np.zeros_like(y)
    for term in p.terms:
        c = _term_coefficient(term, x)
        if "power" in term:
            j = int(term["power"])
            F += c * y**j
            if j > 0:
                f += c * j * y ** (j - 1)
        elif "freq" in term:
            k = float(term["freq"])
            if term.get("phase", "cos") == "cos":
                F += c * np.cos(k * y)
                f += -c * k * np.sin(k * y)
            else:
                F += c * np.sin(k * y)
                f += c * k * np.cos(k * y)
        else:
            raise UnsupportedPerturbation(f"gradient term needs 'power' or 'freq': {term}")
    return F, f


def _mode1_products(state: RealState) -> tuple[float, float]:
    """(<u,cos>, <u,sin>) = (Re u_hat_1, -Im u_hat_1)."""
    c1 = state.coeffs[0] if state.M >= 1 else 0.0
    return float(np.real(c1)), float(-np.imag(c1))


def perturbation_field(state: RealState, p: Perturbation, G: int | None = None) -> RealState:
    """The epsilon-scaled perturbation vector field, spectrally."""
    if p.kind == "none":
        return RealState(np.zeros(state.M, dtype=complex))
    if p.kind == "gassot":
        c, s = _mode1_products(state)
        coeffs = np.zeros(state.M, dtype=complex)
        # eps (s cos x - c sin x):  cos x -> 1/2,  sin x -> -i/2  at n = 1
        coeffs[0] = p.epsilon * (0.5 * s + 0.5j * c)
        return RealState(coeffs)
    if p.kind == "gradient":
        G = G or default_grid(state.M)
        x = grid_points(G)
        y = to_grid(antiderivative(state), G)
        _, f = _gradient_F_f(p, x, y)
        return RealState(p.sign * p.epsilon * from_grid(f, state.M).coeffs)
    raise UnsupportedPerturbation(p.kind)


def perturbation_value(state: RealState, p: Perturbation, G: int | None = None) -> float:
    """P(u) itself (without the epsilon factor)."""
    if p.kind == "none":
        return 0.0
    if p.kind == "gassot":
        c, s = _mode1_products(state)
        return 0.5 * c * c + 0.5 * s * s
    if p.kind == "gradient":
        G = 2 * (G or default_grid(state.M))  # padded quadrature grid
        x = grid_points(G)
        y = to_grid(antiderivative(state), G)
        F, _ = _gradient_F_f(p, x, y)
        return float(np.mean(F))
    raise UnsupportedPerturbation(p.kind)


def observables(state: RealState, p: Perturbation | None = None,
                G: int | None = None) -> dict:
    """Conserved-quantity record {H_BO, momentum, P_value, H_total}.

    H_BO = sum n |u_hat_n|^2 - (1/3)(1/2pi) int u^3 dx with the cubic
    quadrature on a doubled grid, momentum = (1/2pi) int u^2 = 2 sum |u_hat_n|^2.
    """
    p = p or Perturbation("none")
    G = G or default_grid(state.M)
    n = np.arange(1, state.M + 1)
    quadratic = float(np.sum(n * np.abs(state.coeffs) ** 2))
    u_pad = to_grid(state, 2 * G)
    cubic = float(np.mean(u_pad**3))
    h_bo = quadratic - cubic / 3.0
    momentum = 2.0 * float(np.sum(np.abs(state.coeffs) ** 2))
    p_value = perturbation_value(state, p, G)
    return {
        "H_BO": h_bo,
        "momentum": momentum,
        "P_value": p_value,
        "H_total": h_bo + p.epsilon * p_value,
    }


@dataclass(frozen=True)
class IntegratorConfig:
    """Time-stepping parameters; the scheme is integrating-factor RK4."""

    dt: float
    T: float
    grid: int | None = None
    sample_stride: int = 1
    blowup_ceiling: float = 1e6

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.T < 0:
            raise ValueError("T must be nonnegative")
        if self.sample_stride < 1:
            raise ValueError("sample_stride must be >= 1")
        if self.grid is not None and (self.grid & (self.grid - 1)):
            raise ValueError("grid must be a power of two")

    def grid_for(self, M: int) -> int:
        if self.grid is None:
            return default_grid(M)
        if self.grid < 3 * M:
            raise ValueError(f"grid {self.grid} below the dealiasing size 3M = {3 * M}")
        return self.grid


@dataclass
class Trajectory:
    """Sampled solution: times[i] and the coefficient rows coeffs[i, :]."""

    times: np.ndarray
    coeffs: np.ndarray  # shape (num_samples, M)

    @property
    def M(self) -> int:
        return self.coeffs.shape[1]

    def __len__(self) -> int:
        return len(self.times)

    def state(self, i: int) -> RealState:
        return RealState(self.coeffs[i])


def evolve(u0: RealState, p: Perturbation, cfg: IntegratorConfig) -> Trajectory:
    """Integrate the (perturbed) equation, sampling every sample_stride steps."""
    M = u0.M
    G = cfg.grid_for(M)
    n = np.arange(1, M + 1)
    half = np.exp(1j * n * n * (cfg.dt / 2.0))
    full = half * half
    has_pert = p.kind != "none"

    if p.kind == "gradient":
        x_pts = grid_points(G)

        def nl(c):
            rhs = -1j * n * _quadratic_coeffs(c, G)
            spec = np.zeros(G // 2 + 1, dtype=complex)
            spec[1 : M + 1] = (c / (1j * n)) * G
            y = np.fft.irfft(spec, G)
            _, f = _gradient_F_f(p, x_pts, y)
            rhs += p.sign * p.epsilon * (np.fft.rfft(f)[1 : M + 1] / G)
            return rhs

    elif p.kind == "gassot":

        def nl(c):
            rhs = -1j * n * _quadratic_coeffs(c, G)
            rhs[0] += p.epsilon * (0.5j * np.real(c[0]) - 0.5 * np.imag(c[0]))
            return rhs

    else:

        def nl(c):
            return -1j * n * _quadratic_coeffs(c, G)

    nsteps = int(round(cfg.T / cfg.dt))
    times = [0.0]
    samples = [u0.coeffs.copy()]
    c = u0.coeffs.astype(complex).copy()
    dt = cfg.dt
    for step in range(1, nsteps + 1):
        n1 = nl(c)
        ca = half * (c + (dt / 2.0) * n1)
        n2 = nl(ca)
        cb = half * c + (dt / 2.0) * n2
        n3 = nl(cb)
        cc = full * c + dt * half * n3
        n4 = nl(cc)
        c = full * c + (dt / 6.0) * (full * n1 + 2.0 * half * (n2 + n3) + n4)
        peak = float(np.max(np.abs(c)))
        if not np.isfinite(peak) or peak > cfg.blowup_ceiling:
            raise BlowupDetected(step * dt, peak)
        if step % cfg.sample_stride == 0 or step == nsteps:
            times.append(step * dt)
            samples.append(c.copy())
    return Trajectory(times=np.asarray(times), coeffs=np.asarray(samples))


def poisson_state(params, M: int) -> RealState:
    """Sum of recentered Poisson kernels: u = sum_j (P_{r_j}(x + a_j) - 1).

    Spectrally u_hat_n = sum_j r_j^n e^{i n a_j}, n >= 1.
    """
    params = [(float(r), float(a)) for r, a in params]
    for r, _ in params:
        if not 0.0 < r < 1.0:
            raise ParamDomain(f"Poisson parameter r={r} outside (0, 1)")
    n = np.arange(1, M + 1)
    coeffs = np.zeros(M, dtype=complex)
    for r, a in params:
        coeffs += r**n * np.exp(1j * n * a)
    return RealState(coeffs)


def poisson_kernel_values(r: float, x: np.ndarray) -> np.ndarray:
    """Closed form (1 - r^2) / (1 - 2 r cos x + r^2)."""
    return (1.0 - r * r) / (1.0 - 2.0 * r * np.cos(x) + r * r)


_R_CAP = 0.92  # radii above this need impractically large truncations


def _decay_cutoff(r: float) -> int:
    # index where r^n < 1e-15, clamped to a workable band
    M = int(np.ceil(-35.0 / np.log(r)))
    return int(min(max(M, 32), 1024))


def _seed_radius(t: float) -> float:
    # a single kernel of radius r carries the gap r^2/(1-r^2) to truncation
    # error, so the inverse is an excellent starting point
    return float(np.sqrt(t / (1.0 + t)))


def calibrate_gaps(target_gaps, tol: float = 1e-8, max_iter: int = 40):
    """Find kernel radii (alpha_j = 0) whose extracted gaps match the targets.

    Supports one or two targets; the extracted spectrum, not the seeding
    model, decides acceptance.  Returns (params, achieved_gaps) where
    params is a list of (r_j, 0.0) pairs accepted by poisson_state.
    """
    from scipy import optimize

    from .lax import extract_gaps

    target = np.atleast_1d(np.asarray(target_gaps, dtype=float))
    N = len(target)
    if N not in (1, 2):
        raise ParamDomain(f"calibration supports 1 or 2 gaps, got {N}")
    if np.any(target <= 0.0):
        raise ParamDomain("target gaps must be strictly positive")

    def gaps_of(radii) -> np.ndarray:
        radii = np.clip(np.atleast_1d(radii), 1e-3, _R_CAP)
        M = _decay_cutoff(float(np.max(radii)))
        state = poisson_state([(r, 0.0) for r in radii], M)
        size = max(128, int(1.5 * M) + 32)
        est = extract_gaps(state, n_max=N, tol=min(tol / 10.0, 1e-10),
                           M_L=size, max_size=16 * size)
        return est.gaps[:N]

    seeds = np.array([_seed_radius(t) for t in target])
    if np.any(seeds > _R_CAP):
        raise NoConvergence(f"target gaps {target} outside the calibrated range")

    if N == 1:
        t = float(target[0])
        r = float(seeds[0])
        g = np.nan
        for _ in range(max_iter):
            g = float(gaps_of([r])[0])
            if abs(g - t) <= tol:
                return [(r, 0.0)], np.array([g])
            # Newton step with the single-kernel model derivative 2r/(1-r^2)^2
            r = float(np.clip(r - (g - t) * (1 - r * r) ** 2 / (2 * r), 1e-3, _R_CAP))
        raise NoConvergence(f"1-gap calibration stalled at |gap - target| = {abs(g - t):.3e}")

    # aligned kernels couple the two gaps strongly; bounded least squares is
    # much more robust here than a plain Newton iteration
    sol = optimize.least_squares(
        lambda radii: gaps_of(radii) - target, x0=np.clip(seeds, 1e-3, 0.9),
        bounds=([1e-3, 1e-3], [_R_CAP, _R_CAP]), diff_step=1e-6,
        xtol=1e-14, ftol=1e-14, gtol=None, max_nfev=max_iter * 4)
    achieved = gaps_of(sol.x)
    if np.max(np.abs(achieved - target)) > tol:
        raise NoConvergence(
            f"2-gap calibration residual {np.max(np.abs(achieved - target)):.3e} above tol {tol}")
    params = [(float(np.clip(r, 1e-3, _R_CAP)), 0.0) for r in sol.x]
    return params, achieved


def best_shift_distance(state_a: RealState, state_b: RealState) -> tuple[float, float]:
    """min_theta ||a - b(. + theta)||_{L^2} and the arg-min shift.

    The L2 norm uses the (1/2pi) int convention, ||v||^2 = 2 sum |v_hat_n|^2.
    Grid search over collocation shifts followed by parabolic refinement.
    """
    M = max(state_a.M, state_b.M)
    a = state_a.resized(M).coeffs
    b = state_b.resized(M).coeffs
    n = np.arange(1, M + 1)

    def dist_sq(theta):
        return 2.0 * float(np.sum(np.abs(a - b * np.exp(1j * n * theta)) ** 2))

    G = max(4 * M, 256)
    thetas = 2.0 * np.pi * np.arange(G) / G
    # coarse scan: dist_sq(theta_j) = const - 4 Re sum_n a_n conj(b_n) e^{-in theta_j},
    # and the sum over the theta grid is a plain forward DFT of the padded products
    const = 2.0 * float(np.sum(np.abs(a) ** 2 + np.abs(b) ** 2))
    spec = np.zeros(G, dtype=complex)
    spec[n] = a * np.conj(b)
    vals = const - 4.0 * np.real(np.fft.fft(spec))
    j = int(np.argmin(vals))
    span = 2.0 * np.pi / G
    lo, hi = thetas[j] - span, thetas[j] + span
    from scipy import optimize

    res = optimize.minimize_scalar(dist_sq, bounds=(lo, hi), method="bounded",
                                   options={"xatol": 1e-14})
    theta = float(res.x)
    return float(np.sqrt(max(dist_sq(theta), 0.0))), theta

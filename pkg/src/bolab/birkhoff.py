"""Action-side arithmetic of the integrable Benjamin-Ono structure.

Everything here operates on finitely truncated action ("gap") sequences
gamma_1..gamma_M.  Indices beyond the truncation are treated as exact
zeros, so all formulas are closed-form finite sums:

    s_l     = sum_{k>=l} gamma_k          (tail partial sums)
    y_n     = sum_{l<=n} s_l              (frequency modulation)
    omega_n = n^2 - 2 y_n                 (frequency of motion)
    H2      = sum n^2 gamma_n
    H4      = sum s_n^2
    H_BO    = H2 - H4

The inverse map gamma_n = 2 y_n - y_{n+1} - y_{n-1} (with y_0 = 0 and the
N-gap extension y_{N+1} = y_N) recovers gaps from frequencies.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ChartDomain, DimensionMismatch, InvalidFrequency

# Gaps this far below zero are treated as exact zeros (cone boundary hits
# by rational approximants); anything lower is a genuine violation.
GAP_CLAMP_TOL = 1e-14


def _as_gaps(g) -> np.ndarray:
    gaps = np.asarray(getattr(g, "gaps", g), dtype=float)
    if gaps.ndim != 1:
        raise ValueError("gap sequence must be one-dimensional")
    return gaps


@dataclass(frozen=True)
class GapSequence:
    """Finite truncation gamma_1..gamma_M of a nonnegative action sequence."""

    gaps: np.ndarray

    def __post_init__(self):
        gaps = np.asarray(self.gaps, dtype=float)
        if gaps.ndim != 1:
            raise ValueError("gaps must be a one-dimensional sequence")
        if np.any(gaps < -GAP_CLAMP_TOL):
            raise ValueError(f"negative gap below clamp tolerance: min={gaps.min():.3e}")
        object.__setattr__(self, "gaps", np.where(gaps < 0.0, 0.0, gaps))

    @property
    def M(self) -> int:
        return len(self.gaps)

    def weighted_energy(self) -> float:
        """sum n^2 gamma_n over the truncation."""
        n = np.arange(1, self.M + 1)
        return float(np.sum(n * n * self.gaps))


@dataclass(frozen=True)
class FrequencyVector:
    """Frequency modulations y_1..y_N produced from a gap sequence."""

    y: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "y", np.asarray(self.y, dtype=float))

    @property
    def N(self) -> int:
        return len(self.y)


@dataclass(frozen=True)
class ReferenceTorus:
    """Reference gaps gamma*_1..gamma*_N with their derived y*."""

    gamma_star: np.ndarray
    y_star: np.ndarray

    @classmethod
    def from_gaps(cls, gamma_star) -> "ReferenceTorus":
        gamma_star = np.asarray(gamma_star, dtype=float)
        y, _ = frequencies(gamma_star)
        return cls(gamma_star=gamma_star, y_star=y.y)

    @property
    def N(self) -> int:
        return len(self.gamma_star)

    def within_bounds(self, E_m: float, E_M: float) -> bool:
        return bool(np.all(self.gamma_star > E_m) and np.all(self.gamma_star < E_M))


@dataclass(frozen=True)
class TorusChartPoint:
    """Chart coordinates: offsets/angles on the first N modes, complex pairs above.

    ``I`` holds the action offsets from a reference torus for n <= N, ``phi``
    the matching angles, and ``tail_xi``/``tail_eta`` the untouched complex
    coordinates for N < n <= M.  Real states satisfy tail_eta = conj(tail_xi).
    """

    I: np.ndarray
    phi: np.ndarray
    tail_xi: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=complex))
    tail_eta: np.ndarray = None

    def __post_init__(self):
        object.__setattr__(self, "I", np.atleast_1d(np.asarray(self.I)))
        object.__setattr__(self, "phi", np.atleast_1d(np.asarray(self.phi, dtype=float)))
        object.__setattr__(self, "tail_xi", np.atleast_1d(np.asarray(self.tail_xi, dtype=complex)))
        if self.tail_eta is None:
            object.__setattr__(self, "tail_eta", np.conj(self.tail_xi))
        else:
            object.__setattr__(self, "tail_eta", np.atleast_1d(np.asarray(self.tail_eta, dtype=complex)))
        if len(self.I) != len(self.phi):
            raise DimensionMismatch("I and phi must have the same length")
        if len(self.tail_xi) != len(self.tail_eta):
            raise DimensionMismatch("tail_xi and tail_eta must have the same length")

    @property
    def N(self) -> int:
        return len(self.I)

    def is_real(self, tol: float = 1e-12) -> bool:
        return bool(
            np.all(np.abs(np.imag(self.I)) <= tol)
            and np.all(np.abs(self.tail_eta - np.conj(self.tail_xi)) <= tol)
        )

    def offset_sequence(self) -> np.ndarray:
        """The I-sequence (offsets then tail products xi_n eta_n)."""
        tail = self.tail_xi * self.tail_eta
        if self.is_real():
            return np.concatenate([np.real(self.I), np.real(tail)])
        return np.concatenate([np.asarray(self.I, dtype=complex), tail])


def partial_sums(g) -> np.ndarray:
    """Tail sums s_l = sum_{k>=l} gamma_k for l = 1..M."""
    gaps = _as_gaps(g)
    return np.cumsum(gaps[::-1])[::-1]


def frequencies(g) -> tuple[FrequencyVector, np.ndarray]:
    """Frequency modulations y_n = sum_{l<=n} s_l and omega_n = n^2 - 2 y_n."""
    gaps = _as_gaps(g)
    y = np.cumsum(partial_sums(gaps))
    n = np.arange(1, len(gaps) + 1)
    return FrequencyVector(y), n * n - 2.0 * y


def gaps_from_frequencies(y) -> GapSequence:
    """Invert y -> gamma with y_0 = 0 and the N-gap extension y_{N+1} = y_N.

    Raises InvalidFrequency when some gamma_n drops below the clamp
    tolerance, i.e. the vector left the closed nonnegative-gap cone.
    Boundary hits within the tolerance are clamped to exact zeros.
    """
    y = np.asarray(getattr(y, "y", y), dtype=float)
    y_ext = np.concatenate([[0.0], y, [y[-1]]])
    gaps = 2.0 * y_ext[1:-1] - y_ext[2:] - y_ext[:-2]
    if np.any(gaps < -GAP_CLAMP_TOL):
        raise InvalidFrequency(
            f"frequency vector maps outside the gap cone: min gamma = {gaps.min():.3e}"
        )
    return GapSequence(gaps)


def hamiltonians(g) -> tuple[float, float, float]:
    """(H2, H4, H_BO) = (sum n^2 gamma_n, sum s_n^2, H2 - H4)."""
    gaps = _as_gaps(g)
    n = np.arange(1, len(gaps) + 1)
    s = partial_sums(gaps)
    h2 = float(np.sum(n * n * gaps))
    h4 = float(np.sum(s * s))
    return h2, h4, h2 - h4


def h_omega(p: TorusChartPoint, ref: ReferenceTorus) -> float:
    """Linearized-energy Lyapunov function at the reference torus.

    h_omega = sum_{n<=N} (n^2 - 2 y*_n) I_n
            + sum_{n>N}  (n^2 - 2 y*_N) xi_n eta_n
    """
    if p.N != ref.N:
        raise DimensionMismatch(f"point has N={p.N}, reference has N={ref.N}")
    N = ref.N
    n_head = np.arange(1, N + 1)
    head = np.sum((n_head * n_head - 2.0 * ref.y_star) * p.I)
    n_tail = np.arange(N + 1, N + 1 + len(p.tail_xi))
    tail = np.sum((n_tail * n_tail - 2.0 * ref.y_star[-1]) * (p.tail_xi * p.tail_eta))
    total = head + tail
    return float(np.real(total)) if p.is_real() else complex(total)


def h_omega_of_gaps(gaps, ref: ReferenceTorus) -> float:
    """h_omega evaluated on a real gap sequence (offsets relative to ref)."""
    gaps = _as_gaps(gaps)
    if len(gaps) < ref.N:
        raise DimensionMismatch("gap sequence shorter than the reference torus")
    I = gaps[: ref.N] - ref.gamma_star
    tail = gaps[ref.N:]
    p = TorusChartPoint(I=I, phi=np.zeros(ref.N), tail_xi=np.sqrt(np.maximum(tail, 0.0)))
    return h_omega(p, ref)


def expansion_check(g, ref: ReferenceTorus) -> float:
    """Residual of the exact expansion of H_BO at a reference torus.

    With I_n = gamma_n - gamma*_n (gamma*_n = 0 for n > N):

      H_BO(gamma) = H_BO(gamma*) + sum_{n<=N} (n^2 - 2y*_n) I_n
                  + sum_{n>N} (n^2 - 2y*_N) gamma_n - H4(I)

    holds identically; the return value is |lhs - rhs| and must vanish to
    rounding.  Both sides cancel against each other at the scale of H2, so
    they are evaluated in extended precision to keep the residual a
    measurement of the identity rather than of double-rounding noise.
    """
    gaps = _as_gaps(g).astype(np.longdouble)
    N = ref.N
    if len(gaps) < N:
        raise DimensionMismatch("gap sequence shorter than the reference torus")
    gamma_star = np.asarray(ref.gamma_star, dtype=np.longdouble)

    def h_bo_of(seq):
        n = np.arange(1, len(seq) + 1, dtype=np.longdouble)
        s = np.cumsum(seq[::-1])[::-1]
        return np.sum(n * n * seq) - np.sum(s * s)

    y_star = np.cumsum(np.cumsum(gamma_star[::-1])[::-1])
    I = gaps.copy()
    I[:N] -= gamma_star
    s_I = np.cumsum(I[::-1])[::-1]
    h4_I = np.sum(s_I * s_I)
    n_head = np.arange(1, N + 1, dtype=np.longdouble)
    linear = np.sum((n_head * n_head - 2.0 * y_star) * I[:N])
    n_tail = np.arange(N + 1, len(gaps) + 1, dtype=np.longdouble)
    linear += np.sum((n_tail * n_tail - 2.0 * y_star[-1]) * gaps[N:])
    return float(abs(h_bo_of(gaps) - (h_bo_of(gamma_star) + linear - h4_I)))


def wrap_angle(phi):
    """Representative of an angle in (-pi, pi]."""
    phi = np.asarray(phi, dtype=float)
    wrapped = -np.mod(-phi + np.pi, 2.0 * np.pi) + np.pi
    return wrapped if wrapped.ndim else float(wrapped)


def phase_norm(p: TorusChartPoint, R: float) -> float:
    """Weighted phase-space norm with angle representatives in (-pi, pi].

    ||(I, phi, xi, eta)|| = sum_{n<=N} n^2 |I_n| / R
                          + R sup_{n<=N} |phi_n|
                          + sqrt(sum_{n>N} n^2 (|xi_n|^2 + |eta_n|^2))
    """
    if R <= 0:
        raise ValueError("R must be positive")
    N = p.N
    n_head = np.arange(1, N + 1)
    total = float(np.sum(n_head * n_head * np.abs(p.I))) / R
    if N:
        total += R * float(np.max(np.abs(wrap_angle(p.phi))))
    n_tail = np.arange(N + 1, N + 1 + len(p.tail_xi))
    total += float(
        np.sqrt(np.sum(n_tail * n_tail * (np.abs(p.tail_xi) ** 2 + np.abs(p.tail_eta) ** 2)))
    )
    return total


def in_domain_G(p: TorusChartPoint, ref: ReferenceTorus, eps1: float) -> bool:
    """Membership in the confinement domain: H4(I) <= eps1^2 and h_omega <= eps1."""
    I_seq = p.offset_sequence()
    s = np.cumsum(I_seq[::-1])[::-1]
    h4 = float(np.real(np.sum(s * s)))
    return h4 <= eps1 * eps1 and h_omega(p, ref) <= eps1


def chart_to_birkhoff(p: TorusChartPoint, ref: ReferenceTorus) -> tuple[np.ndarray, np.ndarray]:
    """Full complex pairs: sqrt(I_n + gamma*_n) e^{+-i phi_n} head, identity tail."""
    if p.N != ref.N:
        raise DimensionMismatch(f"point has N={p.N}, reference has N={ref.N}")
    actions = np.real(p.I) + ref.gamma_star
    if np.any(actions < 0.0):
        raise ChartDomain(f"I_n + gamma*_n < 0 (min {actions.min():.3e})")
    radius = np.sqrt(actions)
    xi = np.concatenate([radius * np.exp(1j * p.phi), p.tail_xi])
    eta = np.concatenate([radius * np.exp(-1j * p.phi), p.tail_eta])
    return xi, eta


def birkhoff_to_chart(xi, eta, ref: ReferenceTorus) -> TorusChartPoint:
    """Inverse of chart_to_birkhoff; angles returned in (-pi, pi]."""
    xi = np.asarray(xi, dtype=complex)
    eta = np.asarray(eta, dtype=complex)
    N = ref.N
    if len(xi) < N:
        raise DimensionMismatch("coordinate sequence shorter than the reference torus")
    head = xi[:N]
    I = np.real(head * eta[:N]) - ref.gamma_star
    phi = np.angle(head)
    return TorusChartPoint(I=I, phi=phi, tail_xi=xi[N:], tail_eta=eta[N:])


def unperturbed_flow(g, phi0, t: float) -> np.ndarray:
    """Angles after time t of the integrable flow: phi_n + omega_n(gamma) t mod 2pi."""
    gaps = _as_gaps(g)
    phi0 = np.atleast_1d(np.asarray(phi0, dtype=float))
    if len(gaps) < len(phi0):
        gaps = np.concatenate([gaps, np.zeros(len(phi0) - len(gaps))])
    _, omega = frequencies(gaps)
    return np.mod(phi0 + omega[: len(phi0)] * t, 2.0 * np.pi)


@dataclass(frozen=True)
class TangentVector:
    dI: np.ndarray
    dphi: np.ndarray
    dxi: np.ndarray
    deta: np.ndarray


def x_h4(p: TorusChartPoint) -> TangentVector:
    """Hamiltonian vector field of H4 at a chart point.

    Components (dI_n, dphi_n, dxi_n, deta_n) = (0, 2 y_n, 2i y_n xi_n,
    -2i y_n eta_n), with y_n evaluated on the point's own I-sequence.  The
    tail products xi_n eta_n are exactly invariant along this field.
    """
    I_seq = p.offset_sequence()
    s = np.cumsum(I_seq[::-1])[::-1]
    y = np.cumsum(s)
    N = p.N
    return TangentVector(
        dI=np.zeros(N),
        dphi=2.0 * np.real(y[:N]) if p.is_real() else 2.0 * y[:N],
        dxi=2j * y[N:] * p.tail_xi,
        deta=-2j * y[N:] * p.tail_eta,
    )


def h4_of_offsets(I_seq) -> float:
    """H4 evaluated on an offset sequence (entries may be negative)."""
    I_seq = np.asarray(I_seq, dtype=float)
    s = np.cumsum(I_seq[::-1])[::-1]
    return float(np.sum(s * s))

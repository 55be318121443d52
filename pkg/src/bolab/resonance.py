"""Resonant-torus construction and stability certificates.

The pipeline: approximate the frequency vector of a target torus by a
rational vector k/q (simultaneous Dirichlet approximation, exhaustive
smallest-q search), rebuild the nearby resonant torus from k/q, then
evaluate the stability constants (eps2, R^2, mu, time horizons) and all
hypothesis inequalities into a JSON-serializable certificate.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, asdict

import numpy as np

from .birkhoff import frequencies, gaps_from_frequencies
from .errors import DivisionGuard, InvalidFrequency

#: slack used when comparing floating-point errors against the Dirichlet bound
BOUND_SLACK = 1e-12


@dataclass(frozen=True)
class RationalApproximant:
    """Simultaneous rational approximation y_n ~ k_n / q with q <= Q."""

    q: int
    k: np.ndarray
    err_bound: float   # 1 / (q Q^{1/N})
    err_actual: float  # max_n |y_n - k_n/q|
    bound_met: bool = True

    def __post_init__(self):
        object.__setattr__(self, "k", np.asarray(self.k, dtype=int))


@dataclass(frozen=True)
class ResonantTorus:
    """Torus with rational frequency vector y* = k/q and gaps gamma*."""

    y_star: np.ndarray
    gamma_star: np.ndarray
    valid: bool
    q: int
    distance_bound: float  # 4 * err_actual, bounds |gamma*_n - gamma^0_n|


def dirichlet(y, Q: float) -> RationalApproximant:
    """Smallest q in [1, floor(Q)] with max_n |y_n - round(q y_n)/q| <= 1/(q Q^{1/N}).

    The bound is non-strict and a satisfying q always exists (Minkowski's
    convex-body theorem); if floating-point rounding defeats every q, the
    q minimizing the error is returned with bound_met=False.
    """
    y = np.asarray(getattr(y, "y", y), dtype=float)
    if Q < 1.0:
        raise ValueError("Q must be >= 1")
    N = len(y)
    root = Q ** (1.0 / N)
    best = None
    for q in range(1, int(math.floor(Q)) + 1):
        k = np.round(q * y)  # ties at half-integers round to even
        err = float(np.max(np.abs(y - k / q))) if N else 0.0
        bound = 1.0 / (q * root)
        if err <= bound + BOUND_SLACK:
            return RationalApproximant(q=q, k=k, err_bound=bound, err_actual=err)
        if best is None or err < best.err_actual:
            best = RationalApproximant(q=q, k=k, err_bound=bound, err_actual=err,
                                       bound_met=False)
    return best


def build_resonant_torus(approx: RationalApproximant, N: int) -> ResonantTorus:
    """Resonant torus at y* = k/q; valid only if strictly inside the gap cone."""
    y_star = approx.k[:N] / approx.q
    try:
        gamma_star = gaps_from_frequencies(y_star).gaps
        valid = bool(np.all(gamma_star > 0.0))
    except InvalidFrequency:
        y_ext = np.concatenate([[0.0], y_star, [y_star[-1]]])
        gamma_star = 2.0 * y_ext[1:-1] - y_ext[2:] - y_ext[:-2]
        valid = False
    return ResonantTorus(y_star=y_star, gamma_star=gamma_star, valid=valid,
                         q=approx.q, distance_bound=4.0 * approx.err_actual)


def choose_Q(epsilon: float, N: int, E_M: float, Ktilde: float) -> float:
    """Denominator budget Q = (max{Ktilde/(40 N^3 E_M)^2, 1} eps)^{-N/(2(N+1))}."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    factor = max(Ktilde / (40.0 * N**3 * E_M) ** 2, 1.0)
    return (factor * epsilon) ** (-N / (2.0 * (N + 1)))


def certificate_constants(q: int, Q: float, N: int, E_M: float,
                          epsilon: float) -> tuple[float, float, float]:
    """(eps2, Rsq, mu) = (10 N^3/(q Q^{1/N}), 40 N^3 E_M/(q Q^{1/N}), (Rsq + eps/Rsq) q)."""
    denom = q * Q ** (1.0 / N)
    eps2 = 10.0 * N**3 / denom
    rsq = 40.0 * N**3 * E_M / denom
    if rsq == 0.0:
        raise DivisionGuard("R^2 underflowed to zero")
    mu = (rsq + epsilon / rsq) * q
    return eps2, rsq, mu


def appendix_constants(E: float, E0: float, omega0: float, omegaP: float,
                       omega: float) -> tuple[float, float, bool]:
    """Normal-form constants (mu_bg, E_sharp, mu_bg < 1/2).

    mu_bg = 2^6 e pi (omega0 + omegaP) / omega
    E_sharp = max{E, 2 omegaP (3E + E0) / (9 omegaP + 5 omega0)}
    """
    if omega <= 0:
        raise ValueError("omega must be positive")
    mu_bg = 64.0 * math.e * math.pi * (omega0 + omegaP) / omega
    if omegaP == 0.0 and omega0 == 0.0:
        ratio = 0.0
    else:
        ratio = 2.0 * omegaP * (3.0 * E + E0) / (9.0 * omegaP + 5.0 * omega0)
    e_sharp = max(E, ratio)
    return mu_bg, e_sharp, mu_bg < 0.5


def stability_times(Rsq: float, epsilon: float, mu: float, muStar: float,
                    K: float, C4: float, C5: float, N: int) -> tuple[float, float]:
    """(T_normalform, T_theorem); overflow saturates to +inf.

    T_normalform = (Rsq^2 / (K eps)) exp(muStar / mu)
    T_theorem    = C4 exp(C5 / eps^{1/(2(N+1))})
    """
    try:
        t_nf = (Rsq * Rsq / (K * epsilon)) * math.exp(muStar / mu)
    except OverflowError:
        t_nf = math.inf
    try:
        t_thm = C4 * math.exp(C5 / epsilon ** (1.0 / (2.0 * (N + 1))))
    except OverflowError:
        t_thm = math.inf
    return t_nf, t_thm


@dataclass(frozen=True)
class CertificateConstants:
    """Configurable constants the theory leaves existential; defaults label them 1."""

    muStar: float = 1.0
    K: float = 1.0
    Ktilde: float = 1.0
    C4: float = 1.0
    C5: float = 1.0


def _flag(lhs: float, rhs: float, strict: bool = False) -> dict:
    passed = lhs < rhs if strict else lhs <= rhs
    return {"lhs": float(lhs), "rhs": float(rhs), "strict": strict, "passed": bool(passed)}


@dataclass
class StabilityCertificate:
    """All quantities of the resonant-torus stability estimate, re-checkable from its fields."""

    N: int
    E_m: float
    E_M: float
    epsilon: float
    Ktilde: float
    Q: float
    q: int
    k: list
    gammaStar: list
    Rsq: float
    eps1: float
    eps2: float
    mu: float
    muStar: float
    h_omega_0_bound: float
    H4_0_bound: float
    time_estimate_normalform: float
    time_estimate_theorem: float
    hypothesis_flags: dict = field(default_factory=dict)
    gamma0: list = field(default_factory=list)
    tail_energy: float = 0.0
    err_actual: float = 0.0
    torus_valid: bool = True
    constants_configurable: bool = True

    def all_passed(self) -> bool:
        return all(f["passed"] for f in self.hypothesis_flags.values())

    def recompute_flags(self) -> dict:
        """Re-evaluate every recorded inequality from the stored fields."""
        return {name: _flag(f["lhs"], f["rhs"], f["strict"])
                for name, f in self.hypothesis_flags.items()}

    def to_json(self, indent: int = 2) -> str:
        doc = asdict(self)
        doc["k"] = [int(v) for v in self.k]
        return json.dumps(doc, indent=indent)

    @classmethod
    def from_json(cls, text: str) -> "StabilityCertificate":
        return cls(**json.loads(text))


def full_certificate(gamma0, tail_energy: float, epsilon: float, E_m: float,
                     E_M: float, config: CertificateConstants | None = None) -> StabilityCertificate:
    """Run the full geometric pipeline on target gaps gamma^0_1..gamma^0_N.

    Composes choose_Q -> dirichlet -> build_resonant_torus ->
    certificate_constants -> stability_times and records every hypothesis
    inequality with both sides.  A torus outside the gap cone yields a
    failed certificate, not an exception.
    """
    config = config or CertificateConstants()
    gamma0 = np.asarray(getattr(gamma0, "gaps", gamma0), dtype=float)
    N = len(gamma0)
    if N < 1:
        raise ValueError("need at least one target gap")

    y0, _ = frequencies(gamma0)
    Q = max(choose_Q(epsilon, N, E_M, config.Ktilde), 1.0)
    approx = dirichlet(y0, Q)
    torus = build_resonant_torus(approx, N)
    eps2, rsq, mu = certificate_constants(approx.q, Q, N, E_M, epsilon)
    t_nf, t_thm = stability_times(rsq, epsilon, mu, config.muStar, config.K,
                                  config.C4, config.C5, N)

    # Certified upper bound on |h_omega| at t=0: exact head part from the
    # known offsets, tail bounded through the weighted tail energy.
    I_head = gamma0 - torus.gamma_star
    n = np.arange(1, N + 1)
    y_star = torus.y_star
    head = float(np.sum((n * n + 2.0 * np.abs(y_star)) * np.abs(I_head)))
    tail = tail_energy * (1.0 + 2.0 * abs(y_star[-1]) / (N + 1) ** 2)
    h_omega_0_bound = head + tail

    # Upper bound on H4 at t=0: |s_n(I)| <= |head tail sums| + tail mass for
    # n <= N, and sum_{n>N} s_n^2 <= tail_energy^2 sum n^{-4}.
    tail_mass = tail_energy / (N + 1) ** 2
    s_head = np.cumsum(I_head[::-1])[::-1]
    zeta4_tail = float(np.sum(1.0 / np.arange(N + 1, N + 1001) ** 4))
    H4_0_bound = float(np.sum((np.abs(s_head) + tail_mass) ** 2)) \
        + tail_energy**2 * zeta4_tail

    flags = {
        "dirichlet_bound": _flag(approx.err_actual, approx.err_bound + BOUND_SLACK),
        "torus_in_cone": _flag(0.0 if torus.valid else 1.0, 0.5),
        "ini1_lower": _flag(E_m, float(np.min(gamma0))),
        "ini1_upper": _flag(float(np.max(gamma0)), E_M),
        "ini3_tail": _flag(tail_energy, eps2),
        "h_omega_chain": _flag(h_omega_0_bound, rsq),
        "H4_chain": _flag(H4_0_bound, 2.0 * eps2 * eps2),
        "ini_data_h_omega": _flag(h_omega_0_bound, rsq / 2.0),
        "ini_data_H4": _flag(H4_0_bound, (rsq / 2.0) ** 2),
        "varie_mu": _flag(mu, config.muStar / 2.0, strict=True),
        "varie_eps_q": _flag(epsilon * approx.q, rsq / config.K),
        "varie_eps_R4": _flag(epsilon, rsq * rsq / config.Ktilde),
        "E_M_geq_1": _flag(1.0, E_M),
    }

    return StabilityCertificate(
        N=N, E_m=E_m, E_M=E_M, epsilon=epsilon, Ktilde=config.Ktilde,
        Q=Q, q=approx.q, k=[int(v) for v in approx.k],
        gammaStar=[float(v) for v in torus.gamma_star],
        Rsq=rsq, eps1=rsq, eps2=eps2, mu=mu, muStar=config.muStar,
        h_omega_0_bound=h_omega_0_bound, H4_0_bound=H4_0_bound,
        time_estimate_normalform=t_nf, time_estimate_theorem=t_thm,
        hypothesis_flags=flags,
        gamma0=[float(v) for v in gamma0], tail_energy=float(tail_energy),
        err_actual=approx.err_actual, torus_valid=torus.valid,
    )

"""Fast built-in property suite: the sub-second acceptance checks.

Each check returns (passed, detail).  The CLI command `validate` runs them
and exits nonzero if any fails; the slower simulation-based criteria live
in the test suite only.
"""

from __future__ import annotations

import numpy as np

from . import birkhoff as bk
from . import lax, pde
from . import resonance as rs


def check_roundtrip(samples: int = 1000, seed: int = 12345) -> tuple[bool, str]:
    """gamma -> y -> gamma is the identity on random nonnegative gaps, N <= 8."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        N = int(rng.integers(1, 9))
        gamma = rng.uniform(0.0, 1.0, N) + 1e-12
        y, _ = bk.frequencies(gamma)
        back = bk.gaps_from_frequencies(y)
        worst = max(worst, float(np.max(np.abs(back.gaps - gamma))))
    return worst <= 1e-12, f"max roundtrip error {worst:.3e} (tol 1e-12)"


def check_expansion(samples: int = 1000, seed: int = 23456) -> tuple[bool, str]:
    """Exactness of the H_BO expansion at random reference tori, M <= 32."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        M = int(rng.integers(2, 33))
        N = int(rng.integers(1, M + 1))
        gamma = rng.uniform(0.0, 1.0, M)
        gamma_star = rng.uniform(0.0, 1.0, N)
        ref = bk.ReferenceTorus.from_gaps(gamma_star)
        worst = max(worst, bk.expansion_check(gamma, ref))
    return worst < 1e-12, f"max expansion residual {worst:.3e} (tol 1e-12)"


def check_dirichlet(samples: int = 1000, seed: int = 34567) -> tuple[bool, str]:
    """Approximation bound and q <= Q over random frequency vectors."""
    rng = np.random.default_rng(seed)
    E_M = 1.0
    worst_excess = -np.inf
    for _ in range(samples):
        N = int(rng.integers(1, 4))
        Q = float(rng.choice([10.0, 100.0]))
        y = rng.uniform(0.0, N * N * E_M, N)
        approx = rs.dirichlet(y, Q)
        if approx.q > Q:
            return False, f"q={approx.q} exceeded Q={Q}"
        worst_excess = max(worst_excess, approx.err_actual - approx.err_bound)
    return worst_excess <= 1e-12, f"worst err-bound excess {worst_excess:.3e} (slack 1e-12)"


def check_lax_baseline() -> tuple[bool, str]:
    """Zero state has zero gaps; the r=0.5 kernel state is one-gap."""
    zero_gaps, _, _ = lax.truncation_gaps(pde.RealState(np.zeros(8)), n_max=6, M_L=64)
    if np.max(np.abs(zero_gaps)) >= 1e-12:
        return False, f"u=0 gaps reach {np.max(np.abs(zero_gaps)):.3e} at M_L=64"
    state = pde.poisson_state([(0.5, 0.0)], 64)
    gaps, _, _ = lax.truncation_gaps(state, n_max=8, M_L=128)
    high = float(np.max(np.abs(gaps[1:])))
    ok = gaps[0] > 0.0 and high < 1e-8
    return ok, f"gamma_1={gaps[0]:.12f}, max gamma_n (n>=2) = {high:.3e} (tol 1e-8)"


def check_certificate_arithmetic() -> tuple[bool, str]:
    """Frozen constant formulas and certificate JSON round-trip."""
    mu_bg, e_sharp, _ = rs.appendix_constants(1.0, 2.0, 1.0, 1.0, 1.0)
    expected = 128.0 * np.e * np.pi
    if abs(mu_bg - expected) / expected > 1e-6:
        return False, f"mu_bg {mu_bg!r} != 128 e pi"
    if e_sharp != 1.0:
        return False, f"E_sharp {e_sharp!r} != 1"
    if rs.choose_Q(1e-4, 1, 1.0, 1.0) != 10.0:
        return False, f"choose_Q(1e-4,1,1,1) = {rs.choose_Q(1e-4, 1, 1.0, 1.0)!r} != 10"
    cert = rs.full_certificate([0.318], 0.0, 1e-4, 0.1, 1.0)
    clone = rs.StabilityCertificate.from_json(cert.to_json())
    flags = {k: v["passed"] for k, v in cert.hypothesis_flags.items()}
    reflags = {k: v["passed"] for k, v in clone.recompute_flags().items()}
    if flags != reflags:
        return False, "certificate flags changed across JSON round-trip"
    return True, "constants exact; certificate round-trip stable"


CHECKS = {
    "roundtrip": check_roundtrip,
    "expansion": check_expansion,
    "dirichlet": check_dirichlet,
    "lax-baseline": check_lax_baseline,
    "certificate": check_certificate_arithmetic,
}


def run_checks(names=None) -> list[tuple[str, bool, str]]:
    names = list(names) if names else list(CHECKS)
    unknown = [n for n in names if n not in CHECKS]
    if unknown:
        raise KeyError(f"unknown checks: {unknown}; available: {sorted(CHECKS)}")
    return [(name, *CHECKS[name]()) for name in names]

import math

import numpy as np
import pytest

from bolab import resonance as rs
from bolab.errors import DivisionGuard


def brute_force_dirichlet(y, Q):
    """Independent oracle: scan every q and report the smallest satisfying one."""
    y = np.asarray(y, dtype=float)
    root = Q ** (1.0 / len(y))
    for q in range(1, int(math.floor(Q)) + 1):
        k = np.round(q * y)
        if np.max(np.abs(y - k / q)) <= 1.0 / (q * root) + rs.BOUND_SLACK:
            return q, k
    return None, None


class TestDirichlet:
    def test_scalar_example(self):
        a = rs.dirichlet([0.318], 10.0)
        assert a.q == 3 and a.k.tolist() == [1]
        assert a.err_actual == pytest.approx(abs(0.318 - 1 / 3))
        assert a.err_actual <= 1 / 30

    def test_integer_vector_exact(self):
        a = rs.dirichlet([2.0, 5.0, 1.0], 50.0)
        assert a.q == 1 and a.k.tolist() == [2, 5, 1] and a.err_actual == 0.0

    def test_inclusive_bound_convention(self):
        # q=1 with k=(0,0) sits exactly on the non-strict bound 1/(1*sqrt(4)) = 0.5
        a = rs.dirichlet([0.5, 0.25], 4.0)
        q_oracle, k_oracle = brute_force_dirichlet([0.5, 0.25], 4.0)
        assert a.q == q_oracle and a.k.tolist() == list(k_oracle)
        assert a.err_actual <= a.err_bound + rs.BOUND_SLACK

    def test_smallest_q_matches_oracle(self):
        rng = np.random.default_rng(41)
        for _ in range(200):
            N = int(rng.integers(1, 4))
            Q = float(rng.choice([10.0, 100.0]))
            y = rng.uniform(0, N * N, N)
            a = rs.dirichlet(y, Q)
            q_oracle, _ = brute_force_dirichlet(y, Q)
            assert a.bound_met and a.q == q_oracle

    def test_guarantee_random(self):
        rng = np.random.default_rng(43)
        for _ in range(300):
            N = int(rng.integers(1, 4))
            Q = float(rng.choice([10.0, 100.0]))
            a = rs.dirichlet(rng.uniform(0, N * N, N), Q)
            assert a.q <= Q
            assert a.err_actual <= a.err_bound + 1e-12

    def test_rejects_Q_below_one(self):
        with pytest.raises(ValueError):
            rs.dirichlet([0.5], 0.5)


class TestResonantTorus:
    def test_rational_input_is_fixed_point(self):
        # gamma_0 = 1/4 has y = 1/4; the q=4 approximant reproduces it exactly
        a = rs.dirichlet([0.25], 100.0)
        torus = rs.build_resonant_torus(a, 1)
        assert torus.q == 4
        np.testing.assert_allclose(torus.gamma_star, [0.25])
        assert torus.valid

    def test_single_gap_identity(self):
        a = rs.RationalApproximant(q=3, k=[1], err_bound=0.1, err_actual=0.0)
        torus = rs.build_resonant_torus(a, 1)
        np.testing.assert_allclose(torus.gamma_star, [1 / 3])

    def test_cone_violation_flagged_not_raised(self):
        a = rs.RationalApproximant(q=1, k=[0, 1], err_bound=1.0, err_actual=0.5)
        torus = rs.build_resonant_torus(a, 2)
        assert not torus.valid

    def test_distance_bound(self):
        from bolab.birkhoff import frequencies

        rng = np.random.default_rng(47)
        E_m, E_M, Q = 0.1, 1.0, 100.0
        for _ in range(100):
            N = int(rng.integers(1, 4))
            gamma0 = rng.uniform(E_m, E_M, N)
            y0, _ = frequencies(gamma0)
            a = rs.dirichlet(y0, Q)
            torus = rs.build_resonant_torus(a, N)
            if torus.valid:
                dist = np.max(np.abs(torus.gamma_star - gamma0))
                assert dist <= 4.0 / (a.q * Q ** (1.0 / N)) + 1e-12
                assert dist <= torus.distance_bound + 1e-12


class TestConstants:
    def test_choose_Q_values(self):
        assert rs.choose_Q(1e-4, 1, 1.0, 1.0) == 10.0
        assert rs.choose_Q(1.0, 1, 1.0, 1.0) == 1.0
        assert rs.choose_Q(1e-6, 2, 1.0, 1.0) == pytest.approx(100.0)

    def test_choose_Q_monotone_in_epsilon(self):
        rng = np.random.default_rng(53)
        for _ in range(100):
            e1, e2 = sorted(rng.uniform(1e-8, 1.0, 2))
            assert rs.choose_Q(e1, 2, 1.0, 1.0) >= rs.choose_Q(e2, 2, 1.0, 1.0)

    def test_certificate_constants_hand_values(self):
        eps2, rsq, mu = rs.certificate_constants(1, 10.0, 1, 1.0, 1e-4)
        assert (eps2, rsq) == (1.0, 4.0)
        assert mu == pytest.approx(4.0 + 1e-4 / 4.0)
        eps2, rsq, mu = rs.certificate_constants(3, 10.0, 1, 1.0, 1e-4)
        assert rsq == pytest.approx(4.0 / 3.0)
        assert mu == pytest.approx((4.0 / 3.0 + 7.5e-5) * 3.0)

    def test_balanced_point(self):
        # with eps = Rsq^2 the two terms agree and mu = 2 Rsq q
        q, Q, N, E_M = 2, 25.0, 1, 1.0
        _, rsq, _ = rs.certificate_constants(q, Q, N, E_M, 1.0)
        _, _, mu = rs.certificate_constants(q, Q, N, E_M, rsq * rsq)
        assert mu == pytest.approx(2 * rsq * q)

    def test_division_guard(self):
        with pytest.raises(DivisionGuard):
            rs.certificate_constants(10**160, 1e160, 1, 1.0, 1e-4)

    def test_appendix_values(self):
        mu_bg, e_sharp, small = rs.appendix_constants(1.0, 2.0, 1.0, 1.0, 1.0)
        assert mu_bg == pytest.approx(128.0 * math.e * math.pi, rel=1e-12)
        assert e_sharp == 1.0 and not small
        mu_bg, e_sharp, _ = rs.appendix_constants(3.0, 2.0, 1.0, 0.0, 1.0)
        assert mu_bg == pytest.approx(64.0 * math.e * math.pi)
        assert e_sharp == 3.0

    def test_stability_times(self):
        t_nf, _ = rs.stability_times(1.0, 1e-4, 1.0, 1.0, 1.0, 1.0, 1.0, 1)
        assert t_nf == pytest.approx(1e4 * math.e)
        # vanishing muStar/mu limit
        t_nf, _ = rs.stability_times(1.0, 1e-4, 1.0, 1e-12, 1.0, 1.0, 1.0, 1)
        assert t_nf == pytest.approx(1e4)
        # theorem-time asymptotics: log T ~ C5 eps^{-1/(2(N+1))}
        _, t_thm = rs.stability_times(1.0, 1e-8, 1.0, 1.0, 1.0, 1.0, 2.0, 1)
        assert math.log(t_thm) == pytest.approx(2.0 * (1e-8) ** -0.25)

    def test_overflow_saturates(self):
        _, t_thm = rs.stability_times(1.0, 1e-300, 1.0, 1.0, 1.0, 1.0, 1.0, 1)
        assert t_thm == math.inf


class TestFullCertificate:
    def test_rational_target_all_flags_pass(self):
        cert = rs.full_certificate([0.25], 0.0, 1e-8, 0.1, 1.0)
        assert cert.err_actual == 0.0
        assert cert.all_passed(), {k: v for k, v in cert.hypothesis_flags.items()
                                   if not v["passed"]}

    def test_composed_q3_branch(self):
        cert = rs.full_certificate([0.318], 0.0, 1e-4, 0.1, 1.0)
        assert cert.q == 3 and cert.k == [1]
        assert cert.Q == 10.0
        assert cert.Rsq == pytest.approx(4.0 / 3.0)
        assert cert.eps1 == cert.Rsq

    def test_hypothesis_violation_flagged(self):
        cert = rs.full_certificate([1.5], 0.0, 1e-4, 0.1, 1.0)
        assert not cert.hypothesis_flags["ini1_upper"]["passed"]
        assert not cert.all_passed()

    def test_json_roundtrip_identical_flags(self):
        cert = rs.full_certificate([0.318, 0.41], 1e-3, 1e-4, 0.1, 1.0)
        clone = rs.StabilityCertificate.from_json(cert.to_json())
        assert clone.hypothesis_flags == cert.hypothesis_flags
        assert clone.recompute_flags() == cert.hypothesis_flags
        assert clone.gammaStar == cert.gammaStar
        assert clone.k == cert.k

    def test_cone_failure_is_not_an_exception(self):
        # a fine-tuned pair: y nearly on the cone boundary so the rational
        # approximant can step outside; certificate must report, not raise
        cert = rs.full_certificate([0.5, 1e-4], 0.0, 1e-2, 1e-5, 1.0)
        assert isinstance(cert.torus_valid, bool)

    def test_tail_violation_flagged(self):
        cert = rs.full_certificate([0.318], 10.0, 1e-4, 0.1, 1.0)
        assert not cert.hypothesis_flags["ini3_tail"]["passed"]

    def test_json_document_field_names(self):
        import json

        doc = json.loads(rs.full_certificate([0.318], 0.0, 1e-4, 0.1, 1.0).to_json())
        required = {"N", "E_m", "E_M", "epsilon", "Ktilde", "Q", "q", "k",
                    "gammaStar", "Rsq", "eps1", "eps2", "mu", "muStar",
                    "h_omega_0_bound", "H4_0_bound", "time_estimate_normalform",
                    "time_estimate_theorem", "hypothesis_flags"}
        assert required <= set(doc)
        assert doc["eps1"] == doc["Rsq"]

import json
import math

import numpy as np
import pytest
from scipy import integrate
from scipy.special import iv

from holodual import verify as V
from holodual.geometry import DomainSpec
from holodual.quadrature import QuadratureSpec, integrate_volume
from holodual.series import CoefficientSeries, DiagonalGenerator, Space, norm2, weight_table
from holodual.transforms import log_fantappie_factor, log_laplace_factor

BALL = DomainSpec.ball()


def bessel_oracle(R):
    # slice {Re zeta_1 = x} is a 3-ball of radius sqrt(1-x^2): volume 4/3 pi (1-x^2)^{3/2}
    val, _ = integrate.quad(lambda x: math.exp(2 * R * x) * 4 / 3 * math.pi * (1 - x * x) ** 1.5, -1, 1,
                            epsabs=0, epsrel=1e-13, limit=200)
    return val


class TestExpNorm:
    @pytest.mark.parametrize("R", [1.0, 2.5, 7.0])
    def test_closed_form_matches_slice_oracle(self, R):
        assert V.exp_norm2_ball_exact(R) == pytest.approx(bessel_oracle(R), rel=1e-11)
        assert V.exp_norm2_ball_exact(R) == pytest.approx(np.pi**2 * iv(2, 2 * R) / R**2, rel=1e-13)

    def test_unit_axis_point(self):
        r = V.verify_exp_norm([np.array([1.0, 0.0])])
        assert np.isfinite(r.metrics["ratio_max"]) and r.metrics["max_bessel_oracle_rel_err"] <= 1e-10

    def test_rejects_small(self):
        with pytest.raises(ValueError):
            V.verify_exp_norm([np.zeros(2)])
        with pytest.raises(ValueError):
            V.verify_exp_norm([np.array([0.5, 0])])

    def test_spread_2_vs_20(self):
        r = V.verify_exp_norm([np.array([2.0, 0]), np.array([0, 20j])])
        assert r.passed and r.metrics["spread"] <= 10

    def test_points(self):
        pts = V.exp_norm_points()
        norms = [np.linalg.norm(p) for p in pts]
        assert len(pts) == 30 and norms[0] == pytest.approx(1) and norms[-1] == pytest.approx(20)


class TestCounterexamples:
    def test_kmax_precondition(self):
        with pytest.raises(ValueError):
            V.counterexample_fantappie(9999)
        with pytest.raises(ValueError):
            V.counterexample_laplace(100)

    @pytest.mark.parametrize("logmag, factor, space", [
        (V.fantappie_target_logmag, log_fantappie_factor, Space.A2_POLYDISC),
        (V.laplace_target_logmag, log_laplace_factor, Space.A2_PW),
    ])
    def test_small_truncation_finite(self, logmag, factor, space):
        ks = np.arange(1, 11)
        tgt = DiagonalGenerator(ks, logmag(ks.astype(float)))
        pre = DiagonalGenerator(ks, tgt.logmag - factor(ks, ks))
        for sp, g in ((space, tgt), (Space.A2_DIAMOND, pre)):
            s = g.to_series()
            assert all(np.isfinite(abs(c)) for c in s.terms.values())
            assert np.isfinite(norm2(sp, g))

    def test_laplace_logmag_finite_at_1e6(self):
        r = V.counterexample_laplace(10**6)
        assert np.isfinite(r.metrics["preimage_logmag_kmax"])
        assert np.isfinite(V.laplace_target_logmag(np.array([1e6]))).all()

    def test_fantappie_pattern(self):
        r = V.counterexample_fantappie(10**6)
        m = r.metrics
        assert r.passed
        assert m["target_converging"] and m["preimage_diverging"]
        assert m["slope"] > 0 and m["r2"] >= 0.999 and m["slope_rel_spread"] <= 0.05
        # |a_kk|^2 ||z^kk||^2 ~ c/k: the preimage sum diverges like a harmonic series
        assert {"slope_kmax_10000", "slope_kmax_100000", "slope_kmax_1000000"} <= set(m)

    def test_laplace_pattern(self):
        r = V.counterexample_laplace(10**6)
        assert r.passed and r.metrics["slope"] > 0 and r.metrics["r2"] >= 0.999

    def test_target_tail_ratio(self):
        # k^{-3/2} tails: each doubling shrinks the increment by 2^{-1/2}
        for fn in (V.counterexample_fantappie, V.counterexample_laplace):
            r = fn(10**5)
            assert r.metrics["target_last_increment_ratio"] == pytest.approx(2**-0.5, rel=2e-2)

    def test_harmonic_slope_oracle(self):
        # Laplace preimage terms are asymptotically c/k with c computable from Stirling; slope -> c
        r = V.counterexample_laplace(10**6)
        k = 1e6
        ks = np.array([k])
        tgt = V.laplace_target_logmag(ks)
        pre = tgt - log_laplace_factor(np.array([10**6]), np.array([10**6]))
        term = math.exp(2 * pre[0] + weight_table(Space.A2_DIAMOND)(10**6, 10**6))
        assert r.metrics["slope"] == pytest.approx(term * k, rel=1e-3)

    def test_slope_consistency_fantappie(self):
        r = V.counterexample_fantappie(10**6)
        ks = np.array([10**6])
        pre = V.fantappie_target_logmag(ks.astype(float)) - log_fantappie_factor(ks, ks)
        term = math.exp(2 * pre[0] + weight_table(Space.A2_DIAMOND)(10**6, 10**6))
        assert r.metrics["slope"] == pytest.approx(term * 1e6, rel=2e-3)


class TestChangeOfVariables:
    def test_ball_one(self):
        r = V.verify_change_of_variables(BALL, "one", QuadratureSpec(mode="montecarlo", mc_samples=100_000))
        assert r.metrics["lhs_dual"] == pytest.approx(np.pi**2 / 2, rel=1e-12)
        assert r.passed

    def test_ball_abs_z1(self):
        r = V.verify_change_of_variables(BALL, "abs_z1_sq", QuadratureSpec(mode="montecarlo", mc_samples=200_000))
        # int_ball |z1|^2 = pi^2/6
        assert r.metrics["lhs_dual"] == pytest.approx(np.pi**2 / 6, abs=4 * r.metrics["lhs_stderr"])
        assert r.passed

    def test_ellipsoid_volume_oracle(self):
        d = DomainSpec.ellipsoid(1, 2)
        r = V.verify_change_of_variables(d, "one", QuadratureSpec(mode="montecarlo", mc_samples=100_000))
        assert r.metrics["lhs_dual"] == pytest.approx(np.pi**2 / 2 * 0.25, rel=1e-12)
        assert r.passed

    def test_reproducible(self):
        q = QuadratureSpec(mode="montecarlo", mc_samples=50_000, seed=3)
        a = V.verify_change_of_variables(BALL, "gauss", q).to_json()
        assert a == V.verify_change_of_variables(BALL, "gauss", q).to_json()


class TestReproducing:
    def test_examples(self):
        one = CoefficientSeries.monomial((0, 0))
        assert V.reproducing_integral(one, [0, 0]) == pytest.approx(1, abs=1e-12)
        z1 = CoefficientSeries.monomial((1, 0))
        assert V.reproducing_integral(z1, [0.3, 0]) == pytest.approx(0.3, abs=1e-10)
        prod = CoefficientSeries.monomial((1, 1))
        for z in V.random_ball_points(3, 7, 0.9):
            assert abs(V.reproducing_integral(prod, z) - prod(z)) <= 1e-8

    def test_report(self):
        r = V.verify_ball_reproducing(V.monomials_up_to(2), V.random_ball_points(4, 1, 0.9))
        assert r.passed and r.metrics["cases"] == 24
        assert r.metrics["c2_times_pi2"] == pytest.approx(-2, rel=1e-12)


class TestQuadratureReports:
    def test_calibration(self):
        r = V.calibration_report()
        m = r.metrics
        assert r.passed
        assert m["fantappie_quad_f1_z0"] == pytest.approx(1 / 3, rel=1e-12)
        assert m["laplace_quad_f1_z0"] == pytest.approx(np.pi**2 / 6, rel=1e-12)
        assert m["diamond_volume"] == pytest.approx(np.pi**2 / 6, rel=1e-13)
        assert m["fantappie_dev_from_stated_1_6"] == pytest.approx(1 / 6, rel=1e-10)

    def test_diamond_volume_report(self):
        r = V.verify_diamond_volume(target=np.pi**2 / 6)
        assert r.passed
        r = V.verify_diamond_volume()
        assert not r.passed and r.metrics["rel_err"] == pytest.approx(1.0, rel=1e-10)

    def test_orthogonality_small(self):
        assert V.verify_orthogonality(max_deg=2).passed

    def test_parseval_small(self):
        assert V.verify_parseval(count=4, max_deg=4).passed

    def test_composition(self):
        assert V.verify_composition_random(max_deg=20, count=2).passed

    def test_tmap_roundtrip(self):
        assert V.verify_tmap_roundtrip(BALL).passed and V.verify_tmap_roundtrip(DomainSpec.ellipsoid(1, 2)).passed

    def test_ball_norm_exact(self):
        f = CoefficientSeries({(1, 0): 1.0, (0, 2): 2j})
        quad = integrate_volume(BALL, lambda p: np.abs(f(p)) ** 2).real
        assert V.ball_norm2_exact(f) == pytest.approx(quad, rel=1e-12)


class TestKernelEstimate:
    def test_ellipsoid(self):
        r = V.verify_kernel_estimate(DomainSpec.ellipsoid(1, 0.7))
        assert r.passed and r.metrics["min_ratio"] > 0

    def test_ball_ratios_in_analytic_range(self):
        r = V.verify_kernel_estimate(BALL)
        assert 1 / math.sqrt(5) - 1e-12 <= r.metrics["min_ratio"] and r.metrics["max_ratio_x4"] < 1


class TestSuite:
    def test_unknown(self):
        with pytest.raises(KeyError):
            V.run_suite(["nope"])

    def test_subset_sorted_and_deterministic(self, monkeypatch):
        monkeypatch.setenv("HOLODUAL_THREADS", "2")
        ids = ["tmap_roundtrip_ball", "composition", "diamond_volume"]
        a = V.run_suite(ids, kmax=10**4, mc_samples=10_000)
        assert [r.test_id for r in a] == sorted(ids)
        monkeypatch.setenv("HOLODUAL_THREADS", "1")
        b = V.run_suite(ids, kmax=10**4, mc_samples=10_000)
        assert [r.to_json() for r in a] == [r.to_json() for r in b]
        for r in a:
            json.loads(r.to_json())

    def test_worker_count(self, monkeypatch):
        monkeypatch.setenv("HOLODUAL_THREADS", "3")
        assert V.worker_count() == 3
        monkeypatch.setenv("HOLODUAL_THREADS", "0")
        assert V.worker_count() == 1

import math

import numpy as np
import pytest

from lossyphase.precision import (
    PrecisionCurve,
    PrecisionPoint,
    budget_repetitions,
    chop_optimize,
    crb_curve,
    eta_grid_default,
    golden_section,
    n_phi_ceiling,
    noon_chop_curve,
    noon_chop_n_max,
    optimize_ucs_a,
    snl_curve,
    ucs_optimal_curve,
)
from lossyphase.states import Cat, Coherent, NOON, UCS

N_PHI_CAT3 = 9.0 / (2.0 + 2.0 * math.exp(-4.5))
COARSE = np.array([0.2, 0.5, 0.8, 0.95, 1.0])


class TestGoldenSection:
    def test_parabola(self):
        x, fx = golden_section(lambda x: (x - 1.3) ** 2, 0.0, 3.0, tol=1e-8)
        assert abs(x - 1.3) < 1e-6

    def test_minimum_at_endpoint(self):
        x, fx = golden_section(lambda x: x, 2.0, 5.0, tol=1e-8)
        assert x == 2.0


class TestCrbCurve:
    def test_noon4_point(self):
        curve = crb_curve(NOON(4), [1.0])
        # m = 400 / 2, F = 16
        assert abs(curve.points[0].delta_phi - 1.0 / (4.0 * math.sqrt(200.0))) < 1e-12
        assert abs(curve.points[0].m - 200.0) < 1e-12

    def test_coherent_point(self):
        curve = crb_curve(Coherent(3.0), [1.0])
        assert abs(curve.points[0].delta_phi - 0.025) < 1e-10

    def test_cat_point(self):
        curve = crb_curve(Cat(3.0), [1.0])
        assert abs(curve.points[0].delta_phi - 0.010612443228146806) < 1e-11

    def test_budget_conserved(self):
        curve = crb_curve(Cat(2.0), COARSE, r_phi=400.0)
        for p in curve.points:
            assert abs(p.m * p.n_phi - 400.0) <= 1e-9

    def test_monotone_in_eta(self):
        for spec in [Cat(3.0), Coherent(2.0), NOON(4)]:
            curve = crb_curve(spec, COARSE)
            d = curve.deltas()
            assert np.all(np.diff(d) <= 1e-10)

    def test_grid_must_increase(self):
        p = PrecisionPoint(eta=0.5, delta_phi=0.1, m=1.0, n_phi=1.0)
        with pytest.raises(ValueError):
            PrecisionCurve("x", (p, p))


class TestSnl:
    def test_values(self):
        curve = snl_curve([0.25, 1.0], r_phi=400.0)
        assert abs(curve.points[0].delta_phi - 0.1) < 1e-15
        assert abs(curve.points[1].delta_phi - 0.05) < 1e-15

    def test_scaling_invariant(self):
        curve = snl_curve(np.linspace(0.1, 1.0, 7), r_phi=400.0)
        prods = curve.deltas() * np.sqrt(curve.etas())
        assert np.ptp(prods) < 1e-14


class TestOptimizeUcsA:
    def test_never_worse_than_balanced(self):
        for eta in COARSE:
            a_opt, delta = optimize_ucs_a(N_PHI_CAT3, float(eta))
            _, delta_bal = optimize_ucs_a(
                N_PHI_CAT3, float(eta), a_step=1.0
            )  # grid {0, 1} only
            assert delta <= delta_bal + 1e-12

    def test_no_loss_prefers_balanced(self):
        a_opt, _ = optimize_ucs_a(N_PHI_CAT3, 1.0)
        assert a_opt == 1.0

    def test_high_loss_prefers_coherent_like(self):
        a_opt, _ = optimize_ucs_a(N_PHI_CAT3, 0.05)
        assert a_opt < 0.1

    def test_frozen_point(self):
        a_opt, delta = optimize_ucs_a(N_PHI_CAT3, 0.8)
        assert abs(a_opt - 0.956419) < 1e-3
        assert abs(delta - 0.02164697461) / delta < 1e-6

    def test_beats_cat_pointwise(self):
        cat = crb_curve(Cat(3.0), COARSE)
        for eta, d_cat in zip(COARSE, cat.deltas()):
            _, d_ucs = optimize_ucs_a(N_PHI_CAT3, float(eta))
            assert d_ucs <= d_cat + 1e-12

    def test_methods_agree(self):
        a1, d1 = optimize_ucs_a(N_PHI_CAT3, 0.6, method="cat-basis")
        a2, d2 = optimize_ucs_a(N_PHI_CAT3, 0.6, method="numeric")
        assert abs(d1 - d2) / d1 < 1e-9


class TestChop:
    def test_ceiling_value(self):
        assert abs(n_phi_ceiling(5.0) - 12.499953417008948) < 1e-12

    def test_no_loss_takes_largest_state(self):
        n_opt, a_opt, delta = chop_optimize(1.0)
        assert abs(n_opt - n_phi_ceiling(5.0)) < 1e-9
        assert a_opt == 1.0
        assert abs(delta - 0.0068041264) / delta < 1e-6

    def test_interior_optimum_under_loss(self):
        n_opt, a_opt, delta = chop_optimize(0.5)
        assert n_opt < n_phi_ceiling(5.0) / 2.0
        assert abs(delta - 0.03126876) / delta < 1e-6

    def test_frozen_high_loss_point(self):
        n_opt, a_opt, delta = chop_optimize(0.2)
        assert abs(delta - 0.055057315) / delta < 1e-6
        assert a_opt < 0.5

    def test_never_worse_than_fixed_ucs(self):
        for eta in COARSE:
            a_fix, d_ucs = optimize_ucs_a(N_PHI_CAT3, float(eta))
            _, _, d_cc = chop_optimize(
                float(eta), extra_candidates=((N_PHI_CAT3, a_fix),)
            )
            assert d_cc <= d_ucs

    def test_matches_dense_scan(self):
        # oracle: brute 2-d scan at one interior loss value
        eta = 0.65
        from lossyphase.qfi import crb, ucs_lossy_qfi

        best = math.inf
        for n in np.exp(np.linspace(math.log(0.1), math.log(12.4999), 120)):
            for a in np.linspace(0.0, 1.0, 51):
                d = crb(ucs_lossy_qfi(float(a), float(n), eta).f_q, 400.0 / n)
                best = min(best, d)
        _, _, delta = chop_optimize(eta)
        assert delta <= best + 1e-9


class TestNoonChop:
    def test_n_max_matches_flux_ceiling(self):
        assert noon_chop_n_max(5.0) == 25

    def test_no_loss_takes_largest_n(self):
        curve = noon_chop_curve([1.0], n_max=25)
        p = curve.points[0]
        assert p.n_phi == 12.5
        assert abs(p.delta_phi - 1.0 / math.sqrt(20000.0)) < 1e-12

    def test_single_photon_row_base_case(self):
        # at strong loss the best N is 1; both-arm loss gives F = eta
        curve = noon_chop_curve([0.2, 0.5], n_max=25)
        for p, eta in zip(curve.points, (0.2, 0.5)):
            assert p.n_phi == 0.5
            assert abs(p.delta_phi - 1.0 / math.sqrt(800.0 * eta)) < 1e-10

    def test_never_worse_than_fixed_noon(self):
        fixed = crb_curve(NOON(9), COARSE)
        chopped = noon_chop_curve(COARSE, n_max=25)
        for a, b in zip(chopped.points, fixed.points):
            assert a.delta_phi <= b.delta_phi + 1e-12

    def test_chopped_cat_beats_chopped_noon(self):
        chopped = noon_chop_curve(COARSE, n_max=25)
        for p in chopped.points:
            _, _, d_cc = chop_optimize(p.eta)
            assert d_cc < p.delta_phi


class TestBudget:
    def test_rate_repetitions(self):
        m = budget_repetitions(4.5, 400.0)
        assert abs(m * 4.5 - 400.0) <= 1e-9

    def test_default_grid(self):
        g = eta_grid_default()
        assert len(g) == 101
        assert g[0] == 0.01 and g[-1] == 1.0

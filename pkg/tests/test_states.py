import math

import numpy as np
import pytest

from lossyphase.fock import expectation, phase_generator
from lossyphase.states import (
    Cat,
    Coherent,
    ECS,
    NO,
    NOON,
    UCS,
    alpha_of_a_lambertw,
    build_state,
    default_spec_cutoff,
    format_state_spec,
    mean_photons_through_phase,
    modes_of,
    n_c,
    n_e,
    n_u,
    normalization_set,
    parse_state_spec,
    solve_alpha_of_a,
)

N_PHI_CAT3 = 9.0 / (2.0 + 2.0 * math.exp(-4.5))


class TestAlphaOfA:
    def test_a_zero_exact(self):
        assert solve_alpha_of_a(0.0, 7.3) == math.sqrt(7.3)

    def test_inverts_balanced_cat_flux(self):
        # oracle: the flux of a balanced alpha=3 cat, fed back through the
        # self-consistency, must return alpha = 3
        alpha = solve_alpha_of_a(1.0, N_PHI_CAT3)
        assert abs(alpha - 3.0) < 1e-9

    def test_residual_below_tolerance(self):
        for a in [0.05, 0.3, 0.77, 1.0]:
            for n_phi in [0.1, 1.0, 4.45, 12.5]:
                x = solve_alpha_of_a(a, n_phi) ** 2
                res = x - n_phi * (1.0 + a * a + 2.0 * a * math.exp(-x / 2.0))
                assert abs(res) <= 1e-12

    def test_large_budget_asymptote(self):
        # alpha^2 -> 2 n_phi (1 + e^{-alpha^2/2}) for a = 1
        n_phi = 25.0
        x = solve_alpha_of_a(1.0, n_phi) ** 2
        assert abs(x - 2.0 * n_phi * (1.0 + math.exp(-x / 2.0))) < 1e-10

    @pytest.mark.parametrize("a", [0.1, 0.5, 0.9, 1.0])
    @pytest.mark.parametrize("n_phi", [0.2, 2.0, 8.0])
    def test_lambert_w_closed_form_agrees(self, a, n_phi):
        assert abs(solve_alpha_of_a(a, n_phi) - alpha_of_a_lambertw(a, n_phi)) < 1e-10

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError):
            solve_alpha_of_a(1.2, 1.0)
        with pytest.raises(ValueError):
            solve_alpha_of_a(0.5, 0.0)


class TestNormalizations:
    def test_values_in_unit_interval(self):
        for alpha in [0.0, 0.5, 2.0, 5.0]:
            ns = normalization_set(alpha, a=0.7)
            for val in (ns.n_e, ns.n_c, ns.n_u):
                assert 0.0 < val <= 1.0

    def test_closed_forms(self):
        a = 2.0
        assert abs(n_e(a) - 1.0 / math.sqrt(2 + 2 * math.exp(-4.0))) < 1e-15
        assert abs(n_c(a) - 1.0 / math.sqrt(2 + 2 * math.exp(-2.0))) < 1e-15
        assert abs(n_u(0.5, a) - 1.0 / math.sqrt(1.25 + math.exp(-2.0))) < 1e-15

    def test_overlap_monotonicity(self):
        # bigger branch separation -> smaller overlap -> larger normalization
        assert n_c(1.0) < n_c(2.0) < n_c(4.0)
        assert n_e(1.0) < n_e(2.0) < n_e(4.0)


class TestBuildState:
    def test_noon_amplitudes(self):
        v = build_state(NOON(4))
        d = v.cutoff + 1
        idx_40 = 4 * d + 0
        idx_04 = 0 * d + 4
        assert abs(v.amplitudes[idx_40] - 1 / math.sqrt(2)) < 1e-15
        assert abs(v.amplitudes[idx_04] - 1 / math.sqrt(2)) < 1e-15
        assert abs(v.norm_sq() - 1.0) < 1e-12

    def test_cat_vacuum_overlap(self):
        v = build_state(Cat(3.0))
        want = n_c(3.0) * (1.0 + math.exp(-4.5))
        assert abs(v.amplitudes[0] - want) < 1e-12

    def test_ucs_reduces_to_coherent(self):
        v = build_state(UCS(0.0, 9.0))
        c = build_state(Coherent(3.0), cutoff=v.cutoff)
        assert np.abs(v.amplitudes - c.amplitudes).max() < 1e-12

    def test_balanced_ucs_is_cat(self):
        v = build_state(UCS(1.0, N_PHI_CAT3))
        c = build_state(Cat(3.0), cutoff=v.cutoff)
        assert np.abs(v.amplitudes - c.amplitudes).max() < 1e-10

    @pytest.mark.parametrize(
        "spec",
        [Coherent(2.0), Cat(3.0), UCS(0.6, 4.0), NO(5), NOON(5), ECS(2.5)],
    )
    def test_normalized(self, spec):
        v = build_state(spec)
        assert abs(v.norm_sq() - 1.0) < 1e-10

    def test_modes(self):
        assert modes_of(NOON(2)) == 2
        assert modes_of(ECS(1.0)) == 2
        assert modes_of(Cat(1.0)) == 1


class TestMeanPhotons:
    def test_noon_and_no(self):
        assert mean_photons_through_phase(NOON(4)) == 2.0
        assert mean_photons_through_phase(NO(4)) == 2.0

    def test_coherent(self):
        assert mean_photons_through_phase(Coherent(3.0)) == 9.0

    def test_cat3_value(self):
        got = mean_photons_through_phase(Cat(3.0))
        assert abs(got - 4.450558758162331) < 1e-12  # 9 / (2 + 2 e^{-4.5})

    @pytest.mark.parametrize(
        "spec",
        [Coherent(2.0), Cat(3.0), UCS(0.6, 4.0), NO(6), NOON(6), ECS(2.5)],
    )
    def test_analytic_matches_numeric_expectation(self, spec):
        v = build_state(spec)
        g = phase_generator(v.cutoff, v.modes)
        assert abs(expectation(g, v) - mean_photons_through_phase(spec)) < 1e-10


class TestSpecText:
    @pytest.mark.parametrize(
        "text,spec",
        [
            ("cat:alpha=3", Cat(3.0)),
            ("coh:alpha=3", Coherent(3.0)),
            ("ecs:alpha=3", ECS(3.0)),
            ("noon:N=4", NOON(4)),
            ("no:N=4", NO(4)),
            ("ucs:a=0.7,nphi=4.45", UCS(0.7, 4.45)),
        ],
    )
    def test_parse(self, text, spec):
        assert parse_state_spec(text) == spec

    @pytest.mark.parametrize(
        "spec",
        [Cat(3.0), Coherent(1.25), ECS(2.0), NOON(7), NO(2), UCS(0.3, 2.5)],
    )
    def test_round_trip(self, spec):
        assert parse_state_spec(format_state_spec(spec)) == spec

    @pytest.mark.parametrize(
        "bad",
        ["cat", "cat:", "cat:beta=3", "wat:alpha=1", "ucs:a=0.5", "noon:N=x"],
    )
    def test_rejects_malformed(self, bad):
        with pytest.raises(ValueError):
            parse_state_spec(bad)

    def test_validation(self):
        with pytest.raises(ValueError):
            UCS(1.5, 2.0)
        with pytest.raises(ValueError):
            NOON(0)
        with pytest.raises(ValueError):
            Cat(-1.0)

    def test_default_cutoffs(self):
        assert default_spec_cutoff(NOON(9)) == 9
        assert default_spec_cutoff(Coherent(3.0)) == 53

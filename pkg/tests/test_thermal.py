import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from xfmr_aging import thermal
from xfmr_aging.dataset import HourlySeries
from xfmr_aging.errors import DomainError
from xfmr_aging.thermal import TransformerParams

P = TransformerParams()

# arbitrary-precision evaluations (mpmath, 50 digits), frozen
PUL_120 = 0.3692762179215075364538987
FAA_120 = 2.708925143828163701983494
FAA_101_5 = 0.4111020996210188338709973
TOPOIL_K05 = 22.68379410964516662609269
HOTSPOT_K05 = 5.805834807400734741245609
TRANSIENT_1H = 26.9495473924321242360529
TOPOIL_K0 = 9.793246939144156147777556
LOL_ONE_HOUR_AT_REF = 100 / 180000


class TestParams:
    def test_defaults(self):
        assert (P.loss_ratio_R, P.exponent_m, P.exponent_n) == (7.43, 0.8, 0.8)
        assert (P.hotspot_rise_rated, P.topoil_rise_rated, P.topoil_time_constant) == (17.6, 53.9, 6.8)
        assert P.rated_current == 934.0

    @pytest.mark.parametrize("field,value", [
        ("loss_ratio_R", 0.0), ("exponent_m", 0.7), ("exponent_n", 1.2), ("arrhenius_B", 20000.0),
        ("topoil_time_constant", -1.0), ("arrhenius_A", float("nan")),
    ])
    def test_rejects_out_of_range(self, field, value):
        with pytest.raises(DomainError):
            TransformerParams(**{field: value})

    def test_mapping_round_trip(self):
        assert TransformerParams.from_mapping(P.to_dict()) == P

    def test_unknown_key(self):
        with pytest.raises(DomainError):
            TransformerParams.from_mapping({"bogus": 1})


class TestAging:
    def test_per_unit_life_reference_is_one(self):
        assert thermal.per_unit_life(110.0) == pytest.approx(1.0, rel=0.01)

    def test_per_unit_life_120(self):
        assert thermal.per_unit_life(120.0) == pytest.approx(PUL_120, rel=1e-13)

    def test_per_unit_life_approaches_a(self):
        v = thermal.per_unit_life(1e6)
        assert v > P.arrhenius_A
        assert v == pytest.approx(P.arrhenius_A, rel=0.02)

    def test_faa_reference_exact(self):
        assert thermal.aging_acceleration_factor(110.0) == 1.0

    @pytest.mark.parametrize("theta,expected", [(120.0, FAA_120), (101.5, FAA_101_5)])
    def test_faa_values(self, theta, expected):
        assert thermal.aging_acceleration_factor(theta) == pytest.approx(expected, rel=1e-13)

    @pytest.mark.parametrize("bad", [-273.0, -300.0, float("nan"), float("inf")])
    def test_faa_domain(self, bad):
        with pytest.raises(DomainError):
            thermal.aging_acceleration_factor(bad)

    @given(st.floats(-200, 300), st.floats(0.001, 50))
    def test_faa_strictly_increasing(self, theta, delta):
        assert thermal.aging_acceleration_factor(theta + delta) > thermal.aging_acceleration_factor(theta)

    def test_equivalent_aging(self):
        assert thermal.equivalent_aging([1.0, 1.0, 1.0]) == 1.0
        assert thermal.equivalent_aging([1.0, 3.0]) == 2.0
        assert thermal.equivalent_aging([0.5, 2.0, 4.0]) == pytest.approx(6.5 / 3, rel=1e-15)

    def test_equivalent_aging_weighted(self):
        assert thermal.equivalent_aging([1.0, 4.0], dt=[3.0, 1.0]) == pytest.approx(7.0 / 4)

    @pytest.mark.parametrize("feqa,hours,expected", [
        (1.0, 180000.0, 100.0), (0.0, 10.0, 0.0), (1.0, 1.0, LOL_ONE_HOUR_AT_REF),
    ])
    def test_loss_of_life(self, feqa, hours, expected):
        assert thermal.loss_of_life_percent(feqa, hours) == pytest.approx(expected, rel=1e-15)


class TestRises:
    def test_topoil_rated(self):
        assert thermal.ultimate_topoil_rise(1.0) == 53.9

    def test_topoil_half_load(self):
        assert thermal.ultimate_topoil_rise(0.5) == pytest.approx(TOPOIL_K05, rel=1e-13)

    def test_topoil_no_load(self):
        assert thermal.ultimate_topoil_rise(0.0) == pytest.approx(TOPOIL_K0, rel=1e-13)
        assert thermal.ultimate_topoil_rise(0.0) > 0

    def test_hotspot(self):
        assert thermal.ultimate_hotspot_rise(1.0) == 17.6
        assert thermal.ultimate_hotspot_rise(0.0) == 0.0
        assert thermal.ultimate_hotspot_rise(0.5) == pytest.approx(HOTSPOT_K05, rel=1e-13)

    def test_negative_load(self):
        with pytest.raises(DomainError):
            thermal.ultimate_topoil_rise(-0.1)

    def test_transient_endpoints(self):
        assert thermal.transient_rise(22.68, 53.9, 0.0, 6.8) == 22.68
        assert thermal.transient_rise(22.68, 53.9, math.inf, 6.8) == 53.9

    def test_transient_one_hour(self):
        assert thermal.transient_rise(22.68, 53.9, 1.0, 6.8) == pytest.approx(TRANSIENT_1H, rel=1e-13)

    @given(st.floats(0, 200), st.floats(0, 200), st.floats(0, 1e3), st.floats(0.01, 50))
    def test_transient_convex_combination(self, a, b, t, tau):
        v = thermal.transient_rise(a, b, t, tau)
        assert min(a, b) - 1e-12 <= v <= max(a, b) + 1e-12


def _constant(hours, temp, load):
    return HourlySeries.from_arrays(np.full(hours, temp), np.full(hours, load))


class TestProfile:
    @pytest.mark.parametrize("mode", ["literal", "carry"])
    def test_steady_state_hotspot(self, mode):
        hours = int(30 * P.topoil_time_constant)
        records = thermal.run_profile(_constant(hours, 30.0, 1.0), start="cold", mode=mode)
        assert abs(records[-1].hotspot_temp - 101.5) < 1e-9

    def test_carry_converges_monotonically(self):
        records = thermal.run_profile(_constant(200, 30.0, 1.0), start="cold", mode="carry")
        theta = np.array([r.hotspot_temp for r in records])
        assert np.all(np.diff(theta) >= 0)
        assert np.all(np.diff([r.aging_factor for r in records]) >= 0)

    def test_no_load_change_keeps_state(self):
        state = thermal.initial_state(0.8)
        new, rec = thermal.step_interval(state, 25.0, 0.8, 1.0, mode="carry")
        assert new.topoil_rise_current == pytest.approx(state.topoil_rise_current, rel=1e-15)
        assert rec.hotspot_temp == pytest.approx(25.0 + thermal.ultimate_topoil_rise(0.8)
                                                 + thermal.ultimate_hotspot_rise(0.8), rel=1e-15)

    def test_reference_interval_lol(self):
        # choose θ_A so that a warm rated-load interval sits at exactly 110 °C
        state = thermal.initial_state(1.0)
        _, rec = thermal.step_interval(state, 110.0 - 53.9 - 17.6, 1.0, 1.0)
        assert rec.hotspot_temp == pytest.approx(110.0, abs=1e-12)
        assert rec.lol_percent == pytest.approx(LOL_ONE_HOUR_AT_REF, rel=1e-12)

    def test_single_interval_matches_step(self):
        series = _constant(1, 12.0, 0.7)
        [rec] = thermal.run_profile(series)
        _, expected = thermal.step_interval(thermal.initial_state(0.7), 12.0, 0.7, 1.0)
        assert rec == expected

    def test_literal_vs_carry_differ_on_load_step(self):
        loads = np.r_[np.full(5, 0.5), np.full(5, 1.1)]
        series = HourlySeries.from_arrays(np.full(10, 20.0), loads)
        lit = thermal.run_profile(series, mode="literal")
        car = thermal.run_profile(series, mode="carry")
        assert lit[5].hotspot_temp == car[5].hotspot_temp
        assert lit[6].hotspot_temp > car[6].hotspot_temp

    def test_cold_start_below_warm(self):
        series = _constant(3, 20.0, 0.9)
        warm = thermal.run_profile(series, start="warm", mode="carry")
        cold = thermal.run_profile(series, start="cold", mode="carry")
        assert cold[0].hotspot_temp < warm[0].hotspot_temp

    def test_rejects_bad_mode(self):
        with pytest.raises(DomainError):
            thermal.step_interval(thermal.initial_state(1.0), 20.0, 1.0, 1.0, mode="sideways")

    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.tuples(st.floats(-30, 45), st.floats(0.0, 1.5)), min_size=24, max_size=24),
           st.sampled_from(["literal", "carry"]))
    def test_sum_matches_composition(self, rows, mode):
        temps, loads = map(np.array, zip(*rows))
        records = thermal.run_profile(HourlySeries.from_arrays(temps, loads), mode=mode)
        total = sum(r.lol_percent for r in records)
        # independent composition: mean factor times hours times 100 over life
        faa = [math.exp(15000 / 383 - 15000 / (r.hotspot_temp + 273)) for r in records]
        expected = sum(faa) / 24 * 24 * 100 / 180000
        assert total == pytest.approx(expected, rel=1e-12)
        assert all(r.lol_percent >= 0 for r in records)

    def test_deterministic(self):
        rng = np.random.default_rng(3)
        series = HourlySeries.from_arrays(rng.uniform(-10, 35, 48), rng.uniform(0.2, 1.3, 48))
        assert thermal.run_profile(series) == thermal.run_profile(series)

    def test_half_hour_refinement_close(self):
        rng = np.random.default_rng(4)
        temps, loads = rng.uniform(0, 30, 48), rng.uniform(0.4, 1.2, 48)
        hourly = thermal.run_profile(HourlySeries.from_arrays(temps, loads), mode="carry")
        halves = type("S", (), {"ambient_temp": np.repeat(temps, 2), "load_ratio": np.repeat(loads, 2)})
        fine = thermal.run_profile(halves, mode="carry", dt=0.5)
        a = sum(r.lol_percent for r in hourly)
        b = sum(r.lol_percent for r in fine)
        assert abs(a - b) / a < 0.1

    def test_records_as_arrays(self):
        records = thermal.run_profile(_constant(4, 10.0, 0.6))
        cols = thermal.records_as_arrays(records)
        assert cols["interval_index"].tolist() == [0, 1, 2, 3]
        assert cols["lol_percent"].shape == (4,)

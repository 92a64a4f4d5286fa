import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nct import rates
from nct.beam import BeamSpec, build_mode_table
from nct.constants import CODATA, Constants, M_RB87
from nct.gas import GasSpec, GasState, solve_fugacity, t_bec
from nct.potential import PotentialSpec
from nct.specfun import integrate_adaptive

OMEGA0 = 2.0 * math.pi * 398e3


def reference_inputs(n=1e19, t_over_tbec=2.0, l_max=5):
    spec = BeamSpec(radius=1e-9, length=1e-6, lin_density=1e-15,
                    omega0=OMEGA0)
    modes = build_mode_table(spec, l_max)
    pot = PotentialSpec.single_c5(1e-9, 6e-65)
    gas = solve_fugacity(GasSpec(n, t_over_tbec * t_bec(n, M_RB87), M_RB87))
    return rates.build_rate_inputs(modes, pot, gas)


@pytest.fixture(scope="module")
def inputs():
    return reference_inputs()


@pytest.fixture(scope="module")
def warm_inputs():
    # beta hbar omega_0 ~ 1: comfortable scales for quadrature-heavy checks
    spec = BeamSpec(radius=1e-9, length=1e-6, lin_density=1e-15,
                    omega0=OMEGA0)
    modes = build_mode_table(spec, 2)
    pot = PotentialSpec.single_c5(1e-9, 6e-65)
    gas = solve_fugacity(GasSpec(1e20, 19e-6, M_RB87))
    return rates.build_rate_inputs(modes, pot, gas)


class TestBuildInputs:
    def test_prefactor_definition(self, inputs):
        g = inputs.gas
        modes = inputs.modes
        expected = (8.0 * math.pi * g.spec.mass * modes.i_overlap ** 2
                    * modes.spec.length
                    / (modes.spec.hbar ** 3 * g.lambda_db ** 5))
        assert np.allclose(inputs.prefactors, expected, rtol=1e-14)
        assert np.all(inputs.prefactors > 0)
        assert np.all(np.diff(inputs.prefactors) < 0)

    def test_varkappa_definition(self, inputs):
        assert inputs.varkappa == pytest.approx(
            4.0 * math.sqrt(math.pi) * 1e-9 / inputs.gas.lambda_db, rel=1e-14)

    def test_condensed_gas_rejected(self):
        spec = BeamSpec(radius=1e-9, length=1e-6, lin_density=1e-15,
                        omega0=OMEGA0)
        modes = build_mode_table(spec, 1)
        pot = PotentialSpec.single_c5(1e-9, 6e-65)
        gas = solve_fugacity(GasSpec(1e19, 0.5 * t_bec(1e19, M_RB87),
                                     M_RB87))
        with pytest.raises(ValueError):
            rates.build_rate_inputs(modes, pot, gas)


class TestPeakedWeight:
    def test_known_integral(self, warm_inputs):
        # Int_0^inf delta_j dqbar = e^{-j bhw}/j^{3/2} (1 + j bhw / 2)
        bhw = warm_inputs.gas.beta_a * warm_inputs.modes.spec.hbar \
            * warm_inputs.modes.omega[0]
        for j in (1, 2, 5):
            top = 40.0 * rates.peak_location(j, 0, warm_inputs)
            val = integrate_adaptive(
                lambda qb: rates.peaked_weight(j, 0, qb, warm_inputs),
                1e-10, top, 1e-11, vectorized=True)
            expected = math.exp(-j * bhw) / j ** 1.5 * (1 + 0.5 * j * bhw)
            assert val == pytest.approx(expected, rel=1e-9)

    def test_peak_matches_grid_scan(self, inputs):
        q1 = rates.peak_location(1, 0, inputs)
        grid = np.linspace(0.2 * q1, 5.0 * q1, 100_001)
        scanned = grid[np.argmax(rates.peaked_weight(1, 0, grid, inputs))]
        assert scanned == pytest.approx(q1, rel=1e-4)

    def test_zero_frequency_limit(self, inputs):
        # with w_l = 0 the peak sits at vk/sqrt(j)
        cold = GasState(spec=inputs.gas.spec, lambda_db=inputs.gas.lambda_db,
                        t_bec=inputs.gas.t_bec, eta=inputs.gas.eta,
                        mu=inputs.gas.mu, condensate_fraction=0.0,
                        beta_a=0.0)
        probe = rates.RateInputs(modes=inputs.modes,
                                 potential=inputs.potential, gas=cold,
                                 varkappa=inputs.varkappa,
                                 prefactors=inputs.prefactors)
        for j in (1, 2, 7):
            assert rates.peak_location(j, 0, probe) == pytest.approx(
                inputs.varkappa / math.sqrt(j), rel=1e-14)

    def test_stationary_point(self, inputs):
        q1 = rates.peak_location(1, 0, inputs)
        h = 1e-6 * q1
        deriv = (rates.peaked_weight(1, 0, q1 + h, inputs)
                 - rates.peaked_weight(1, 0, q1 - h, inputs)) / (2 * h)
        curv = (rates.peaked_weight(1, 0, q1 + h, inputs)
                - 2 * rates.peaked_weight(1, 0, q1, inputs)
                + rates.peaked_weight(1, 0, q1 - h, inputs)) / h ** 2
        assert abs(deriv) < 1e-6 * abs(curv) * q1

    def test_vanishes_at_ends(self, inputs):
        q1 = rates.peak_location(1, 0, inputs)
        peak = rates.peaked_weight(1, 0, q1, inputs)
        assert rates.peaked_weight(1, 0, 1e-4 * q1, inputs) < 1e-30 * peak
        assert rates.peaked_weight(1, 0, 50 * q1, inputs) < 1e-30 * peak


class TestRateIdentities:
    def test_series_first_term_is_golden_rule(self, inputs):
        one = rates.rate_series(inputs, j_max=1)
        fgr = rates.rate_fgr(inputs)
        assert one.value == pytest.approx(fgr.value, rel=1e-12)
        assert one.method == "series" and fgr.method == "fgr"

    def test_series_exceeds_first_term(self, inputs):
        full = rates.rate_series(inputs)
        fgr = rates.rate_fgr(inputs)
        assert full.value >= fgr.value
        assert full.j_terms_used >= 1

    def test_simplified_is_fgr_with_classical_fugacity(self, inputs):
        simplified = rates.rate_simplified(inputs)
        fgr = rates.rate_fgr(inputs)
        n_lambda3 = inputs.gas.spec.density * inputs.gas.lambda_db ** 3
        assert simplified.value / fgr.value == pytest.approx(
            n_lambda3 / inputs.gas.eta, rel=1e-10)

    def test_simplified_exact_when_fugacity_classical(self, inputs):
        g = inputs.gas
        classical = GasState(
            spec=g.spec, lambda_db=g.lambda_db, t_bec=g.t_bec,
            eta=g.spec.density * g.lambda_db ** 3,
            mu=math.log(g.spec.density * g.lambda_db ** 3) / g.beta_a,
            condensate_fraction=0.0, beta_a=g.beta_a)
        probe = rates.RateInputs(modes=inputs.modes,
                                 potential=inputs.potential, gas=classical,
                                 varkappa=inputs.varkappa,
                                 prefactors=inputs.prefactors)
        assert rates.rate_fgr(probe).value == pytest.approx(
            rates.rate_simplified(probe).value, rel=1e-12)

    def test_simplified_linear_in_density(self):
        a = rates.rate_simplified(reference_inputs(n=1e19, t_over_tbec=2.0))
        # same absolute temperature, double density
        t_a = 2.0 * t_bec(1e19, M_RB87)
        spec = BeamSpec(radius=1e-9, length=1e-6, lin_density=1e-15,
                        omega0=OMEGA0)
        modes = build_mode_table(spec, 5)
        pot = PotentialSpec.single_c5(1e-9, 6e-65)
        gas = solve_fugacity(GasSpec(2e19, t_a, M_RB87))
        b = rates.rate_simplified(rates.build_rate_inputs(modes, pot, gas))
        assert b.value == pytest.approx(2.0 * a.value, rel=1e-10)

    def test_simplified_monotone_in_temperature(self):
        values = []
        for f in np.linspace(1.5, 6.0, 8):
            values.append(rates.rate_simplified(
                reference_inputs(t_over_tbec=float(f))).log_value)
        assert np.all(np.diff(values) > 0)

    def test_simplified_exponential_suppression(self):
        # ln Gamma ~ -hbar w0 / (k_B T) as T -> 0 at fixed density
        hw0_over_kb = CODATA.hbar * OMEGA0 / CODATA.k_b
        logs = {}
        for f in (1.2, 1.1):
            inp = reference_inputs(n=1e18, t_over_tbec=f)
            t_a = inp.gas.spec.temperature
            logs[f] = rates.rate_simplified(inp).log_value + hw0_over_kb / t_a
        # after removing the Boltzmann factor only slow prefactors remain
        assert abs(logs[1.2] - logs[1.1]) < 3.0
        raw_drop = (rates.rate_simplified(
            reference_inputs(n=1e18, t_over_tbec=1.1)).log_value
            - rates.rate_simplified(
                reference_inputs(n=1e18, t_over_tbec=1.2)).log_value)
        assert raw_drop < -50.0  # many decades per small step toward T = 0

    def test_c5_is_simplified_with_frozen_amplitude(self, inputs):
        c5 = rates.rate_c5(inputs)
        simplified = rates.rate_simplified(inputs)
        q1 = rates.peak_location(1, 0, inputs)
        from nct.potential import v_fourier
        v_actual = v_fourier(inputs.potential, q1 / 1e-9)
        v_frozen = 2.0 * math.pi * 6e-65 / (3.0 * (1e-9) ** 3)
        assert c5.value / simplified.value == pytest.approx(
            (v_frozen / v_actual) ** 2, rel=1e-10)

    def test_c5_radius_scaling(self):
        base = reference_inputs()
        scaled_pot = PotentialSpec.single_c5(2e-9, 6e-65)
        probe = rates.RateInputs(modes=base.modes, potential=scaled_pot,
                                 gas=base.gas, varkappa=base.varkappa,
                                 prefactors=base.prefactors)
        assert rates.rate_c5(probe).value == pytest.approx(
            rates.rate_c5(base).value / 64.0, rel=1e-12)

    def test_c5_requires_single_power(self, inputs):
        probe = rates.RateInputs(
            modes=inputs.modes,
            potential=PotentialSpec(1e-9, ((3, 1e-49), (5, 6e-65))),
            gas=inputs.gas, varkappa=inputs.varkappa,
            prefactors=inputs.prefactors)
        with pytest.raises(ValueError):
            rates.rate_c5(probe)

    @settings(max_examples=30, deadline=None)
    @given(n=st.floats(1e18, 1e20), f=st.floats(1.05, 8.0),
           c5=st.floats(6e-66, 6e-64))
    def test_series_j1_identity_property(self, n, f, c5):
        spec = BeamSpec(radius=1e-9, length=1e-6, lin_density=1e-15,
                        omega0=OMEGA0)
        modes = build_mode_table(spec, 0)
        pot = PotentialSpec.single_c5(1e-9, c5)
        gas = solve_fugacity(GasSpec(n, f * t_bec(n, M_RB87), M_RB87))
        inp = rates.build_rate_inputs(modes, pot, gas)
        one = rates.rate_series(inp, j_max=1)
        fgr = rates.rate_fgr(inp)
        assert one.log_value == pytest.approx(fgr.log_value, abs=1e-12)


class TestQuadratureOracle:
    def test_agreement_at_reference(self, inputs):
        series = rates.rate_series(inputs)
        oracle = rates.rate_quadrature_oracle(inputs)
        assert series.value == pytest.approx(oracle.value, rel=2e-2)
        assert oracle.method == "quadrature"

    def test_constant_amplitude_collapses_exactly(self, inputs, monkeypatch):
        # with |V| constant the mean-value step is exact, so the oracle must
        # reproduce the closed-form series to quadrature accuracy
        monkeypatch.setattr(rates, "_v_at_qbar", lambda inp, qb: 1.3e-37)
        series = rates.rate_series(inputs)
        oracle = rates.rate_quadrature_oracle(inputs)
        assert oracle.value == pytest.approx(series.value, rel=1e-7)

    def test_against_fixed_grid_simpson(self, warm_inputs):
        # second, dumber evaluation of the j = 1 oracle term: composite
        # Simpson on a uniform grid over the peaked-weight support
        from nct.potential import v_fourier
        inp = warm_inputs
        q1 = rates.peak_location(1, 0, inp)
        grid = np.linspace(1e-6 * q1, 20.0 * q1, 20_001)
        vals = np.array([
            rates.peaked_weight(1, 0, float(qb), inp)
            * v_fourier(inp.potential, float(qb) / 1e-9) ** 2
            for qb in grid])
        h = grid[1] - grid[0]
        simpson = h / 3.0 * (vals[0] + vals[-1] + 4 * vals[1:-1:2].sum()
                             + 2 * vals[2:-1:2].sum())
        term = (inp.prefactors[0] * inp.gas.eta * simpson)
        oracle = rates.rate_quadrature_oracle(inp, j_max=1)
        assert oracle.value == pytest.approx(term, rel=1e-5)

    def test_log_agreement_in_underflow_corner(self):
        inp = reference_inputs(n=1e18, t_over_tbec=1.05)
        series = rates.rate_series(inp)
        oracle = rates.rate_quadrature_oracle(inp)
        assert series.value == 0.0  # suppressed beyond double range
        assert series.log_value < -700.0
        assert math.exp(series.log_value - oracle.log_value) == pytest.approx(
            1.0, abs=2e-2)

    def test_ratio_approaches_one_for_narrow_peak(self, inputs):
        # shrinking the radius narrows the peak and the mean-value step
        # becomes exact
        devs = []
        for radius in (1e-9, 1e-10, 1e-11):
            pot = PotentialSpec.single_c5(radius, 6e-65)
            inp = rates.build_rate_inputs(inputs.modes, pot, inputs.gas)
            s = rates.rate_series(inp)
            o = rates.rate_quadrature_oracle(inp)
            devs.append(abs(math.exp(s.log_value - o.log_value) - 1.0))
        assert devs[0] > devs[-1]
        assert devs[-1] < 1e-4


class TestMultimode:
    def test_ground_term_is_golden_rule(self, inputs):
        total = rates.vacuum_rate_multimode(inputs)
        fgr = rates.rate_fgr(inputs)
        assert total.value >= fgr.value
        assert total.l0_share == pytest.approx(fgr.value / total.value,
                                               rel=1e-10)

    def test_ground_mode_dominates(self, inputs):
        total = rates.vacuum_rate_multimode(inputs)
        assert total.l0_share > 0.95

    def test_partial_sums_increase(self, inputs):
        values = [rates.vacuum_rate_multimode(inputs, l_max=l).value
                  for l in range(inputs.modes.l_max + 1)]
        assert all(b >= a for a, b in zip(values, values[1:]))


class TestThermalization:
    def test_detailed_balance_exact_zero(self, inputs):
        for l in range(inputs.modes.l_max + 1):
            assert rates.thermalization_rate(inputs, l,
                                             inputs.gas.beta_a) == 0.0

    def test_signs(self, inputs):
        hot_tube = 0.5 * inputs.gas.beta_a   # tube hotter than gas
        cold_tube = 2.0 * inputs.gas.beta_a  # tube colder than gas
        for l in range(inputs.modes.l_max + 1):
            assert rates.thermalization_rate(inputs, l, hot_tube) > 0.0
            assert rates.thermalization_rate(inputs, l, cold_tube) < 0.0

    @settings(max_examples=60, deadline=None)
    @given(ratio=st.floats(0.01, 100.0))
    def test_sign_rule_property(self, ratio):
        inp = reference_inputs(l_max=1)
        beta_c = ratio * inp.gas.beta_a
        gamma = rates.thermalization_rate(inp, 0, beta_c)
        if ratio == 1.0:
            assert gamma == 0.0
        else:
            assert math.copysign(1.0, gamma) == math.copysign(
                1.0, inp.gas.beta_a - beta_c)


@pytest.fixture(scope="module")
def q_peak(warm_inputs):
    return rates.peak_location(1, 0, warm_inputs) / 1e-9


class TestMixedPotential:
    def test_even_and_odd_terms_through_the_pipeline(self, inputs):
        mixed = PotentialSpec(1e-9, ((3, 1e-50), (4, 1e-57), (5, 6e-65)))
        probe = rates.build_rate_inputs(inputs.modes, mixed, inputs.gas)
        series = rates.rate_series(probe)
        assert math.isfinite(series.log_value)
        assert series.value >= 0.0
        one = rates.rate_series(probe, j_max=1)
        fgr = rates.rate_fgr(probe)
        assert one.log_value == pytest.approx(fgr.log_value, abs=1e-12)


class TestTimeDependence:
    def test_sinc_only_integral_exact(self, warm_inputs, q_peak):
        # j = 0 removes the Gaussian: Int sin^2(dt/2)/d^2 = pi t / 2
        for t in (1e-7, 1e-5, 1e-3):
            assert rates.fj_convolution(0, q_peak, t, warm_inputs) \
                == 0.5 * math.pi * t

    def test_parseval_matches_direct_window(self, warm_inputs, q_peak):
        for t in (3e-6, 1e-4):
            direct = rates.fj_convolution(1, q_peak, t, warm_inputs,
                                          method="direct")
            parseval = rates.fj_convolution(1, q_peak, t, warm_inputs,
                                            method="parseval")
            assert parseval == pytest.approx(direct, rel=1e-6)

    def test_small_time_quadratic_growth(self, warm_inputs, q_peak):
        ts = np.array([1e-9, 2e-9, 4e-9])
        fs = np.array([rates.fj_convolution(1, q_peak, float(t),
                                            warm_inputs, method="parseval")
                       for t in ts])
        ratios = fs / ts ** 2
        assert np.max(ratios) / np.min(ratios) == pytest.approx(1.0,
                                                                abs=1e-3)

    def test_occupation_starts_at_zero_and_grows(self, warm_inputs):
        assert rates.occupation_vs_time(warm_inputs, 0.0) == 0.0
        t_scale = 2.0 * math.pi / warm_inputs.modes.omega[0]
        ps = [rates.occupation_vs_time(warm_inputs, f * t_scale)
              for f in (30.0, 60.0, 120.0)]
        assert ps[0] > 0.0
        assert ps[0] < ps[1] < ps[2]

    def test_invalid_arguments(self, warm_inputs, q_peak):
        with pytest.raises(ValueError):
            rates.fj_convolution(1, q_peak, -1.0, warm_inputs)
        with pytest.raises(ValueError):
            rates.fj_convolution(1, -q_peak, 1e-5, warm_inputs)
        with pytest.raises(ValueError):
            rates.fj_convolution(1, q_peak, 1e-5, warm_inputs,
                                 method="nonsense")


class TestUnitAudit:
    def test_rate_invariant_under_unit_rescaling(self):
        # second unit system: lengths in nm, energies in zJ, time in s
        l0, e0 = 1e-9, 1e-21
        m0 = e0 / l0 ** 2          # 1e-3 kg
        scaled = Constants(hbar=CODATA.hbar / e0, k_b=CODATA.k_b / e0)
        si_beam = BeamSpec(radius=1e-9, length=1e-6, lin_density=1e-15,
                           omega0=OMEGA0)
        nm_beam = BeamSpec(radius=1e-9 / l0, length=1e-6 / l0,
                           lin_density=1e-15 / (m0 / l0),
                           omega0=OMEGA0, hbar=scaled.hbar)
        si_modes = build_mode_table(si_beam, 0)
        nm_modes = build_mode_table(nm_beam, 0)
        si_pot = PotentialSpec.single_c5(1e-9, 6e-65)
        nm_pot = PotentialSpec.single_c5(1e-9 / l0, 6e-65 / (e0 * l0 ** 5))
        n, t_a = 1e19, 2.0 * t_bec(1e19, M_RB87)
        si_gas = solve_fugacity(GasSpec(n, t_a, M_RB87))
        nm_gas = solve_fugacity(GasSpec(n * l0 ** 3, t_a, M_RB87 / m0),
                                constants=scaled)
        si_rate = rates.rate_simplified(
            rates.build_rate_inputs(si_modes, si_pot, si_gas))
        nm_rate = rates.rate_simplified(
            rates.build_rate_inputs(nm_modes, nm_pot, nm_gas))
        assert nm_rate.value == pytest.approx(si_rate.value, rel=1e-9)

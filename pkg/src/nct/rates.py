"""Excitation and thermalization rates of the tube phonons in the gas.

The golden-rule machinery reduces every rate to the pattern

    Gamma = A_l * sum_j (eta^j / j) Int dqbar |V(qbar)|^2 delta_j^l(qbar),

with the prefactor A_l = 8 pi m I_l^2 L / (hbar^3 lambda_dB^5), the spectral
weight

    delta_j^l(qbar) = (4 qbar^2 / (sqrt(pi) vk^3))
                      * exp[-j (qbar/vk + (vk/qbar)(hbar w_l beta/4))^2],

and vk = 4 sqrt(pi) R / lambda_dB.  Because delta_j is sharply peaked at
qbar_j^l against the smooth potential amplitude, the integral collapses to
|V(qbar_j)|^2 times the known integral of delta_j, which gives the
closed-form rate series; the pre-collapse integral is kept as an
independent quadrature oracle.

Cold, dilute corners of parameter space suppress the rates by factors like
exp(-1000), far below the smallest double.  Every rate is therefore also
reported as log_value, computed by factoring exp(-j hbar w beta) out of the
spectral weight analytically, so ordering and ratio checks survive
underflow of the linear value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import potential as potential_mod
from . import specfun
from .beam import ModeTable
from .gas import GasState
from .potential import PotentialSpec


@dataclass(frozen=True)
class RateInputs:
    """Mode table, potential and gas state plus the derived rate constants."""

    modes: ModeTable
    potential: PotentialSpec
    gas: GasState
    varkappa: float          # 4 sqrt(pi) R / lambda_dB
    prefactors: np.ndarray   # A_l [1/s per (J m^2)^2]


@dataclass(frozen=True)
class RateResult:
    value: float        # [1/s]; may underflow to 0.0 in extreme corners
    log_value: float    # ln(value), finite even when value underflows
    method: str         # series | fgr | simplified | c5 | quadrature
    j_terms_used: int
    mode: int
    l0_share: float | None = None


def build_rate_inputs(modes: ModeTable, potential: PotentialSpec,
                      gas: GasState) -> RateInputs:
    """Assemble RateInputs; rejects a condensed gas, where the thermal-series
    expansion of the rates does not apply."""
    if gas.eta >= 1.0 or gas.spec.temperature <= gas.t_bec:
        raise ValueError("rates require a gas above its condensation "
                         "temperature (eta < 1)")
    hbar = modes.spec.hbar
    if abs(gas.constants.hbar / hbar - 1.0) > 1e-12:
        raise ValueError("beam and gas were built with different constants")
    lam = gas.lambda_db
    vk = 4.0 * math.sqrt(math.pi) * potential.cutoff_radius / lam
    pref = (8.0 * math.pi * gas.spec.mass * modes.i_overlap ** 2
            * modes.spec.length / (hbar ** 3 * lam ** 5))
    return RateInputs(modes=modes, potential=potential, gas=gas,
                      varkappa=vk, prefactors=pref)


# ---------------------------------------------------------------------------
# spectral weight
# ---------------------------------------------------------------------------

def _beta_hw(inputs: RateInputs, l: int) -> float:
    return inputs.gas.beta_a * inputs.modes.spec.hbar * inputs.modes.omega[l]

def peak_location(j: int, l: int, inputs: RateInputs) -> float:
    """Stationary point qbar_j^l of the spectral weight."""
    if j < 1:
        raise ValueError("j must be >= 1")
    bhw = _beta_hw(inputs, l)
    return (inputs.varkappa / math.sqrt(2.0 * j)
            * math.sqrt(1.0 + math.sqrt(1.0 + (0.5 * j * bhw) ** 2)))


def peaked_weight(j: int, l: int, qbar, inputs: RateInputs):
    """Spectral weight delta_j^l(qbar); vanishes at both ends of (0, inf).

    Evaluated as exp[-j (qbar/vk - c/qbar)^2 - j hbar w_l beta] with
    c = vk hbar w_l beta / 4, which is identical to the defining square but
    never overflows the exponent for small qbar.
    """
    if j < 1:
        raise ValueError("j must be >= 1")
    qbar = np.asarray(qbar, dtype=float)
    if np.any(qbar <= 0):
        raise ValueError("qbar must be > 0")
    vk = inputs.varkappa
    bhw = _beta_hw(inputs, l)
    c = 0.25 * vk * bhw
    with np.errstate(over="ignore", under="ignore"):
        expo = -j * (qbar / vk - c / qbar) ** 2 - j * bhw
        val = (4.0 * qbar ** 2 / (math.sqrt(math.pi) * vk ** 3)
               * np.exp(expo))
    return val if val.ndim else float(val)


def _peaked_weight_scaled(j: int, l: int, qbar: np.ndarray,
                              inputs: RateInputs) -> np.ndarray:
    """delta_j^l(qbar) * exp(+j hbar w_l beta), the O(1) part of the weight."""
    vk = inputs.varkappa
    c = 0.25 * vk * _beta_hw(inputs, l)
    with np.errstate(over="ignore", under="ignore"):
        return (4.0 * qbar ** 2 / (math.sqrt(math.pi) * vk ** 3)
                * np.exp(-j * (qbar / vk - c / qbar) ** 2))


# ---------------------------------------------------------------------------
# potential amplitude at the peak
# ---------------------------------------------------------------------------

def _v_at_qbar(inputs: RateInputs, qbar: float) -> float:
    return potential_mod.v_fourier(inputs.potential,
                                   qbar / inputs.potential.cutoff_radius)


def _log_v2(inputs: RateInputs, qbar: float) -> float:
    v = _v_at_qbar(inputs, qbar)
    return 2.0 * math.log(abs(v)) if v != 0.0 else -math.inf


# ---------------------------------------------------------------------------
# rate formulas
# ---------------------------------------------------------------------------

def _assemble(log_terms: list[float], method: str, mode: int) -> RateResult:
    peak = max(log_terms)
    if math.isinf(peak):
        return RateResult(0.0, -math.inf, method, len(log_terms), mode)
    rest = math.fsum(math.exp(lt - peak) for lt in log_terms)
    log_value = peak + math.log(rest)
    return RateResult(math.exp(log_value) if log_value > -745.0 else 0.0,
                      log_value, method, len(log_terms), mode)


def _series_log_term(inputs: RateInputs, j: int, l: int) -> float:
    bhw = _beta_hw(inputs, l)
    beta_mu = inputs.gas.beta_a * inputs.gas.mu
    qbar_j = peak_location(j, l, inputs)
    return (math.log(inputs.prefactors[l]) + j * (beta_mu - bhw)
            + math.log1p(0.5 * j * bhw) - 2.5 * math.log(j)
            + _log_v2(inputs, qbar_j))


def rate_series(inputs: RateInputs, j_max: int = 200,
                rel_tol: float = 1e-10) -> RateResult:
    """Ground-mode excitation rate out of the vacuum, full thermal series.

    Gamma_0^v = A_0 sum_j e^{j beta (mu - hbar w0)} / j^{5/2}
                * (1 + j hbar w0 beta / 2) |V(qbar_j^0)|^2.
    Terms fall at least like eta^j e^{-j hbar w0 beta}; summation stops when
    a term drops below rel_tol of the running sum.
    """
    log_terms = [_series_log_term(inputs, 1, 0)]
    for j in range(2, j_max + 1):
        lt = _series_log_term(inputs, j, 0)
        log_terms.append(lt)
        if lt < max(log_terms) + math.log(rel_tol):
            break
    return _assemble(log_terms, "series", 0)


def rate_fgr(inputs: RateInputs) -> RateResult:
    """Golden-rule rate: exactly the leading j = 1 term of the series."""
    return _assemble([_series_log_term(inputs, 1, 0)], "fgr", 0)


def rate_simplified(inputs: RateInputs) -> RateResult:
    """Golden-rule rate with the classical fugacity eta -> n lambda^3:

    Gamma_0^v = (4 m^2 I_0^2 L / hbar^5) (k_B T_a + hbar w0 / 2) n
                * e^{-hbar w0 / k_B T_a} |V(qbar_1^0)|^2,
    linear in density and exponentially suppressed for k_B T_a < hbar w0.
    """
    g = inputs.gas
    hbar = inputs.modes.spec.hbar
    bhw = _beta_hw(inputs, 0)
    log_term = (math.log(4.0 * g.spec.mass ** 2 * inputs.modes.i_overlap[0] ** 2
                         * inputs.modes.spec.length / hbar ** 5)
                + math.log((1.0 + 0.5 * bhw) / g.beta_a)
                + math.log(g.spec.density) - bhw
                + _log_v2(inputs, peak_location(1, 0, inputs)))
    return _assemble([log_term], "simplified", 0)


def rate_c5(inputs: RateInputs) -> RateResult:
    """Single-power closed form, V(qbar) frozen at its long-wavelength value
    2 pi C5 / (3 R^3):

    Gamma_0^v = (16 pi^2 m^2 I_0^2 L / (9 hbar^5)) (k_B T_a + hbar w0/2) n
                * e^{-hbar w0 / k_B T_a} C5^2 / R^6.
    """
    terms = inputs.potential.terms
    if len(terms) != 1 or terms[0][0] != 5:
        raise ValueError("the C5 closed form needs a single n = 5 term")
    c5 = terms[0][1]
    r = inputs.potential.cutoff_radius
    g = inputs.gas
    hbar = inputs.modes.spec.hbar
    bhw = _beta_hw(inputs, 0)
    log_term = (math.log(16.0 * math.pi ** 2 * g.spec.mass ** 2
                         * inputs.modes.i_overlap[0] ** 2
                         * inputs.modes.spec.length / (9.0 * hbar ** 5))
                + math.log((1.0 + 0.5 * bhw) / g.beta_a)
                + math.log(g.spec.density) - bhw
                + (2.0 * math.log(abs(c5) / r ** 3) if c5 != 0.0
                   else -math.inf))
    return _assemble([log_term], "c5", 0)


def rate_quadrature_oracle(inputs: RateInputs, j_max: int = 200,
                           rel_tol: float = 1e-10,
                           quad_rel_tol: float = 1e-8) -> RateResult:
    """Rate without the peaked-weight collapse: each j term integrates
    |V(qbar)|^2 delta_j(qbar) by adaptive quadrature on (0, 20 qbar_j].

    Checks the mean-value step of the closed-form series independently.
    """
    beta_mu = inputs.gas.beta_a * inputs.gas.mu
    bhw = _beta_hw(inputs, 0)
    log_terms: list[float] = []
    for j in range(1, j_max + 1):
        qbar_j = peak_location(j, 0, inputs)

        def integrand(qb: np.ndarray) -> np.ndarray:
            w = _peaked_weight_scaled(j, 0, np.asarray(qb, dtype=float),
                                          inputs)
            v2 = np.array([_v_at_qbar(inputs, float(q)) ** 2 for q in np.atleast_1d(qb)])
            return w * v2

        integral = specfun.integrate_adaptive(
            integrand, 1e-12 * qbar_j, 20.0 * qbar_j, quad_rel_tol,
            abs_tol=0.0, vectorized=True)
        log_integral = math.log(integral) if integral > 0.0 else -math.inf
        lt = (math.log(inputs.prefactors[0]) + j * (beta_mu - bhw)
              - math.log(j) + log_integral)
        log_terms.append(lt)
        if lt < max(log_terms) + math.log(rel_tol):
            break
    return _assemble(log_terms, "quadrature", 0)


def vacuum_rate_multimode(inputs: RateInputs,
                          l_max: int | None = None) -> RateResult:
    """Total excitation rate out of the multi-mode vacuum,
    Gamma^v = sum_l A_l e^{beta(mu - hbar w_l)} (1 + beta hbar w_l / 2)
    |V(qbar_1^l)|^2, and the share carried by l = 0."""
    if l_max is None:
        l_max = inputs.modes.l_max
    if l_max > inputs.modes.l_max:
        raise ValueError("l_max exceeds the solved mode table")
    log_terms = [_fgr_log_term(inputs, l) for l in range(l_max + 1)]
    result = _assemble(log_terms, "fgr", l_max)
    share = math.exp(log_terms[0] - result.log_value) \
        if math.isfinite(result.log_value) else 1.0
    return RateResult(result.value, result.log_value, result.method,
                      result.j_terms_used, l_max, l0_share=share)


def _fgr_log_term(inputs: RateInputs, l: int) -> float:
    bhw = _beta_hw(inputs, l)
    beta_mu = inputs.gas.beta_a * inputs.gas.mu
    return (math.log(inputs.prefactors[l]) + beta_mu - bhw
            + math.log1p(0.5 * bhw)
            + _log_v2(inputs, peak_location(1, l, inputs)))


def thermalization_rate(inputs: RateInputs, l: int, beta_c: float) -> float:
    """Signed relaxation coefficient gamma_l(beta_c) [1/s]:

    gamma_l = A_l eta (1 - e^{(beta_c - beta_a) hbar w_l})
              (1 + beta_a hbar w_l / 2) |V(qbar_1^l)|^2.

    Positive (cooling) for a tube hotter than the gas, negative (heating)
    for a colder tube, and exactly zero at beta_c = beta_a.
    """
    if not 0 <= l <= inputs.modes.l_max:
        raise ValueError("mode index outside the solved table")
    bhw = _beta_hw(inputs, l)
    hbar_w = inputs.modes.spec.hbar * inputs.modes.omega[l]
    x = (beta_c - inputs.gas.beta_a) * hbar_w
    # x >> 1 (tube far colder than the gas): the heating rate coefficient
    # grows like e^x and leaves double range; the sign is all that matters
    balance = -math.expm1(x) if x < 700.0 else -math.inf
    v = _v_at_qbar(inputs, peak_location(1, l, inputs))
    return (float(inputs.prefactors[l]) * inputs.gas.eta * balance
            * (1.0 + 0.5 * bhw) * v * v)


# ---------------------------------------------------------------------------
# time-dependent occupation
# ---------------------------------------------------------------------------

def fj_convolution(j: int, q: float, t: float, inputs: RateInputs,
                   method: str = "direct", rel_tol: float = 1e-8) -> float:
    """Convolution of the squared sinc kernel with the thermal Gaussian:

    F_j(q) = Int dDelta sin^2(Delta t/2)/Delta^2
             * exp[-j beta hbar (w0 + w_q - Delta)^2 / (4 w_q)].

    method="direct" integrates over Delta on the window
    [-(W + 10 s + 50*2pi/t), +...], wide enough for the Gaussian center
    plus ten widths and fifty sinc lobes; method="parseval" uses the exact
    identity

        F_j = (sqrt(pi) s / 2) Int_0^t (t - tau) cos(W tau) e^{-s^2 tau^2/4} dtau,

    which trades the wildly oscillatory Delta integral for a short smooth
    one (W = w0 + w_q, s = sqrt(4 w_q / (j beta hbar))).  j = 0 disables the
    Gaussian; the bare sinc^2 integral is pi t / 2 exactly.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    if q <= 0:
        raise ValueError("q must be positive")
    if j == 0:
        return 0.5 * math.pi * t
    hbar = inputs.modes.spec.hbar
    beta = inputs.gas.beta_a
    w_q = hbar * q * q / (2.0 * inputs.gas.spec.mass)
    w_total = inputs.modes.omega[0] + w_q
    s = math.sqrt(4.0 * w_q / (j * beta * hbar))
    if method == "parseval":
        upper = min(t, 18.0 / s)
        panels = int(min(4.0 * w_total * upper / (2.0 * math.pi) + 4, 2000))

        def integrand(tau: np.ndarray) -> np.ndarray:
            return ((t - tau) * np.cos(w_total * tau)
                    * np.exp(-0.25 * (s * tau) ** 2))

        val = specfun.integrate_adaptive(
            integrand, 0.0, upper, rel_tol,
            abs_tol=1e-16 * 0.5 * math.pi * t,
            initial_panels=panels, vectorized=True, max_panels=60_000)
        return 0.5 * math.sqrt(math.pi) * s * val
    if method != "direct":
        raise ValueError(f"unknown method {method!r}")
    d_max = w_total + 10.0 * s + 50.0 * 2.0 * math.pi / t
    panels = int(min(2.0 * (2.0 * d_max) * t / (2.0 * math.pi) + 8, 8000))

    def integrand(delta: np.ndarray) -> np.ndarray:
        kernel = (0.5 * t * np.sinc(delta * t / (2.0 * math.pi))) ** 2
        with np.errstate(over="ignore", under="ignore"):
            gauss = np.exp(-j * beta * hbar * (w_total - delta) ** 2
                           / (4.0 * w_q))
        return kernel * gauss

    return specfun.integrate_adaptive(
        integrand, -d_max, d_max, rel_tol,
        abs_tol=1e-16 * 0.5 * math.pi * t,
        initial_panels=panels, vectorized=True, max_panels=120_000)


def occupation_vs_time(inputs: RateInputs, t: float, j_max: int = 50,
                       rel_tol: float = 1e-6,
                       fj_method: str = "parseval") -> float:
    """Ground-manifold occupation p_0^v(t) of an initially still tube.

    p_0^v(t) = [m^2 I_0^2 L / (2 pi^3 hbar^5 beta_a)]
               * sum_j (eta^j / j) Int_0^inf dq q^2 |V(q)|^2 F_j(q).

    The long-time slope reproduces the golden-rule rate; p(0) = 0.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    if t == 0.0:
        return 0.0
    g = inputs.gas
    hbar = inputs.modes.spec.hbar
    r = inputs.potential.cutoff_radius
    pref = (g.spec.mass ** 2 * inputs.modes.i_overlap[0] ** 2
            * inputs.modes.spec.length
            / (2.0 * math.pi ** 3 * hbar ** 5 * g.beta_a))
    total = 0.0
    for j in range(1, j_max + 1):
        q_up = 25.0 * peak_location(j, 0, inputs) / r

        def integrand(q: float) -> float:
            v = potential_mod.v_fourier(inputs.potential, q)
            return q * q * v * v * fj_convolution(j, q, t, inputs,
                                                  method=fj_method,
                                                  rel_tol=0.1 * rel_tol)

        q_int = specfun.integrate_adaptive(
            integrand, 1e-9 * q_up, q_up, rel_tol, abs_tol=0.0,
            max_panels=4000)
        term = pref * g.eta ** j / j * q_int
        total += term
        if term < rel_tol * total:
            break
    return total

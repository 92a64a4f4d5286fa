"""Relaxation dynamics of the phonon occupations toward the gas temperature.

Each unpolarized mode occupation obeys dp_l/dt = -gamma_l(beta_c) p_l with
the signed coefficients from `rates.thermalization_rate`.  The coupled
closure is the effective inverse temperature beta_c(t): the tube is assumed
to stay near a thermal state, and beta_c is read off the ground-mode
occupation (the ground mode carries essentially all the relaxation flow).
An energy-weighted closure over all modes is available as an alternative;
the two agree at the percent level for thermal initial states.

The stepper is an explicit embedded Cash-Karp 4(5) pair with proportional
step control; cooling trajectories are only mildly stiff because every
relative rate is bounded by the detailed-balance prefactor.  Heating is
different: a mode colder than the gas grows like e^{(beta_c-beta_a) hbar w_l},
so the closure (and any explicit stepper) only supports heating when that
exponent is moderate for every retained mode - small thermal offsets, or a
short mode table.  Cooling from a hot tube, the regime of interest, has no
such restriction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import specfun
from .beam import ModeTable
from .constants import CODATA, Constants
from .rates import RateInputs, thermalization_rate


@dataclass(frozen=True)
class EvolveControl:
    rel_tol: float = 1e-8
    n_samples: int = 200
    max_steps: int = 500_000
    beta_mode: str = "ground"   # "ground" | "energy"

    def __post_init__(self) -> None:
        if self.beta_mode not in ("ground", "energy"):
            raise ValueError("beta_mode must be 'ground' or 'energy'")
        if not 0 < self.rel_tol < 1:
            raise ValueError("rel_tol must lie in (0, 1)")


@dataclass(frozen=True)
class CoolingTrajectory:
    times: np.ndarray          # [s]
    occupations: np.ndarray    # shape (n_times, n_modes), both polarizations
    t_c_eff: np.ndarray        # effective tube temperature [K]
    converged: bool            # reached |T_c - T_a|/T_a < 1e-3


def thermal_occupations(modes: ModeTable, t_c: float,
                        constants: Constants = CODATA) -> np.ndarray:
    """Canonical occupations p_l = 2/(e^{beta hbar w_l} - 1), summed over
    both polarizations; all zero at T_c = 0."""
    if t_c < 0:
        raise ValueError("temperature must be >= 0")
    if t_c == 0.0:
        return np.zeros_like(modes.omega)
    x = constants.hbar * modes.omega / (constants.k_b * t_c)
    with np.errstate(over="ignore"):
        return 2.0 / np.expm1(x)


def effective_beta(modes: ModeTable, p: np.ndarray,
                   mode: str = "ground") -> float:
    """Inverse tube temperature beta_c [1/J] matching the occupations.

    "ground" inverts p_0 = 2/(e^{beta hbar w_0} - 1) in closed form;
    "energy" solves for the canonical beta carrying the same total phonon
    energy sum_l hbar w_l p_l.  p_0 <= 0 maps to beta = +inf (T = 0).
    """
    hbar = modes.spec.hbar
    p = np.asarray(p, dtype=float)
    if mode == "ground":
        if not p[0] > 0.0:
            return math.inf
        return _log_boltzmann_ground(p[0]) / (hbar * modes.omega[0])
    if mode != "energy":
        raise ValueError("mode must be 'ground' or 'energy'")
    energies = hbar * modes.omega
    target = float(np.dot(energies, p))
    if not (target > 0.0 and math.isfinite(target)):
        return math.inf

    def excess(log_beta: float) -> float:
        b = math.exp(log_beta)
        with np.errstate(over="ignore"):
            return float(np.dot(energies, 2.0 / np.expm1(b * energies))) - target

    # total energy is monotone decreasing in beta; expand a bracket around a
    # beta hbar w_0 ~ 1 seed (occupations may be far from thermal)
    lo = hi = -math.log(hbar * modes.omega[0])
    for _ in range(400):
        if excess(lo) > 0.0:
            break
        lo -= 3.0
    for _ in range(400):
        if excess(hi) < 0.0:
            break
        hi += 3.0
    root = specfun.find_root_bracketed(excess, lo, hi, tol=1e-12)
    return math.exp(root)


def _log_boltzmann_ground(p0: float) -> float:
    """ln(1 + 2/p0) = beta_c hbar w_0 under the ground-mode closure,
    safe against overflow of 2/p0 for subnormal occupations."""
    if p0 < 1e-8:
        return math.log(2.0) - math.log(p0)
    return math.log1p(2.0 / p0)


def _balance_coefficients(inputs: RateInputs) -> tuple[np.ndarray, np.ndarray]:
    """gamma_l(beta_c) = G_l * (1 - e^{(beta_c - beta_a) hbar w_l}); the
    beta-independent G_l are precomputed once per trajectory."""
    n_modes = inputs.modes.l_max + 1
    beta_a = inputs.gas.beta_a
    hbar_w = inputs.modes.spec.hbar * inputs.modes.omega[:n_modes]
    # thermalization_rate at beta_c = 0 gives G_l (1 - e^{-beta_a hbar w_l})
    g = np.array([thermalization_rate(inputs, l, 0.0)
                  for l in range(n_modes)])
    scale = -np.expm1(-beta_a * hbar_w)
    return g / scale, hbar_w


def _make_deriv(inputs: RateInputs, modes: ModeTable, beta_mode: str):
    """Derivative dp_l/dt = G_l (e^{(beta_c-beta_a) hbar w_l} p_l - p_l).

    The Boltzmann growth factor is evaluated in log space; under the
    ground-mode closure e^{beta_c hbar w_l} = (1 + 2/p_0)^{w_l/w_0} exactly,
    so a cold tube in a warm gas never overflows (the divergent gamma_l is
    always tempered by the vanishing p_l).  Invalid trial states (p_0 <= 0)
    yield NaN, which the step controller rejects.
    """
    g_coef, hbar_w = _balance_coefficients(inputs)
    beta_a = inputs.gas.beta_a
    w_ratio = modes.omega / modes.omega[0]

    def deriv(p: np.ndarray) -> np.ndarray:
        if not np.all(np.isfinite(p)) or np.any(p < 0.0):
            return np.full_like(p, np.nan)
        if beta_mode == "ground":
            if not p[0] > 0.0:
                return np.full_like(p, np.nan)
            log_boltz = w_ratio * _log_boltzmann_ground(p[0])
        else:
            try:
                beta_c = effective_beta(modes, p, beta_mode)
            except specfun.BracketError:
                return np.full_like(p, np.nan)  # wild trial state: reject
            if not math.isfinite(beta_c):
                return np.full_like(p, np.nan)
            log_boltz = beta_c * hbar_w
        with np.errstate(divide="ignore", over="ignore", under="ignore"):
            growth = np.exp(log_boltz - beta_a * hbar_w + np.log(p))
        return g_coef * (growth - p)

    return deriv


# Cash-Karp embedded Runge-Kutta pair (orders 5 and 4)
_CK_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (3 / 10, -9 / 10, 6 / 5),
    (-11 / 54, 5 / 2, -70 / 27, 35 / 27),
    (1631 / 55296, 175 / 512, 575 / 13824, 44275 / 110592, 253 / 4096),
)
_CK_B5 = (37 / 378, 0.0, 250 / 621, 125 / 594, 0.0, 512 / 1771)
_CK_B4 = (2825 / 27648, 0.0, 18575 / 48384, 13525 / 55296,
          277 / 14336, 1 / 4)


def evolve(inputs: RateInputs, t_c0: float, t_end: float,
           ctrl: EvolveControl = EvolveControl(),
           constants: Constants = CODATA) -> CoolingTrajectory:
    """Integrate the mode occupations from a thermal start at t_c0.

    beta_c is frozen within each step (explicit scheme) and refreshed from
    the current occupations before every derivative evaluation.  Samples
    are geometrically spaced in time; the converged flag is set once the
    effective temperature settles within 0.1% of the gas.
    """
    if t_c0 <= 0:
        raise ValueError("initial tube temperature must be positive")
    if t_end <= 0:
        raise ValueError("t_end must be positive")
    modes = inputs.modes
    t_a = inputs.gas.spec.temperature
    deriv = _make_deriv(inputs, modes, ctrl.beta_mode)

    def temperature_of(p: np.ndarray) -> float:
        beta_c = effective_beta(modes, p, ctrl.beta_mode)
        return 1.0 / (constants.k_b * beta_c) if math.isfinite(beta_c) else 0.0

    sample_times = np.concatenate(
        [[0.0], np.geomspace(t_end * 1e-6, t_end, ctrl.n_samples - 1)])
    p = thermal_occupations(modes, t_c0, constants)
    out_p = [p.copy()]
    out_t_eff = [temperature_of(p)]
    converged = abs(out_t_eff[0] - t_a) / t_a < 1e-3

    t = 0.0
    rate0 = float(np.max(np.abs(deriv(p))) / max(np.max(p), 1e-300))
    dt = 0.01 / rate0 if rate0 > 0 else t_end / ctrl.n_samples
    floor = 1e-12 * float(np.max(p))
    steps = 0
    for t_target in sample_times[1:]:
        while t < t_target:
            steps += 1
            if steps > ctrl.max_steps:
                raise RuntimeError("step budget exhausted before t_end")
            dt = min(dt, t_target - t)
            if t + dt == t:
                raise RuntimeError("step size underflow")
            with np.errstate(over="ignore", invalid="ignore"):
                k = [deriv(p)]
                for row in _CK_A[1:]:
                    y = p + dt * sum(a * ki for a, ki in zip(row, k))
                    k.append(deriv(y))
                p5 = p + dt * sum(b * ki for b, ki in zip(_CK_B5, k))
                p4 = p + dt * sum(b * ki for b, ki in zip(_CK_B4, k))
            # a trial crossing below zero is rejected like any failed step;
            # occupations then reach zero only by clean multiplicative
            # underflow, never by clipping
            if (np.all(np.isfinite(p5)) and np.all(np.isfinite(p4))
                    and np.all(p5 >= 0.0)):
                err = np.max(np.abs(p5 - p4)
                             / (ctrl.rel_tol * (np.abs(p5) + floor)))
            else:
                err = math.inf
            if err <= 1.0:
                t += dt
                p = p5
            grow = 0.9 * err ** -0.2 if err > 0 else 5.0
            dt *= min(5.0, max(0.2, grow))
        out_p.append(p.copy())
        t_eff = temperature_of(p)
        out_t_eff.append(t_eff)
        if abs(t_eff - t_a) / t_a < 1e-3:
            converged = True
    return CoolingTrajectory(times=sample_times,
                             occupations=np.array(out_p),
                             t_c_eff=np.array(out_t_eff),
                             converged=converged)


def evolve_fixed_step(inputs: RateInputs, t_c0: float, t_end: float,
                      n_steps: int, beta_mode: str = "ground",
                      constants: Constants = CODATA) -> np.ndarray:
    """Classic fixed-step RK4 reference integrator (Richardson checks).

    Returns the final occupations after n_steps uniform steps; kept free of
    any adaptive machinery so it can serve as an independent oracle for
    `evolve`.
    """
    modes = inputs.modes
    deriv = _make_deriv(inputs, modes, beta_mode)
    p = thermal_occupations(modes, t_c0, constants)
    h = t_end / n_steps
    for _ in range(n_steps):
        k1 = deriv(p)
        k2 = deriv(p + 0.5 * h * k1)
        k3 = deriv(p + 0.5 * h * k2)
        k4 = deriv(p + h * k3)
        p = p + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return p


def suggested_horizon(inputs: RateInputs, t_c0: float,
                      constants: Constants = CODATA) -> float:
    """Integration window long enough to thermalize the ground mode.

    The ground occupation travels |ln(p_0(T_c0)/p_0(T_a))| e-folds at a
    rate bounded by gamma_0(T_c0); twice that many e-folds plus margin
    covers the slow-down near equilibrium.
    """
    beta_c0 = 1.0 / (constants.k_b * t_c0)
    if thermalization_rate(inputs, 0, beta_c0) == 0.0:
        raise ValueError("zero initial rate; tube already at equilibrium")
    # the relaxation time constant in both directions is set by the
    # detailed-balance prefactor, i.e. the rate at beta_c -> 0
    g_scale = abs(thermalization_rate(inputs, 0, 0.0))
    hw0 = inputs.modes.spec.hbar * inputs.modes.omega[0]

    def log_occ(beta: float) -> float:
        # ln(2 / (e^{beta hw} - 1)) without overflow of the exponential
        x = beta * hw0
        return math.log(2.0) - (x + math.log1p(-math.exp(-x)))

    efolds = abs(log_occ(beta_c0) - log_occ(inputs.gas.beta_a)) + 10.0
    return 2.0 * efolds / g_scale

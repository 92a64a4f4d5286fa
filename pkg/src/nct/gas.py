"""Equilibrium thermodynamics of the homogeneous Bose gas.

The grand-canonical state of an ideal gas at density n and temperature T_a
is fixed by the particle-number constraint g_{3/2}(eta) = n lambda_dB^3 for
T_a above the condensation temperature; below it the fugacity saturates at
eta = 1 and the excess particles condense.  Only intensive quantities enter
the downstream rate formulas, so no box volume is stored; the correlation
amplitude takes a volume argument explicitly for oracle tests.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass

from .constants import CODATA, Constants
from . import specfun
from .specfun import DEFAULT_SERIES, G32_AT_1, SeriesControl


@dataclass(frozen=True)
class GasSpec:
    density: float      # n [1/m^3]
    temperature: float  # T_a [K]
    mass: float         # m [kg]

    def __post_init__(self) -> None:
        if self.density <= 0 or self.mass <= 0:
            raise ValueError("density and mass must be positive")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")


@dataclass(frozen=True)
class GasState:
    """Solved gas thermodynamics; immutable after construction."""

    spec: GasSpec
    lambda_db: float            # thermal de Broglie wavelength [m]
    t_bec: float                # condensation temperature [K]
    eta: float                  # fugacity, in [0, 1]
    mu: float                   # chemical potential [J]
    condensate_fraction: float
    beta_a: float               # 1/(k_B T_a) [1/J]
    constants: Constants = CODATA


def lambda_db(t_a: float, mass: float, constants: Constants = CODATA) -> float:
    """Thermal de Broglie wavelength hbar sqrt(2 pi beta / m) [m]."""
    if t_a <= 0:
        raise ValueError("de Broglie wavelength diverges at T = 0")
    beta = 1.0 / (constants.k_b * t_a)
    return constants.hbar * math.sqrt(2.0 * math.pi * beta / mass)


def t_bec(density: float, mass: float, constants: Constants = CODATA) -> float:
    """Condensation temperature of the ideal gas [K]."""
    if density <= 0:
        raise ValueError("density must be positive")
    return (2.0 * math.pi * constants.hbar ** 2 / (mass * constants.k_b)
            * (density / G32_AT_1) ** (2.0 / 3.0))


_ETA_DIRECT_MAX = 0.95  # above this, solve in u = sqrt(-ln eta)


def solve_fugacity(spec: GasSpec, constants: Constants = CODATA,
                   ctrl: SeriesControl = DEFAULT_SERIES) -> GasState:
    """Solve the particle-number constraint and assemble the gas state.

    Above T_BEC the fugacity solves g_{3/2}(eta) = n lambda^3; close to the
    transition the equation is solved in u = sqrt(-ln eta), where g_{3/2}
    has an O(1) slope, keeping the constraint residual at the 1e-12 level.
    At or below T_BEC, eta = 1 and the condensate fraction follows the
    (T/T_BEC)^{3/2} law.
    """
    tc = t_bec(spec.density, spec.mass, constants)
    t_a = spec.temperature
    if t_a <= tc:
        lam = lambda_db(t_a, spec.mass, constants) if t_a > 0 else math.inf
        beta = (1.0 / (constants.k_b * t_a)) if t_a > 0 else math.inf
        frac = 1.0 - (t_a / tc) ** 1.5
        return GasState(spec=spec, lambda_db=lam, t_bec=tc, eta=1.0, mu=0.0,
                        condensate_fraction=frac, beta_a=beta,
                        constants=constants)
    lam = lambda_db(t_a, spec.mass, constants)
    beta = 1.0 / (constants.k_b * t_a)
    target = spec.density * lam ** 3
    if target >= G32_AT_1:
        # a few ulps above the transition, rounding can push n lambda^3 to
        # the saturation value; the solution is the branch boundary itself
        return GasState(spec=spec, lambda_db=lam, t_bec=tc, eta=1.0, mu=0.0,
                        condensate_fraction=0.0, beta_a=beta,
                        constants=constants)
    if target >= specfun.polylog_3_2(_ETA_DIRECT_MAX, ctrl):
        u_hi = math.sqrt(-math.log(_ETA_DIRECT_MAX))
        u = specfun.find_root_bracketed(
            lambda v: specfun.polylog_3_2(math.exp(-v * v), ctrl) - target,
            0.0, u_hi, tol=1e-13)
        alpha = u * u
        eta = math.exp(-alpha)
        mu = -alpha / beta
    else:
        eta = specfun.find_root_bracketed(
            lambda e: specfun.polylog_3_2(e, ctrl) - target,
            0.0, _ETA_DIRECT_MAX, tol=1e-14)
        mu = math.log(eta) / beta
    return GasState(spec=spec, lambda_db=lam, t_bec=tc, eta=eta, mu=mu,
                    condensate_fraction=0.0, beta_a=beta, constants=constants)


def occupation(state: GasState, eps_k: float) -> float:
    """Bose-Einstein mean occupation at kinetic energy eps_k [J]."""
    if eps_k < 0:
        raise ValueError("kinetic energy must be >= 0")
    if eps_k <= state.mu:
        raise ValueError("occupation diverges for eps_k <= mu")
    x = state.beta_a * (eps_k - state.mu)
    if x > 700.0:
        return math.exp(-x)  # underflows smoothly to zero
    return 1.0 / math.expm1(x)


def correlation_brute_force(state: GasState, tau: float, q_steps: int = 2,
                            half_points: int = 10, dk_scale: float = 0.35
                            ) -> tuple[complex, complex, float, float]:
    """Discrete-grid oracle for the correlation amplitude.

    Sums n_{k-q} (1 + n_k) e^{i (w_{k-q} - w_k) tau} over a cubic momentum
    grid of (2*half_points+1)^3 plane waves with spacing dk_scale times the
    thermal momentum, q = q_steps grid units along z.  Returns (brute,
    analytic, omega_q, volume) so callers can compare the exact Bose sum
    (with stimulated enhancement) against the non-degenerate closed form.
    """
    import numpy as np

    if state.eta >= 1.0:
        raise ValueError("brute-force correlation needs eta < 1")
    hbar = state.constants.hbar
    mass = state.spec.mass
    k_thermal = 2.0 * math.sqrt(math.pi) / state.lambda_db
    dk = dk_scale * k_thermal
    volume = (2.0 * math.pi / dk) ** 3
    idx = np.arange(-half_points, half_points + 1)
    kx, ky, kz = np.meshgrid(idx, idx, idx, indexing="ij")
    k2 = (kx ** 2 + ky ** 2 + kz ** 2).astype(float) * dk ** 2
    kq2 = (kx ** 2 + ky ** 2 + (kz - q_steps) ** 2).astype(float) * dk ** 2
    eps_k = hbar ** 2 * k2 / (2.0 * mass)
    eps_kq = hbar ** 2 * kq2 / (2.0 * mass)
    n_k = 1.0 / np.expm1(state.beta_a * (eps_k - state.mu))
    n_kq = 1.0 / np.expm1(state.beta_a * (eps_kq - state.mu))
    phase = np.exp(1j * (eps_kq - eps_k) / hbar * tau)
    brute = complex(np.sum(n_kq * (1.0 + n_k) * phase))
    q = q_steps * dk
    omega_q = hbar * q * q / (2.0 * mass)
    analytic = thermal_correlation(state, omega_q, tau, volume)
    return brute, analytic, omega_q, volume


def thermal_correlation(state: GasState, omega_q: float, tau: float,
                        volume: float) -> complex:
    """Analytic density-fluctuation correlation amplitude g_q(tau).

    g_q(tau) = (eta V / lambda^3) exp[-i omega_q tau (1 - i tau/(hbar beta))]
    in the non-degenerate regime; its modulus decays as a Gaussian in tau.
    Valid above T_BEC; a warning is issued otherwise.
    """
    if volume <= 0:
        raise ValueError("volume must be positive")
    if state.spec.temperature <= state.t_bec:
        warnings.warn("correlation amplitude derived for T_a > T_BEC",
                      stacklevel=2)
    amp = state.eta * volume / state.lambda_db ** 3
    hbar = state.constants.hbar
    return amp * cmath.exp(-1j * omega_q * tau
                           * (1.0 - 1j * tau / (hbar * state.beta_a)))

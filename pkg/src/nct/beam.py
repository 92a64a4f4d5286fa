"""Clamped-free elastic beam eigenproblem for the nanotube.

Transverse vibrations follow the Euler-Bernoulli equation; the cantilever
boundary conditions quantize the wave numbers through
cos(kL) cosh(kL) = -1.  This module solves that condition, evaluates the
eigenmodes in a hyperbolic-overflow-safe form, normalizes them against the
scalar product <phi_l|phi_m> = integral phi_l phi_m dz / L = a_l^2 delta_lm,
and derives the per-mode overlap constants and the thermal motion of the
free tip.

The shape of mode l with x = kappa_l L is

    phihat(y) = cosh y - cos y - sigma (sinh y - sin y),
    sigma     = (cosh x + cos x) / (sinh x + sin x),

which satisfies integral phihat^2 dy = x, so phi_l(z) = a_l phihat(kappa_l z).
For large x both cosh y and sigma sinh y grow like e^y/2 while their
difference stays O(1); the evaluation below factors e^{-x} analytically out
of (1 - sigma) so no catastrophic cancellation or overflow occurs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constants import CODATA, Constants, HBAR
from . import specfun

_MAX_MODES = 200  # keeps kappa_l L < 640, far from hyperbolic overflow


@dataclass(frozen=True)
class BeamSpec:
    """Tube geometry and stiffness; exactly one of ei / omega0 is given."""

    radius: float            # R [m]
    length: float            # L [m]
    lin_density: float       # rho_c [kg/m]
    ei: float | None = None      # flexural rigidity EI [N m^2]
    omega0: float | None = None  # ground-mode angular frequency [rad/s]
    hbar: float = HBAR

    def __post_init__(self) -> None:
        for name in ("radius", "length", "lin_density", "hbar"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if (self.ei is None) == (self.omega0 is None):
            raise ValueError("give exactly one of ei or omega0")
        stiffness = self.ei if self.ei is not None else self.omega0
        if stiffness <= 0:
            raise ValueError("stiffness must be positive")


def solve_wavenumbers(spec: BeamSpec, l_max: int) -> np.ndarray:
    """Wave numbers kappa_l [1/m] for l = 0..l_max.

    In x = kappa L the mode condition cos x cosh x = -1 is solved as
    cos x + sech x = 0, which stays O(1) for large x.  The l-th root is
    bracketed in (l pi, (l+1) pi) and refined to 1e-13 relative.
    """
    if l_max < 0:
        raise ValueError("l_max must be >= 0")
    if l_max > _MAX_MODES:
        raise ValueError(f"l_max capped at {_MAX_MODES}")
    f = lambda x: math.cos(x) + 1.0 / math.cosh(x)
    roots = []
    for l in range(l_max + 1):
        lo, hi = l * math.pi, (l + 1) * math.pi
        roots.append(specfun.find_root_bracketed(f, lo, hi, tol=1e-13 * hi))
    return np.array(roots) / spec.length


def resolve_stiffness(spec: BeamSpec) -> float:
    """Flexural rigidity EI [N m^2], inverting the dispersion when only the
    ground frequency is known: EI = rho_c omega0^2 / kappa_0^4."""
    if spec.ei is not None:
        return spec.ei
    kappa0 = solve_wavenumbers(spec, 0)[0]
    return spec.lin_density * spec.omega0 ** 2 / kappa0 ** 4


def dispersion(spec: BeamSpec, kappa: float | np.ndarray) -> float | np.ndarray:
    """Quadratic phonon dispersion omega = sqrt(EI / rho_c) kappa^2."""
    return math.sqrt(resolve_stiffness(spec) / spec.lin_density) * np.square(kappa)


def normalization_constant(kappa_l: float, length: float, a_l: float) -> float:
    """Closed-form mode normalization atilde_l = a_l / (sin x + sinh x).

    Evaluated as a_l e^{-x} / [(1 - e^{-2x})/2 + e^{-x} sin x] so it neither
    overflows nor loses digits for large x = kappa_l L.
    """
    x = kappa_l * length
    if x <= 0:
        raise ValueError("kappa_l * length must be positive")
    emx = math.exp(-x)
    scaled = 0.5 * (1.0 - emx * emx) + emx * math.sin(x)
    return a_l * emx / scaled


@dataclass(frozen=True)
class ModeTable:
    """Immutable per-mode data for l = 0..l_max (arrays indexed by l)."""

    spec: BeamSpec
    ei: float
    kappa: np.ndarray      # [1/m]
    omega: np.ndarray      # [rad/s]
    a: np.ndarray          # oscillator length [m]
    atilde: np.ndarray     # normalization constant [m]
    i_overlap: np.ndarray  # I_l = int phi_l dz / (sqrt(2) L) [m]
    j_overlap: np.ndarray  # J_l = a_l^2 / 4 [m^2]
    # shape coefficients for the overflow-safe eigenmode evaluation
    _x: np.ndarray = field(repr=False)
    _sigma: np.ndarray = field(repr=False)
    _delta_scaled: np.ndarray = field(repr=False)  # (1 - sigma) e^{x}

    @property
    def l_max(self) -> int:
        return len(self.kappa) - 1


def _shape_coefficients(x: float) -> tuple[float, float]:
    """(sigma, (1-sigma) e^x) for the mode shape, computed without
    evaluating cosh - sinh differences explicitly."""
    emx = math.exp(-x)
    s_scaled = 0.5 * (1.0 - emx * emx) + emx * math.sin(x)  # e^{-x}(sinh x + sin x)
    delta_scaled = (math.sin(x) - math.cos(x) - emx) / s_scaled
    sigma = 1.0 - delta_scaled * emx
    return sigma, delta_scaled


def _unit_shape(y, x: float, sigma: float, delta_scaled: float):
    """phihat(y) = cosh y - cos y - sigma (sinh y - sin y), stably."""
    y = np.asarray(y, dtype=float)
    delta = delta_scaled * math.exp(-x)
    grow = 0.5 * delta_scaled * np.exp(y - x)
    decay = (1.0 - 0.5 * delta) * np.exp(-y)
    val = grow + decay + sigma * np.sin(y) - np.cos(y)
    return val if val.ndim else float(val)


def build_mode_table(spec: BeamSpec, l_max: int) -> ModeTable:
    """Solve the eigenproblem and assemble all per-mode quantities."""
    kappa = solve_wavenumbers(spec, l_max)
    ei = resolve_stiffness(spec)
    omega = np.sqrt(ei / spec.lin_density) * kappa ** 2
    a = np.sqrt(spec.hbar / (omega * spec.lin_density * spec.length))
    x = kappa * spec.length
    sigma = np.empty_like(x)
    delta_scaled = np.empty_like(x)
    atilde = np.empty_like(x)
    i_overlap = np.empty_like(x)
    for l in range(l_max + 1):
        sigma[l], delta_scaled[l] = _shape_coefficients(x[l])
        atilde[l] = normalization_constant(kappa[l], spec.length, a[l])
        shape_int = specfun.integrate_adaptive(
            lambda y: _unit_shape(y, x[l], sigma[l], delta_scaled[l]),
            0.0, x[l], rel_tol=1e-12, vectorized=True)
        i_overlap[l] = a[l] * shape_int / (math.sqrt(2.0) * x[l])
    return ModeTable(spec=spec, ei=ei, kappa=kappa, omega=omega, a=a,
                     atilde=atilde, i_overlap=i_overlap, j_overlap=a ** 2 / 4.0,
                     _x=x, _sigma=sigma, _delta_scaled=delta_scaled)


def eigenmode_eval(table: ModeTable, l: int, z):
    """Displacement amplitude phi_l(z) [m] for z in [0, L].

    Sign convention: phi_l''(0) > 0 for every l.  Normalized so that
    integral phi_l^2 dz / L = a_l^2.
    """
    if not 0 <= l <= table.l_max:
        raise ValueError(f"mode index {l} outside table (l_max={table.l_max})")
    z_arr = np.asarray(z, dtype=float)
    if np.any(z_arr < 0) or np.any(z_arr > table.spec.length * (1 + 1e-12)):
        raise ValueError("z outside the beam [0, L]")
    y = table.kappa[l] * z_arr
    return table.a[l] * _unit_shape(y, table._x[l], table._sigma[l],
                                    table._delta_scaled[l])


def overlaps(table: ModeTable) -> tuple[np.ndarray, np.ndarray]:
    """(I_l, J_l): quadrature overlap of each mode and the squared
    zero-point scale a_l^2/4."""
    return table.i_overlap.copy(), table.j_overlap.copy()


def thermal_occupation(omega: float, temperature: float,
                       constants: Constants = CODATA) -> float:
    """Bose occupation 1/(e^{hbar omega / k_B T} - 1); zero at T = 0."""
    if temperature < 0:
        raise ValueError("temperature must be >= 0")
    if temperature == 0.0:
        return 0.0
    return 1.0 / math.expm1(constants.hbar * omega
                            / (constants.k_b * temperature))


def thermal_tip_displacement(table: ModeTable, t_c: float, l_cut: int,
                             constants: Constants = CODATA) -> float:
    """RMS thermal displacement of the free tip, both polarizations.

    u^2 = sum_sigma (1/2) sum_{l<=l_cut} phi_l(L)^2 (2 n_l + 1), from the
    variance of the quantized displacement field at z = L with canonical
    occupations n_l; at T = 0 only zero-point motion remains.
    """
    if l_cut > table.l_max:
        raise ValueError("l_cut exceeds the solved mode table")
    total = 0.0
    for l in range(l_cut + 1):
        tip = float(eigenmode_eval(table, l, table.spec.length))
        n_l = thermal_occupation(table.omega[l], t_c, constants)
        total += tip * tip * (2.0 * n_l + 1.0)
    return math.sqrt(total)

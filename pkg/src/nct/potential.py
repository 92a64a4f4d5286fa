"""Inverse-power surface potential and its transverse Fourier transform.

Real space: V(rho) = sum_n C_n / rho^n outside the cutoff radius R, zero
inside.  The axis-symmetric two-dimensional Fourier transform reduces to

    V(q) = 2 pi sum_n C_n / R^{n-2} * V_n(q R),

with dimensionless amplitudes V_n(qbar) = Int_1^inf J0(qbar u) u^{1-n} du.
For odd n the amplitude has the closed form

    V_n(qbar) = 1F2(1-n/2; {1, 2-n/2}; -qbar^2/4)/(n-2)
                - n Gamma(-n/2) / (2^n Gamma(n/2)) * qbar^{n-2};

for even n Gamma(-n/2) sits on a pole and the pair of divergent terms only
cancels in the limit, so even amplitudes are always evaluated through the
defining Hankel integral (partitioned between Bessel zeros and accelerated
as an alternating series).  The quadrature route doubles as the independent
oracle for the closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import specfun
from .specfun import DEFAULT_SERIES, SeriesControl


@dataclass(frozen=True)
class PotentialSpec:
    """Cutoff radius and inverse-power coefficients (n, C_n [J m^n])."""

    cutoff_radius: float
    terms: tuple[tuple[int, float], ...]

    def __post_init__(self) -> None:
        if self.cutoff_radius <= 0:
            raise ValueError("cutoff radius must be positive")
        if not self.terms:
            raise ValueError("at least one inverse-power term is required")
        for n, _ in self.terms:
            if n <= 2 or n != int(n):
                raise ValueError(f"inverse powers must be integers > 2, got {n}")

    @staticmethod
    def single_c5(radius: float, c5: float) -> "PotentialSpec":
        return PotentialSpec(cutoff_radius=radius, terms=((5, c5),))


def v_real(spec: PotentialSpec, rho: float) -> float:
    """Potential energy [J] at radial distance rho; zero inside the tube."""
    if rho < 0:
        raise ValueError("rho must be >= 0")
    if rho <= spec.cutoff_radius:
        return 0.0
    return sum(c_n / rho ** n for n, c_n in spec.terms)


def vn_dimensionless(n: int, qbar: float,
                     ctrl: SeriesControl = DEFAULT_SERIES) -> float:
    """Closed-form dimensionless amplitude V_n(qbar), odd n only."""
    _check_amplitude_args(n, qbar)
    if n % 2 == 0:
        raise ValueError(
            f"n = {n}: Gamma(-n/2) pole; even powers go through vn_quadrature")
    if qbar == 0.0:
        return 1.0 / (n - 2)
    series = specfun.hyp1f2(1.0 - n / 2.0, 1.0, 2.0 - n / 2.0,
                            -0.25 * qbar * qbar, ctrl)
    lg_neg, sign_neg = specfun.ln_gamma(-0.5 * n)
    lg_pos, _ = specfun.ln_gamma(0.5 * n)
    coef = sign_neg * n * math.exp(lg_neg - lg_pos - n * math.log(2.0))
    return series / (n - 2) - coef * qbar ** (n - 2)


_LOBES = 30


def vn_quadrature(n: int, qbar: float, rel_tol: float = 1e-9,
                  abs_tol: float = 1e-12) -> float:
    """V_n(qbar) from the defining integral Int_1^inf J0(qbar u) u^{1-n} du.

    The integrand is integrated exactly up to the first Bessel zero beyond
    u = 1, then lobe by lobe between consecutive zeros; the alternating lobe
    sums are extrapolated by iterated averaging.  Serves as the oracle for
    the closed form and as the production route for even n.
    """
    _check_amplitude_args(n, qbar)
    if qbar < 1e-12:
        return specfun.integrate_adaptive(
            lambda u: specfun.bessel_j0(qbar * u) * u ** (1.0 - n),
            1.0, math.inf, rel_tol)
    integrand = lambda us: np.array(
        [specfun.bessel_j0(qbar * u) * u ** (1.0 - n) for u in us])

    def panel(a: float, b: float) -> float:
        return specfun.integrate_adaptive(
            integrand, a, b, 0.05 * rel_tol, abs_tol=0.01 * abs_tol,
            vectorized=True)

    k = 1
    while specfun.bessel_j0_zero(k) / qbar <= 1.0:
        k += 1
    edges = [1.0] + [specfun.bessel_j0_zero(k + i) / qbar
                     for i in range(_LOBES + 1)]
    base = panel(edges[0], edges[1])
    lobes = [panel(edges[i], edges[i + 1]) for i in range(1, _LOBES + 1)]
    partial = base + np.cumsum(lobes)
    # iterated averaging of the alternating partial sums
    tab = partial.copy()
    prev_head = tab[0]
    delta = math.inf
    for _ in range(len(tab) - 1):
        tab = 0.5 * (tab[:-1] + tab[1:])
        head = tab[0]
        delta = abs(head - prev_head)
        if delta <= max(rel_tol * abs(head), 0.5 * abs_tol):
            return float(head)
        prev_head = head
    raise specfun.ConvergenceError(
        f"lobe-sum acceleration stalled for V_{n}({qbar}): "
        f"last delta {delta:.3e}")


def vn_amplitude(n: int, qbar: float,
                 ctrl: SeriesControl = DEFAULT_SERIES) -> float:
    """V_n(qbar) by the preferred route for the parity of n."""
    if n % 2:
        return vn_dimensionless(n, qbar, ctrl)
    return vn_quadrature(n, qbar)


def v_fourier(spec: PotentialSpec, q: float,
              ctrl: SeriesControl = DEFAULT_SERIES) -> float:
    """Transverse Fourier transform V(q) [J m^2] of the potential."""
    if q < 0:
        raise ValueError("q must be >= 0")
    r = spec.cutoff_radius
    qbar = q * r
    return 2.0 * math.pi * sum(
        c_n / r ** (n - 2) * vn_amplitude(n, qbar, ctrl)
        for n, c_n in spec.terms)


def emit_fig1(qbar_grid: np.ndarray | None = None,
              n_list: tuple[int, ...] = (3, 4, 5, 6, 7)
              ) -> list[tuple[float, int, float]]:
    """Rows (qbar, n, V_n) for the dimensionless-amplitude figure."""
    if qbar_grid is None:
        qbar_grid = np.linspace(0.0, 30.0, 601)
    qbar_grid = np.asarray(qbar_grid, dtype=float)
    if qbar_grid.size == 0:
        raise ValueError("qbar grid must be non-empty")
    rows = []
    for n in n_list:
        for qb in qbar_grid:
            rows.append((float(qb), int(n), vn_amplitude(n, float(qb))))
    return rows


def _check_amplitude_args(n: int, qbar: float) -> None:
    if n < 3 or n != int(n):
        raise ValueError(f"inverse power must be an integer >= 3, got {n}")
    if qbar < 0:
        raise ValueError("qbar must be >= 0")

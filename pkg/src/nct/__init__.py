"""Phonon excitation and thermalization of a cantilevered nanotube in a
cold Bose gas, coupled through an inverse-power surface potential."""

from .beam import (BeamSpec, ModeTable, build_mode_table, dispersion,
                   eigenmode_eval, normalization_constant, overlaps,
                   resolve_stiffness, solve_wavenumbers,
                   thermal_tip_displacement)
from .constants import CODATA, Constants, HBAR, K_B, M_RB87
from .config import ConfigError, RunConfig, load_config, parse_config
from .dynamics import (CoolingTrajectory, EvolveControl, effective_beta,
                       evolve, suggested_horizon, thermal_occupations)
from .gas import (GasSpec, GasState, correlation_brute_force, lambda_db,
                  occupation, solve_fugacity, t_bec, thermal_correlation)
from .potential import (PotentialSpec, emit_fig1, v_fourier, v_real,
                        vn_amplitude, vn_dimensionless, vn_quadrature)
from .rates import (RateInputs, RateResult, build_rate_inputs,
                    fj_convolution, occupation_vs_time, peak_location,
                    peaked_weight, rate_c5, rate_fgr,
                    rate_quadrature_oracle, rate_series, rate_simplified,
                    thermalization_rate, vacuum_rate_multimode)
from .specfun import (SeriesControl, bessel_j0, bessel_j0_zero,
                      find_root_bracketed, hyp1f2, integrate_adaptive,
                      ln_gamma, polylog_3_2)

__version__ = "0.1.0"

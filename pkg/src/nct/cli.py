"""Command-line interface: `nct SUBCOMMAND [--config FILE] [options]`.

Subcommands reproduce the reference tables and figures as CSV (or JSON
mirrors of the same records) and run the built-in oracle suite:

    modes      per-mode wave numbers, frequencies and overlap constants
    potential  dimensionless Fourier amplitudes V_n(qbar) for n = 3..7
    thermo     gas thermodynamics at the configured density/temperature
    rates      one excitation-rate evaluation by a chosen method
    sweep      excitation rate over the density x temperature grid
    cool       relaxation trajectory of the tube occupations
    tables     computed vs reference values with deviations
    selfcheck  closed form vs quadrature oracles; exit 3 on any failure

Exit codes: 0 success, 1 usage/config error, 2 numerical failure,
3 selfcheck failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import beam, dynamics, gas, potential, rates, specfun
from .config import ConfigError, RunConfig, load_config
from .constants import CODATA

Record = dict[str, object]


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse default exits with code 2
        raise _UsageError(message)


def _fmt(value: object) -> str:
    if isinstance(value, bool):
        return str(value)
    if isinstance(value, float):
        return f"{value:.11e}"
    text = str(value)
    if "," in text or "\n" in text:
        raise ValueError(f"CSV field may not contain separators: {text!r}")
    return text


def write_records(records: list[Record], path: str, fmt: str) -> None:
    """Serialize records deterministically; CSV is the primary format and
    JSON mirrors the same rows."""
    if not records:
        raise ValueError("nothing to write")
    keys = list(records[0].keys())
    if fmt == "csv":
        lines = [",".join(keys)]
        lines += [",".join(_fmt(rec[k]) for k in keys) for rec in records]
        text = "\n".join(lines) + "\n"
    elif fmt == "json":
        text = json.dumps(records, indent=2) + "\n"
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


# ---------------------------------------------------------------------------
# shared builders
# ---------------------------------------------------------------------------

def _build_modes(cfg: RunConfig, l_max: int | None = None) -> beam.ModeTable:
    return beam.build_mode_table(cfg.beam_spec(),
                                 l_max if l_max is not None else cfg.l_max)


def _build_gas(cfg: RunConfig) -> gas.GasState:
    tc = gas.t_bec(cfg.density_per_m3, cfg.mass_kg)
    return gas.solve_fugacity(cfg.gas_spec(tc), ctrl=cfg.series_control())


def _build_inputs(cfg: RunConfig, state: gas.GasState | None = None,
                  l_max: int | None = None) -> rates.RateInputs:
    modes = _build_modes(cfg, l_max)
    if state is None:
        state = _build_gas(cfg)
    return rates.build_rate_inputs(modes, cfg.potential_spec(), state)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_modes(cfg: RunConfig, args: argparse.Namespace) -> list[Record]:
    table = _build_modes(cfg, cfg.tip_l_cut if args.full else cfg.l_max)
    rows: list[Record] = []
    for l in range(table.l_max + 1):
        rows.append({
            "l": l,
            "kappa_L": float(table.kappa[l] * cfg.length_m),
            "omega_over_2pi_hz": float(table.omega[l] / (2.0 * math.pi)),
            "a_m": float(table.a[l]),
            "atilde_over_a": float(table.atilde[l] / table.a[l]),
            "I_m": float(table.i_overlap[l]),
        })
    return rows


def cmd_potential(cfg: RunConfig, args: argparse.Namespace) -> list[Record]:
    grid = np.linspace(0.0, 30.0, 601)
    rows = potential.emit_fig1(grid)
    return [{"qbar": qb, "n": n, "Vn": vn} for qb, n, vn in rows]


def cmd_thermo(cfg: RunConfig, args: argparse.Namespace) -> list[Record]:
    state = _build_gas(cfg)
    return [{
        "n_per_m3": state.spec.density,
        "T_a_K": state.spec.temperature,
        "T_BEC_K": state.t_bec,
        "lambda_dB_m": state.lambda_db,
        "eta": state.eta,
        "mu_J": state.mu,
        "condensate_fraction": state.condensate_fraction,
    }]


_RATE_METHODS = {
    "series": lambda inp: rates.rate_series(inp),
    "fgr": rates.rate_fgr,
    "simplified": rates.rate_simplified,
    "c5": rates.rate_c5,
    "oracle": lambda inp: rates.rate_quadrature_oracle(inp),
}


def cmd_rates(cfg: RunConfig, args: argparse.Namespace) -> list[Record]:
    state = _build_gas(cfg)
    inputs = _build_inputs(cfg, state)
    result = _RATE_METHODS[args.method](inputs)
    return [{
        "n_per_m3": state.spec.density,
        "T_a_K": state.spec.temperature,
        "T_over_Tbec": state.spec.temperature / state.t_bec,
        "method": result.method,
        "gamma_per_s": result.value,
        "j_terms": result.j_terms_used,
    }]


def _sweep_point(task: tuple[RunConfig, float, float]) -> Record:
    cfg, density, t_over_tbec = task
    tc = gas.t_bec(density, cfg.mass_kg)
    state = gas.solve_fugacity(
        gas.GasSpec(density=density, temperature=t_over_tbec * tc,
                    mass=cfg.mass_kg), ctrl=cfg.series_control())
    inputs = _build_inputs(cfg, state)
    result = rates.rate_series(inputs)
    return {
        "n_cm3": density / 1e6,
        "T_over_Tbec": t_over_tbec,
        "rate_per_s": result.value,
        "omega0_per_s": float(inputs.modes.omega[0]),
    }


def cmd_sweep(cfg: RunConfig, args: argparse.Namespace) -> list[Record]:
    t_grid = np.geomspace(cfg.t_over_tbec_min, cfg.t_over_tbec_max,
                          cfg.t_points)
    tasks = [(cfg, density, float(f))
             for density in cfg.sweep_densities_per_m3 for f in t_grid]
    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            return list(pool.map(_sweep_point, tasks))
    return [_sweep_point(t) for t in tasks]


def cmd_cool(cfg: RunConfig, args: argparse.Namespace) -> list[Record]:
    inputs = _build_inputs(cfg)
    t_end = cfg.t_end_s
    if t_end == 0.0:
        t_end = dynamics.suggested_horizon(inputs, cfg.tube_temperature_k)
    ctrl = dynamics.EvolveControl(n_samples=cfg.cool_samples,
                                  beta_mode=cfg.beta_mode)
    traj = dynamics.evolve(inputs, cfg.tube_temperature_k, t_end, ctrl)
    rows: list[Record] = []
    for i, t in enumerate(traj.times):
        row: Record = {"t_s": float(t), "Tc_eff_K": float(traj.t_c_eff[i])}
        for l in range(traj.occupations.shape[1]):
            row[f"p{l}"] = float(traj.occupations[i, l])
        rows.append(row)
    return rows


_REFERENCE_TBEC_NK = {1e12: 18.0, 5e12: 54.0, 1e13: 85.0,
                      5e13: 250.0, 1e14: 400.0}
_REFERENCE_LAMBDA_NM = {1e12: 610.0, 5e12: 357.0, 1e13: 283.0,
                        5e13: 165.0, 1e14: 131.0}
_REFERENCE_TIP_NM = {4.0: 270.0, 0.24: 66.0, 0.0: 0.46}
_REFERENCE_A0_M = 0.2e-9
_G32_REFERENCE = 2.61238


def cmd_tables(cfg: RunConfig, args: argparse.Namespace) -> list[Record]:
    rows: list[Record] = []

    def add(table: str, quantity: str, reference: float, computed: float,
            status: str | None = None) -> None:
        dev = abs(computed - reference) / abs(reference)
        rows.append({"table": table, "quantity": quantity,
                     "reference": reference, "computed": computed,
                     "rel_dev": dev, "status": status or "OK"})

    modes = _build_modes(cfg, cfg.tip_l_cut)
    add("tube_mechanics", "a0_m", _REFERENCE_A0_M, float(modes.a[0]))
    for t_c, ref_nm in _REFERENCE_TIP_NM.items():
        u = beam.thermal_tip_displacement(modes, t_c, cfg.tip_l_cut)
        add("tip_displacement", f"u({t_c}K)_m", ref_nm * 1e-9, u)
    for n_cm3, ref_nk in _REFERENCE_TBEC_NK.items():
        tc = gas.t_bec(n_cm3 * 1e6, cfg.mass_kg)
        add("gas_critical_temperature", f"T_BEC({n_cm3:g}cm-3)_K",
            ref_nk * 1e-9, tc)
    for n_cm3, ref_nm in _REFERENCE_LAMBDA_NM.items():
        tc = gas.t_bec(n_cm3 * 1e6, cfg.mass_kg)
        lam = gas.lambda_db(tc, cfg.mass_kg)
        add("gas_de_broglie", f"lambda_at_Tbec({n_cm3:g}cm-3)_m",
            ref_nm * 1e-9, lam, status="NON-REPRODUCED")
        add("gas_de_broglie", f"n*lambda^3_at_Tbec({n_cm3:g}cm-3)",
            _G32_REFERENCE, n_cm3 * 1e6 * lam ** 3)
    return rows


def _selfcheck_records(cfg: RunConfig) -> list[Record]:
    checks: list[Record] = []

    def add(name: str, deviation: float, tolerance: float) -> None:
        checks.append({"check": name, "max_deviation": deviation,
                       "tolerance": tolerance,
                       "status": "ok" if deviation <= tolerance else "FAIL"})

    # closed-form potential amplitudes against the Hankel-integral oracle
    dev = 0.0
    for n in (3, 5, 7):
        for qb in (0.1, 0.5, 1.0, 2.0, 5.0, 10.0):
            a = potential.vn_dimensionless(n, qb, cfg.series_control())
            b = potential.vn_quadrature(n, qb)
            dev = max(dev, abs(a - b) / max(abs(b), 1e-3))
    add("potential_closed_form_vs_quadrature", dev, 1e-6)

    inputs = _build_inputs(cfg)
    series = rates.rate_series(inputs)
    oracle = rates.rate_quadrature_oracle(inputs)
    add("rate_series_vs_quadrature_oracle",
        abs(math.exp(series.log_value - oracle.log_value) - 1.0), 2e-2)

    one_term = rates.rate_series(inputs, j_max=1)
    fgr = rates.rate_fgr(inputs)
    add("rate_series_j1_vs_golden_rule",
        abs(one_term.log_value / fgr.log_value - 1.0), 1e-12)

    add("detailed_balance_zero",
        abs(rates.thermalization_rate(inputs, 0, inputs.gas.beta_a)), 0.0)

    # brute-force correlation oracle in the dilute regime
    tc = gas.t_bec(cfg.density_per_m3, cfg.mass_kg)
    dilute = gas.solve_fugacity(gas.GasSpec(
        density=cfg.density_per_m3, temperature=20.0 * tc, mass=cfg.mass_kg))
    dev = 0.0
    brute0, analytic0, omega_q, _ = gas.correlation_brute_force(dilute, 0.0)
    tau_scale = math.sqrt(CODATA.hbar * dilute.beta_a / omega_q)
    for tau in np.linspace(0.0, tau_scale, 4):
        brute, analytic, _, _ = gas.correlation_brute_force(dilute, float(tau))
        dev = max(dev, abs(brute - analytic) / abs(analytic))
    add("correlation_analytic_vs_brute_force", dev, 5e-2)
    return checks


def cmd_selfcheck(cfg: RunConfig, args: argparse.Namespace) -> list[Record]:
    return _selfcheck_records(cfg)


_SUBCOMMANDS = {
    "modes": cmd_modes,
    "potential": cmd_potential,
    "thermo": cmd_thermo,
    "rates": cmd_rates,
    "sweep": cmd_sweep,
    "cool": cmd_cool,
    "tables": cmd_tables,
    "selfcheck": cmd_selfcheck,
}


def _build_parser() -> _Parser:
    parser = _Parser(prog="nct", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", default=None, help="config file path")
        p.add_argument("--output", default=None,
                       help="output file ('-' for stdout)")
        p.add_argument("--format", default=None, choices=("csv", "json"))
        p.add_argument("--jobs", type=int, default=1,
                       help="worker threads for sweeps")
        if name == "modes":
            p.add_argument("--full", action="store_true",
                           help="emit all modes up to the tip cut")
        if name == "rates":
            p.add_argument("--method", default="series",
                           choices=sorted(_RATE_METHODS))
            p.add_argument("--density-per-cm3", type=float, default=None)
            p.add_argument("--temperature-k", type=float, default=None)
            p.add_argument("--t-over-tbec", type=float, default=None)
    return parser


def _apply_rate_flags(cfg: RunConfig, args: argparse.Namespace) -> RunConfig:
    from dataclasses import replace

    updates: dict[str, object] = {}
    if getattr(args, "density_per_cm3", None) is not None:
        updates["density_per_m3"] = args.density_per_cm3 * 1e6
    if getattr(args, "temperature_k", None) is not None:
        if getattr(args, "t_over_tbec", None) is not None:
            raise _UsageError("give at most one of --temperature-k and "
                              "--t-over-tbec")
        updates.update(temperature_k=args.temperature_k,
                       temperature_over_tbec=None)
    elif getattr(args, "t_over_tbec", None) is not None:
        updates.update(temperature_k=None,
                       temperature_over_tbec=args.t_over_tbec)
    return replace(cfg, **updates) if updates else cfg


def main(argv: list[str] | None = None) -> int:
    try:
        args = _build_parser().parse_args(argv)
    except _UsageError as exc:
        print(f"nct: error: {exc}", file=sys.stderr)
        return 1
    try:
        cfg = load_config(args.config)
        cfg = _apply_rate_flags(cfg, args)
    except (_UsageError, ConfigError) as exc:
        print(f"nct: config error: {exc}", file=sys.stderr)
        return 1
    out_path = args.output if args.output is not None else cfg.output_path
    out_format = args.format if args.format is not None else cfg.output_format
    try:
        records = _SUBCOMMANDS[args.command](cfg, args)
        write_records(records, out_path, out_format)
    except (specfun.ConvergenceError, specfun.QuadratureError,
            specfun.BracketError, ValueError, RuntimeError) as exc:
        print(f"nct: numerical failure: {exc}", file=sys.stderr)
        return 2
    if args.command == "selfcheck":
        if any(rec["status"] != "ok" for rec in records):
            return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())

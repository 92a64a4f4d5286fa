"""Plain-text run configuration: `[section]` headers, `key = value` lines.

Every dimensional key carries an explicit unit suffix (length_m,
density_per_cm3, ...) and is converted to SI on load.  Unknown sections or
keys are hard errors with line numbers; all known keys have defaults that
mirror the reference single-walled tube, the C5 surface-potential
coefficient and the rubidium cloud, so every subcommand runs with no
config file at all.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace

from .beam import BeamSpec
from .constants import M_RB87
from .gas import GasSpec
from .potential import PotentialSpec
from .specfun import SeriesControl


class ConfigError(ValueError):
    """Malformed configuration input."""


DEFAULT_OMEGA0 = 2.0 * math.pi * 398e3  # rad/s, reference tube ground mode

_FIG2_DENSITIES_CM3 = (1e12, 5e12, 1e13, 5e13, 1e14)


@dataclass(frozen=True)
class RunConfig:
    # [beam]
    radius_m: float = 1e-9
    length_m: float = 1e-6
    linear_density_kg_per_m: float = 1e-15
    omega0_rad_per_s: float | None = DEFAULT_OMEGA0
    ei_n_m2: float | None = None
    l_max: int = 5
    tip_l_cut: int = 20
    # [potential]
    cutoff_radius_m: float = 1e-9
    coefficients: tuple[tuple[int, float], ...] = ((5, 6e-65),)
    # [gas]
    density_per_m3: float = 1e19
    temperature_k: float | None = None
    temperature_over_tbec: float | None = 1.5
    mass_kg: float = M_RB87
    # [sweep]
    sweep_densities_per_m3: tuple[float, ...] = tuple(
        n * 1e6 for n in _FIG2_DENSITIES_CM3)
    t_over_tbec_min: float = 1.05
    t_over_tbec_max: float = 5.0
    t_points: int = 20
    # [cool]
    tube_temperature_k: float = 4.0
    t_end_s: float = 0.0           # 0 -> automatic horizon
    cool_samples: int = 200
    beta_mode: str = "ground"
    # [output]
    output_path: str = "-"
    output_format: str = "csv"
    # [tolerances]
    series_rel_tol: float = 1e-15
    series_max_terms: int = 10_000
    quad_rel_tol: float = 1e-10

    def beam_spec(self) -> BeamSpec:
        return BeamSpec(radius=self.radius_m, length=self.length_m,
                        lin_density=self.linear_density_kg_per_m,
                        ei=self.ei_n_m2, omega0=self.omega0_rad_per_s)

    def potential_spec(self) -> PotentialSpec:
        return PotentialSpec(cutoff_radius=self.cutoff_radius_m,
                             terms=self.coefficients)

    def gas_spec(self, t_bec_value: float) -> GasSpec:
        if self.temperature_k is not None:
            t_a = self.temperature_k
        else:
            t_a = self.temperature_over_tbec * t_bec_value
        return GasSpec(density=self.density_per_m3, temperature=t_a,
                       mass=self.mass_kg)

    def series_control(self) -> SeriesControl:
        return SeriesControl(rel_tol=self.series_rel_tol,
                             max_terms=self.series_max_terms)


_C_KEY = re.compile(r"^c(\d+)_j_m(\d+)$")

_SCALAR_KEYS: dict[tuple[str, str], tuple[str, float]] = {
    # (section, key) -> (RunConfig field, SI conversion factor)
    ("beam", "radius_m"): ("radius_m", 1.0),
    ("beam", "length_m"): ("length_m", 1.0),
    ("beam", "linear_density_kg_per_m"): ("linear_density_kg_per_m", 1.0),
    ("beam", "omega0_rad_per_s"): ("omega0_rad_per_s", 1.0),
    ("beam", "ei_n_m2"): ("ei_n_m2", 1.0),
    ("potential", "cutoff_radius_m"): ("cutoff_radius_m", 1.0),
    ("gas", "density_per_cm3"): ("density_per_m3", 1e6),
    ("gas", "density_per_m3"): ("density_per_m3", 1.0),
    ("gas", "temperature_k"): ("temperature_k", 1.0),
    ("gas", "temperature_over_tbec"): ("temperature_over_tbec", 1.0),
    ("gas", "mass_kg"): ("mass_kg", 1.0),
    ("sweep", "t_over_tbec_min"): ("t_over_tbec_min", 1.0),
    ("sweep", "t_over_tbec_max"): ("t_over_tbec_max", 1.0),
    ("cool", "tube_temperature_k"): ("tube_temperature_k", 1.0),
    ("cool", "t_end_s"): ("t_end_s", 1.0),
    ("tolerances", "series_rel_tol"): ("series_rel_tol", 1.0),
    ("tolerances", "quad_rel_tol"): ("quad_rel_tol", 1.0),
}

_INT_KEYS: dict[tuple[str, str], str] = {
    ("beam", "l_max"): "l_max",
    ("beam", "tip_l_cut"): "tip_l_cut",
    ("sweep", "t_points"): "t_points",
    ("cool", "samples"): "cool_samples",
    ("tolerances", "series_max_terms"): "series_max_terms",
}

_STR_KEYS: dict[tuple[str, str], tuple[str, tuple[str, ...] | None]] = {
    ("cool", "beta_mode"): ("beta_mode", ("ground", "energy")),
    ("output", "path"): ("output_path", None),
    ("output", "format"): ("output_format", ("csv", "json")),
}

_SECTIONS = ("beam", "potential", "gas", "sweep", "cool", "output",
             "tolerances")

# pairs of keys where the user may give at most one
_EXCLUSIVE = (
    (("beam", "omega0_rad_per_s"), ("beam", "ei_n_m2")),
    (("gas", "density_per_cm3"), ("gas", "density_per_m3")),
    (("gas", "temperature_k"), ("gas", "temperature_over_tbec")),
)


def parse_config(text: str) -> RunConfig:
    """Parse config text into a RunConfig; raises ConfigError with the
    offending line number on any problem."""
    updates: dict[str, object] = {}
    seen: set[tuple[str, str]] = set()
    c_terms: dict[int, float] = {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"line {lineno}: unterminated section header")
            section = line[1:-1].strip().lower()
            if section not in _SECTIONS:
                raise ConfigError(f"line {lineno}: unknown section [{section}]")
            continue
        if section is None:
            raise ConfigError(f"line {lineno}: key outside any [section]")
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, _, value = line.partition("=")
        key = key.strip().lower()
        value = value.strip()
        where = (section, key)
        if where in seen:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        seen.add(where)
        try:
            _apply_key(where, value, updates, c_terms)
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: {exc}") from exc
        except KeyError:
            raise ConfigError(
                f"line {lineno}: unknown key {key!r} in section [{section}]")
    for a, b in _EXCLUSIVE:
        if a in seen and b in seen:
            raise ConfigError(f"give at most one of {a[1]!r} and {b[1]!r}")
    if ("beam", "ei_n_m2") in seen and ("beam", "omega0_rad_per_s") not in seen:
        updates["omega0_rad_per_s"] = None
    if ("gas", "temperature_k") in seen and \
            ("gas", "temperature_over_tbec") not in seen:
        updates["temperature_over_tbec"] = None
    if c_terms:
        updates["coefficients"] = tuple(sorted(c_terms.items()))
    cfg = replace(RunConfig(), **updates)
    _validate(cfg)
    return cfg


def _apply_key(where: tuple[str, str], value: str,
               updates: dict[str, object], c_terms: dict[int, float]) -> None:
    section, key = where
    if section == "potential":
        m = _C_KEY.match(key)
        if m:
            if m.group(1) != m.group(2):
                raise ConfigError(
                    f"coefficient key {key!r}: unit suffix must match the "
                    f"power (c{m.group(1)}_j_m{m.group(1)})")
            c_terms[int(m.group(1))] = float(value)
            return
    if section == "sweep" and key == "densities_per_cm3":
        items = [float(v) for v in value.split(",") if v.strip()]
        if not items:
            raise ValueError("empty density list")
        updates["sweep_densities_per_m3"] = tuple(v * 1e6 for v in items)
        return
    if where in _SCALAR_KEYS:
        name, factor = _SCALAR_KEYS[where]
        updates[name] = float(value) * factor
        return
    if where in _INT_KEYS:
        updates[_INT_KEYS[where]] = int(value)
        return
    if where in _STR_KEYS:
        name, allowed = _STR_KEYS[where]
        val = value.strip()
        if allowed is not None and val not in allowed:
            raise ValueError(f"{key} must be one of {allowed}, got {val!r}")
        updates[name] = val
        return
    raise KeyError(key)


def _validate(cfg: RunConfig) -> None:
    if (cfg.omega0_rad_per_s is None) == (cfg.ei_n_m2 is None):
        raise ConfigError("beam stiffness needs exactly one of "
                          "omega0_rad_per_s / ei_n_m2")
    if (cfg.temperature_k is None) == (cfg.temperature_over_tbec is None):
        raise ConfigError("gas temperature needs exactly one of "
                          "temperature_k / temperature_over_tbec")
    if cfg.l_max < 0 or cfg.tip_l_cut < 0:
        raise ConfigError("mode counts must be non-negative")
    if cfg.t_points < 2:
        raise ConfigError("sweep needs at least 2 temperature points")
    if cfg.cool_samples < 2:
        raise ConfigError("cool needs at least 2 samples")


def load_config(path: str | None) -> RunConfig:
    if path is None:
        return RunConfig()
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_config(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc

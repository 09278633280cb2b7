"""Flat key = value config files -> validated ScenarioConfig.

All inputs are SI unless the key carries a unit suffix converted on ingest:
  _khz  ordinary frequency in kHz        -> rad/s      (x 2 pi 1e3)
  _phz  angular frequency in 1e15 rad/s  -> rad/s      (x 1e15)
  _um   micrometers                      -> m          (x 1e-6)
  _fg   femtograms                       -> kg         (x 1e-18)
  _e    elementary charges               -> C          (x 1.602...e-19)

Unknown keys are hard errors. `#` starts a comment; blank lines ignored.
"""

from __future__ import annotations

import hashlib
import math

from .errors import ConfigurationError, ParseError, ValidationError
from .params import (CODATA, CavityParams, CoulombPairParams,
                     GravityPairParams, OscillatorParams, SqueezedCoherent,
                     SqueezedThermal, Vacuum, nbar_to_beta_hw,
                     silica_polarizability)
from .scenarios import MonteCarloSpec, ScenarioConfig, SweepSpec

__all__ = ["parse_config", "parse_config_text", "config_hash"]

SUFFIX_FACTORS = {
    "_khz": 2.0 * math.pi * 1e3,
    "_phz": 1e15,
    "_um": 1e-6,
    "_fg": 1e-18,
    "_e": CODATA.e_charge,
}

# canonical keys and their value type
_FLOAT, _INT, _BOOL, _STR, _LIST = "float", "int", "bool", "str", "floatlist"

SCHEMA = {
    "scenario.kind": _STR,
    "scenario.nbar_b": _FLOAT,
    "scenario.probe_damping_rate": _FLOAT,
    "state.variant": _STR,
    "state.r": _FLOAT,
    "state.phi": _FLOAT,
    "state.alpha_mag": _FLOAT,
    "state.theta": _FLOAT,
    "state.beta_hw": _FLOAT,
    "state.nbar": _FLOAT,
    "oscillator.mass": _FLOAT,
    "oscillator.frequency": _FLOAT,
    "oscillator.damping_rate": _FLOAT,
    "oscillator.bath_temperature": _FLOAT,
    "cavity.length": _FLOAT,
    "cavity.central_frequency": _FLOAT,
    "cavity.linewidth": _FLOAT,
    "cavity.tweezer_field": _FLOAT,
    "cavity.polarizability": _FLOAT,
    "cavity.particle_volume": _FLOAT,
    "cavity.relative_permittivity": _FLOAT,
    "coulomb.charge_a": _FLOAT,
    "coulomb.charge_b": _FLOAT,
    "coulomb.separation": _FLOAT,
    "coulomb.mass_a": _FLOAT,
    "coulomb.mass_b": _FLOAT,
    "coulomb.freq_a": _FLOAT,
    "coulomb.freq_b": _FLOAT,
    "gravity.mass": _FLOAT,
    "gravity.separation": _FLOAT,
    "gravity.freq_a": _FLOAT,
    "gravity.freq_b": _FLOAT,
    "gravity.squeezing_r": _FLOAT,
    "grid.n_steps": _INT,
    "grid.horizon_periods": _FLOAT,
    "monte_carlo.enabled": _BOOL,
    "monte_carlo.n_paths": _INT,
    "monte_carlo.seed": _INT,
    "sweep.axis1_name": _STR,
    "sweep.axis1_values": _LIST,
    "sweep.axis2_name": _STR,
    "sweep.axis2_values": _LIST,
}

#: suffixed keys convert onto these canonical float keys
_SUFFIXABLE = {
    "oscillator.mass", "oscillator.frequency",
    "cavity.central_frequency", "cavity.linewidth",
    "coulomb.charge_a", "coulomb.charge_b", "coulomb.separation",
    "coulomb.mass_a", "coulomb.mass_b", "coulomb.freq_a", "coulomb.freq_b",
    "gravity.mass", "gravity.separation", "gravity.freq_a", "gravity.freq_b",
}

KINDS_ALIASES = {
    "cavity_particle": "cavity_particle",
    "light_probe": "light_probe",
    "particle_particle": "particle_particle",
    "gravity_analogy": "gravity_analogy",
}


def _convert_key(raw_key: str, line_no: int):
    """Resolve unit suffixes; returns (canonical_key, factor)."""
    for suffix, factor in SUFFIX_FACTORS.items():
        if raw_key.endswith(suffix):
            base = raw_key[: -len(suffix)]
            if base in _SUFFIXABLE:
                return base, factor
    if raw_key in SCHEMA:
        return raw_key, 1.0
    raise ParseError(f"unknown key {raw_key!r}", line=line_no)


def _parse_value(kind: str, raw: str, key: str, line_no: int):
    try:
        if kind == _FLOAT:
            return float(raw)
        if kind == _INT:
            return int(raw)
        if kind == _BOOL:
            lowered = raw.lower()
            if lowered in ("true", "yes", "1", "on"):
                return True
            if lowered in ("false", "no", "0", "off"):
                return False
            raise ValueError(raw)
        if kind == _LIST:
            return tuple(float(x) for x in raw.split(",") if x.strip())
        return raw
    except ValueError:
        raise ParseError(f"cannot parse value {raw!r} for {key}", line=line_no) from None


def parse_config_text(text: str) -> dict:
    """Parse config text into a canonical {key: value} dict with units applied."""
    values: dict = {}
    for line_no, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError("expected 'key = value'", line=line_no,
                             column=len(raw_line) - len(raw_line.lstrip()) + 1)
        raw_key, raw_value = (part.strip() for part in line.split("=", 1))
        key, factor = _convert_key(raw_key, line_no)
        if key in values:
            raise ParseError(f"duplicate key {raw_key!r}", line=line_no)
        value = _parse_value(SCHEMA[key], raw_value, raw_key, line_no)
        if factor != 1.0:
            value = value * factor
        values[key] = value
    return values


def _build_state(values: dict):
    variant = values.get("state.variant", "vacuum")
    r = values.get("state.r", 0.0)
    phi = values.get("state.phi", 0.0)
    if variant == "vacuum":
        return Vacuum()
    if variant == "squeezed_coherent":
        return SqueezedCoherent(r=r, phi=phi,
                                alpha_mag=values.get("state.alpha_mag", 0.0),
                                theta=values.get("state.theta", 0.0))
    if variant == "squeezed_thermal":
        if "state.nbar" in values and "state.beta_hw" in values:
            raise ValidationError("give state.nbar or state.beta_hw, not both")
        if "state.nbar" in values:
            beta_hw = nbar_to_beta_hw(values["state.nbar"])
        else:
            beta_hw = values.get("state.beta_hw", math.inf)
        return SqueezedThermal(r=r, phi=phi, beta_hw=beta_hw)
    raise ValidationError(f"unknown state.variant {variant!r}")


def _require(values: dict, keys, kind: str):
    missing = [k for k in keys if k not in values]
    if missing:
        raise ValidationError(f"{kind} scenario requires keys: {', '.join(missing)}")


def build_scenario(values: dict) -> ScenarioConfig:
    """Assemble and validate a ScenarioConfig from canonical values."""
    if "scenario.kind" not in values:
        raise ValidationError("config must set scenario.kind")
    kind = values["scenario.kind"]
    if kind not in KINDS_ALIASES:
        raise ValidationError(f"unknown scenario.kind {kind!r}")
    state = _build_state(values)

    oscillator = cavity = coulomb = gravity = None
    try:
        if kind in ("cavity_particle", "light_probe"):
            _require(values, ["oscillator.mass", "oscillator.frequency",
                              "cavity.length", "cavity.central_frequency",
                              "cavity.linewidth", "cavity.tweezer_field"], kind)
            oscillator = OscillatorParams(
                mass=values["oscillator.mass"],
                bare_frequency=values["oscillator.frequency"],
                damping_rate=values.get("oscillator.damping_rate", 0.0),
                bath_temperature=values.get("oscillator.bath_temperature", 0.0))
            if "cavity.polarizability" in values:
                alpha_pol = values["cavity.polarizability"]
            elif "cavity.particle_volume" in values:
                alpha_pol = silica_polarizability(
                    CODATA, values["cavity.particle_volume"],
                    values.get("cavity.relative_permittivity", 2.07))
            else:
                raise ValidationError(
                    "cavity needs cavity.polarizability or cavity.particle_volume")
            cavity = CavityParams(
                length=values["cavity.length"],
                central_frequency=values["cavity.central_frequency"],
                linewidth=values["cavity.linewidth"],
                tweezer_field=values["cavity.tweezer_field"],
                polarizability=alpha_pol)
            from .params import derive_cavity
            derive_cavity(CODATA, oscillator, cavity)  # surface nu/range violations now
        elif kind == "particle_particle":
            _require(values, ["coulomb.charge_a", "coulomb.charge_b",
                              "coulomb.separation", "coulomb.mass_a",
                              "coulomb.mass_b", "coulomb.freq_a",
                              "coulomb.freq_b"], kind)
            coulomb = CoulombPairParams(
                charge_a=values["coulomb.charge_a"],
                charge_b=values["coulomb.charge_b"],
                separation=values["coulomb.separation"],
                mass_a=values["coulomb.mass_a"], mass_b=values["coulomb.mass_b"],
                bare_freq_a=values["coulomb.freq_a"],
                bare_freq_b=values["coulomb.freq_b"])
            from .params import derive_coulomb
            derive_coulomb(CODATA, coulomb)
        elif kind == "gravity_analogy":
            _require(values, ["gravity.mass", "gravity.separation",
                              "gravity.freq_a", "gravity.freq_b"], kind)
            gravity = GravityPairParams(
                mass=values["gravity.mass"],
                separation=values["gravity.separation"],
                bare_freq_a=values["gravity.freq_a"],
                bare_freq_b=values["gravity.freq_b"],
                squeezing_r=values.get("gravity.squeezing_r",
                                       getattr(state, "r", 0.0)))
    except ConfigurationError as exc:
        if isinstance(exc, (ValidationError, ParseError)):
            raise
        raise ValidationError(str(exc)) from exc

    sweep = None
    if "sweep.axis1_name" in values:
        sweep = SweepSpec(
            axis1_name=values["sweep.axis1_name"],
            axis1_values=tuple(values.get("sweep.axis1_values", ())),
            axis2_name=values.get("sweep.axis2_name", ""),
            axis2_values=tuple(values.get("sweep.axis2_values", ())))

    return ScenarioConfig(
        kind=kind, state=state, constants=CODATA,
        oscillator=oscillator, cavity=cavity, coulomb=coulomb, gravity=gravity,
        nbar_b=values.get("scenario.nbar_b", 0.0),
        probe_damping_rate=values.get("scenario.probe_damping_rate", 0.0),
        n_steps=values.get("grid.n_steps", 0),
        horizon_periods=values.get("grid.horizon_periods", 0.0),
        monte_carlo=MonteCarloSpec(
            enabled=values.get("monte_carlo.enabled", False),
            n_paths=values.get("monte_carlo.n_paths", 10000),
            seed=values.get("monte_carlo.seed", 20230917)),
        sweep=sweep)


def parse_config(path) -> ScenarioConfig:
    """Read, parse, and fully validate a config file."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    return build_scenario(parse_config_text(text))


def config_hash(path) -> str:
    """Stable hash of the canonicalized config content."""
    with open(path, "r", encoding="utf-8") as fh:
        values = parse_config_text(fh.read())
    canon = "\n".join(f"{k}={values[k]!r}" for k in sorted(values))
    return hashlib.sha256(canon.encode()).hexdigest()[:12]

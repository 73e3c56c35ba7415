"""Scenario definition, validation, and config-file handling.

A scenario is the full experiment configuration: deployment geometry,
radio link budget, blockage process parameters, and the master RNG seed.
Scenarios are immutable; parameter sweeps build modified copies with
`dataclasses.replace`.

Config files are INI text (sections of ``key = value`` lines).  Keys mirror
the dataclass field names.  One unit quirk inherited from common practice:
``lambda_st_out`` is given in blockers/km^2 in the file and stored in
blockers/m^2 on the dataclass; the indoor densities are blockers/m^2 in
both places.
"""

from __future__ import annotations

import configparser
import dataclasses
import math
from dataclasses import dataclass

from .errors import ConfigError

KM2_PER_M2 = 1e-6


@dataclass(frozen=True)
class OutdoorBlockageParams:
    lambda_st_out: float = 25.0 * KM2_PER_M2  # blockers/m^2 (file key is bl/km^2)
    mean_len: float = 10.0   # E{L}, meters
    mean_wid: float = 10.0   # E{W}, meters
    eta1: float = 0.5        # P[blocker crossing a link is tall enough]


@dataclass(frozen=True)
class IndoorBlockageParams:
    lambda_st_in: float = 0.1    # static blockers/m^2
    lambda_dy_in: float = 0.1    # dynamic blockers/m^2
    mean_len_in: float = 0.5     # meters
    mean_wid_in: float = 0.5     # meters
    eta2: float = 0.25
    blocker_height_H: float = 2.0   # dynamic blocker height, m above floor
    ue_height: float = 1.3          # UE antenna height, m above floor
    mobility_speed_V: float = 0.5   # m/s
    unblock_rate_mu: float = 1.0    # 1/s
    self_open_fraction: float = 1.0  # fraction of body orientations with clear LoS


@dataclass(frozen=True)
class Scenario:
    bs_distance_R: float = 60.0        # horizontal BS -> wall distance, m
    bs_height: float = 200.0           # m above ground
    ue_floor_height: float = 100.0     # UE floor elevation, m above ground
    ue_offset: float = 10.0            # UE horizontal distance from wall (indoor side), m
    ue_height_above_floor: float = 1.3
    wall_width: float = 20.0
    wall_height: float = 20.0
    # Vertical wall center, m above ground.  Default puts the wall bottom
    # 2 m above the UE floor so every sensor sits above blocker height.
    wall_center_height: float = 112.0
    n_sensors: int = 36                # perfect square
    tx_power_dbm: float = 30.0
    noise_power_dbm: float = -110.0
    m_antennas: int = 64
    alpha: float = 4.0                 # pathloss exponent
    carrier_freq_hz: float = 28e9
    nakagami_m: int = 3
    attenuation_B: float = 0.9         # per-sensor attenuation, in [0, 1)
    pathloss_intercept: float | None = None  # override; default free-space at 1 m
    outdoor_blockage: OutdoorBlockageParams = OutdoorBlockageParams()
    indoor_blockage: IndoorBlockageParams = IndoorBlockageParams()
    rng_seed: int = 20210612

    def ue_position_height(self) -> float:
        return self.ue_floor_height + self.ue_height_above_floor


def is_perfect_square(n: int) -> bool:
    if n < 1:
        return False
    r = math.isqrt(n)
    return r * r == n


def validate(sc: Scenario) -> list[str]:
    """Return a list of '<key path>: message' strings, empty when valid."""
    bad = []

    def positive(value, key):
        if not value > 0:
            bad.append(f"{key}: must be strictly positive, got {value}")

    positive(sc.bs_distance_R, "bs_distance_R")
    positive(sc.bs_height, "bs_height")
    positive(sc.ue_floor_height, "ue_floor_height")
    positive(sc.ue_height_above_floor, "ue_height_above_floor")
    positive(sc.wall_width, "wall_width")
    positive(sc.wall_height, "wall_height")
    positive(sc.wall_center_height, "wall_center_height")
    positive(sc.carrier_freq_hz, "carrier_freq_hz")
    positive(sc.alpha, "alpha")
    if sc.ue_offset <= 0:
        bad.append(f"ue_offset: UE must be indoors (ue_offset > 0), got {sc.ue_offset}")
    if not is_perfect_square(sc.n_sensors):
        bad.append(f"n_sensors: must be a perfect square >= 1, got {sc.n_sensors}")
    if sc.m_antennas < 1:
        bad.append(f"m_antennas: must be >= 1, got {sc.m_antennas}")
    if sc.nakagami_m < 1:
        bad.append(f"nakagami_m: must be >= 1, got {sc.nakagami_m}")
    if not 0.0 <= sc.attenuation_B < 1.0:
        bad.append(f"attenuation_B: must be in [0, 1), got {sc.attenuation_B}")
    if sc.pathloss_intercept is not None and sc.pathloss_intercept <= 0:
        bad.append(f"pathloss_intercept: must be positive, got {sc.pathloss_intercept}")
    if sc.rng_seed < 0 or sc.rng_seed > 2**64 - 1:
        bad.append(f"rng_seed: must fit in 64 unsigned bits, got {sc.rng_seed}")

    ob = sc.outdoor_blockage
    for key in ("lambda_st_out", "mean_len", "mean_wid"):
        v = getattr(ob, key)
        if v < 0:
            bad.append(f"outdoor_blockage.{key}: must be non-negative, got {v}")
    if not 0.0 <= ob.eta1 <= 1.0:
        bad.append(f"outdoor_blockage.eta1: must be in [0, 1], got {ob.eta1}")

    ib = sc.indoor_blockage
    for key in ("lambda_st_in", "lambda_dy_in", "mean_len_in", "mean_wid_in",
                "blocker_height_H", "ue_height", "mobility_speed_V", "unblock_rate_mu"):
        v = getattr(ib, key)
        if v < 0:
            bad.append(f"indoor_blockage.{key}: must be non-negative, got {v}")
    if not 0.0 <= ib.eta2 <= 1.0:
        bad.append(f"indoor_blockage.eta2: must be in [0, 1], got {ib.eta2}")
    if not 0.0 <= ib.self_open_fraction <= 1.0:
        bad.append(f"indoor_blockage.self_open_fraction: must be in [0, 1], "
                   f"got {ib.self_open_fraction}")
    if ib.lambda_dy_in > 0 and not ib.blocker_height_H > ib.ue_height:
        bad.append("indoor_blockage.blocker_height_H: must exceed ue_height when "
                   "dynamic blockage is enabled")
    # same physical quantity, stored in two sections
    if ib.ue_height != sc.ue_height_above_floor:
        bad.append("indoor_blockage.ue_height: must equal "
                   f"ue_height_above_floor ({ib.ue_height} vs "
                   f"{sc.ue_height_above_floor})")
    return bad


# Config file layout: section -> (field, parser).  lambda_st_out converts
# from the file's bl/km^2 to the in-memory bl/m^2.
_SECTIONS = {
    "geometry": {
        "bs_distance_R": float, "bs_height": float, "ue_floor_height": float,
        "ue_offset": float, "ue_height_above_floor": float, "wall_width": float,
        "wall_height": float, "wall_center_height": float, "n_sensors": int,
    },
    "radio": {
        "tx_power_dbm": float, "noise_power_dbm": float, "m_antennas": int,
        "alpha": float, "carrier_freq_hz": float, "nakagami_m": int,
        "attenuation_B": float, "pathloss_intercept": float,
    },
    "outdoor_blockage": {
        "lambda_st_out": lambda s: float(s) * KM2_PER_M2,
        "mean_len": float, "mean_wid": float, "eta1": float,
    },
    "indoor_blockage": {
        "lambda_st_in": float, "lambda_dy_in": float, "mean_len_in": float,
        "mean_wid_in": float, "eta2": float, "blocker_height_H": float,
        "ue_height": float, "mobility_speed_V": float, "unblock_rate_mu": float,
        "self_open_fraction": float,
    },
    "simulation": {
        "rng_seed": int,
    },
}


def _read_ini(text: str) -> configparser.ConfigParser:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    parser.optionxform = str  # keys are case-sensitive (attenuation_B, ...)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from exc
    return parser


def scenario_from_text(text: str) -> Scenario:
    """Parse INI text into a Scenario.  Missing keys keep their defaults."""
    parser = _read_ini(text)
    top: dict = {}
    outdoor: dict = {}
    indoor: dict = {}
    for section in parser.sections():
        if section == "baselines":
            continue  # parsed separately (cli.load_baseline_config)
        if section not in _SECTIONS:
            raise ConfigError(f"unknown section [{section}]")
        known = _SECTIONS[section]
        for key, raw in parser.items(section):
            if key not in known:
                raise ConfigError(f"unknown key '{key}' in section [{section}]")
            try:
                value = known[key](raw)
            except ValueError as exc:
                raise ConfigError(f"bad value for {section}.{key}: {raw!r}") from exc
            if section == "outdoor_blockage":
                outdoor[key] = value
            elif section == "indoor_blockage":
                indoor[key] = value
            else:
                top[key] = value
    if outdoor:
        top["outdoor_blockage"] = dataclasses.replace(OutdoorBlockageParams(), **outdoor)
    if indoor:
        top["indoor_blockage"] = dataclasses.replace(IndoorBlockageParams(), **indoor)
    return dataclasses.replace(Scenario(), **top)


def load_scenario(path) -> Scenario:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return scenario_from_text(text)


def scenario_to_text(sc: Scenario) -> str:
    """Serialize a scenario to canonical INI text (used for config hashing)."""
    lines = []
    for section, keys in _SECTIONS.items():
        lines.append(f"[{section}]")
        for key in keys:
            if section == "outdoor_blockage":
                value = getattr(sc.outdoor_blockage, key)
                if key == "lambda_st_out":
                    value = value / KM2_PER_M2
            elif section == "indoor_blockage":
                value = getattr(sc.indoor_blockage, key)
            else:
                value = getattr(sc, key)
            if value is None:
                continue
            lines.append(f"{key} = {value!r}" if isinstance(value, str)
                         else f"{key} = {value}")
        lines.append("")
    return "\n".join(lines)

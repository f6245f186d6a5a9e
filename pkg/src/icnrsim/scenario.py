"""Integration regimes, scenario parameters and user-satellite association."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, fields

import numpy as np

from .errors import ConfigValidationError, InvalidParameterError
from .geometry import EarthModel, GpsConfig, Shell, nearest_visible, visibility_central_angle_deg
from .navigation import BANDWIDTH_RULES, RangingModel


class IntegrationLevel(enum.Enum):
    TRADITIONAL = "traditional"
    FUNCTION_LEVEL = "function"
    SIGNAL_LEVEL = "signal"

    @property
    def code(self) -> int:
        return _LEVEL_CODES[self]

    @classmethod
    def parse(cls, text: str) -> "IntegrationLevel":
        key = text.strip().lower().replace("-", "_")
        for level in cls:
            if key in (level.value, level.name.lower(), level.value + "_level"):
                return level
        raise InvalidParameterError(f"unknown integration level {text!r}")


_LEVEL_CODES = {IntegrationLevel.TRADITIONAL: 1, IntegrationLevel.FUNCTION_LEVEL: 2,
                IntegrationLevel.SIGNAL_LEVEL: 3}
ALL_LEVELS = tuple(IntegrationLevel)


def _param(default, unit=None, lo=None, hi=None, lo_open=False, hi_open=False,
           choices=None, doc=""):
    meta = {"unit": unit, "lo": lo, "hi": hi, "lo_open": lo_open, "hi_open": hi_open,
            "choices": choices, "doc": doc}
    return field(default=default, metadata=meta)


@dataclass(frozen=True)
class ScenarioConfig:
    """Case-study parameters plus model defaults; the single source of truth for a run.

    Field names carry their unit. Every field is a key of the text config
    format (see :mod:`icnrsim.config`).
    """

    # constellation and spectrum per functionality
    comm_satellites: int = _param(4500, lo=0, doc="traditional communication satellites")
    nav_satellites: int = _param(250, lo=0, doc="traditional navigation satellites")
    sensing_satellites: int = _param(250, lo=1, doc="traditional remote sensing satellites")
    comm_bandwidth_mhz: float = _param(250.0, "MHz", lo=0, lo_open=True)
    nav_bandwidth_mhz: float = _param(25.0, "MHz", lo=0, lo_open=True)
    sensing_bandwidth_mhz: float = _param(25.0, "MHz", lo=0, lo_open=True)
    comm_tx_power_w: float = _param(20.0, "W", lo=0, lo_open=True)
    nav_tx_power_w: float = _param(20.0, "W", lo=0, lo_open=True, doc="stored, not used")
    sensing_tx_power_w: float = _param(80.0, "W", lo=0, lo_open=True, doc="stored, not used")
    altitude_km: float = _param(500.0, "km", lo=0, lo_open=True)
    # vehicles and traffic
    vehicle_count: int = _param(1400, lo=1)
    cap_area_km2: float = _param(7.36e5, "km2", lo=0, lo_open=True)
    max_speed_kmh: float = _param(108.0, "km/h", lo=0, lo_open=True)
    report_spacing_m: float = _param(3.0, "m", lo=0, lo_open=True)
    perception_objects: int = _param(100, lo=0)
    bytes_per_object: int = _param(80, lo=0)
    maneuver_bytes: int = _param(500, lo=0)
    rate_threshold_mbps: float = _param(0.7, "Mbps", lo=0)
    # navigation
    ranging_error_per_m: float = _param(2.28e-8, lo=0, lo_open=True,
                                        doc="ranging error per metre of range")
    nav_elevation_deg: float = _param(20.0, "deg", lo=0, hi=90, hi_open=True)
    ranging_bandwidth_rule: str = _param("linear", choices=BANDWIDTH_RULES)
    ranging_reference_bandwidth_mhz: float = _param(25.0, "MHz", lo=0, lo_open=True)
    gps_enabled: bool = _param(True)
    gps_satellites: int = _param(24, lo=1)
    gps_altitude_km: float = _param(20180.0, "km", lo=0, lo_open=True)
    gps_layout: str = _param("uniform", choices=("uniform", "walker"))
    gps_planes: int = _param(6, lo=1)
    gps_inclination_deg: float = _param(55.0, "deg", lo=0, hi=180)
    # communication
    comm_elevation_deg: float = _param(60.0, "deg", lo=0, hi=90, hi_open=True)
    path_loss_intercept_db: float = _param(110.0, "dB")
    path_loss_slope_db: float = _param(37.6, "dB", lo=0, lo_open=True)
    combined_gain_db: float = _param(55.0, "dB")
    noise_psd_dbm_hz: float = _param(-174.0)
    noise_figure_db: float = _param(7.0, "dB", lo=0)
    # remote sensing
    sar_view_angle_deg: float = _param(30.0, "deg", lo=0, hi=90, lo_open=True, hi_open=True)
    swath_width_km: float = _param(20.0, "km", lo=0, lo_open=True)
    antenna_length_m: float = _param(10.0, "m", lo=0, lo_open=True)
    sensing_data_gbit: float = _param(360.0, "Gbit", lo=0)
    delivery_efficiency_bps_hz: float = _param(1.0, lo=0, lo_open=True)
    fusion_factor: int = _param(2, lo=1, doc="satellites co-illuminating a swath when integrated")
    fusion_halves_revisit: bool = _param(False)
    # physical constants and run mechanics
    earth_radius_km: float = _param(6371.0, "km", lo=0, lo_open=True)
    earth_mu_km3_s2: float = _param(398600.4418, lo=0, lo_open=True)
    speed_of_light_m_s: float = _param(299792458.0, "m/s", lo=0, lo_open=True)
    rng_algorithm: str = _param("philox", choices=("philox", "pcg64"))
    pair_levels: bool = _param(True)

    def __post_init__(self):
        # canonical numeric types so equal configs serialise identically
        for f in fields(self):
            value = getattr(self, f.name)
            if f.type == "float" and isinstance(value, int) and not isinstance(value, bool):
                object.__setattr__(self, f.name, float(value))
            elif (f.type == "int" and isinstance(value, float) and math.isfinite(value)
                  and value == int(value)):
                object.__setattr__(self, f.name, int(value))
        self.validate()

    def validate(self):
        for f in fields(self):
            _check_field(f, getattr(self, f.name))
        hemisphere = 2.0 * math.pi * self.earth_radius_km**2
        if self.cap_area_km2 >= hemisphere:
            raise ConfigValidationError("cap_area_km2", f"must be < {hemisphere:.6g} (a hemisphere)")
        if self.gps_layout == "walker" and self.gps_satellites % self.gps_planes:
            raise ConfigValidationError("gps_satellites", "must be divisible by gps_planes for walker layout")

    @property
    def earth(self) -> EarthModel:
        return EarthModel(self.earth_radius_km, self.earth_mu_km3_s2, self.speed_of_light_m_s)

    @property
    def gps(self) -> GpsConfig:
        return GpsConfig(self.gps_satellites, self.gps_altitude_km, self.gps_layout,
                         self.gps_planes, self.gps_inclination_deg)

    @property
    def ranging_model(self) -> RangingModel:
        return RangingModel(self.ranging_error_per_m, self.ranging_bandwidth_rule,
                            self.ranging_reference_bandwidth_mhz * 1e6)

    @property
    def rate_threshold_bps(self) -> float:
        return self.rate_threshold_mbps * 1e6

    @property
    def sensing_data_bits(self) -> float:
        return self.sensing_data_gbit * 1e9


def _check_field(f, value):
    meta = f.metadata
    kind = f.type if isinstance(f.type, type) else {"int": int, "float": float,
                                                    "bool": bool, "str": str}[f.type]
    if kind is bool:
        if not isinstance(value, bool):
            raise ConfigValidationError(f.name, f"expected a boolean, got {value!r}")
        return
    if kind is str:
        if value not in meta["choices"]:
            raise ConfigValidationError(f.name, f"must be one of {', '.join(meta['choices'])}")
        return
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigValidationError(f.name, f"expected a number, got {value!r}")
    if not math.isfinite(value):
        raise ConfigValidationError(f.name, "must be finite")
    if kind is int and int(value) != value:
        raise ConfigValidationError(f.name, f"expected an integer, got {value!r}")
    lo, hi = meta["lo"], meta["hi"]
    if lo is not None and (value <= lo if meta["lo_open"] else value < lo):
        raise ConfigValidationError(f.name, f"must be {'>' if meta['lo_open'] else '>='} {lo}, got {value}")
    if hi is not None and (value >= hi if meta["hi_open"] else value > hi):
        raise ConfigValidationError(f.name, f"must be {'<' if meta['hi_open'] else '<='} {hi}, got {value}")


@dataclass(frozen=True)
class RegimeResources:
    """Satellites and bandwidth each functionality can use under one integration level."""

    level: IntegrationLevel
    comm_satellites: int
    nav_satellites: int
    sensing_satellites: int
    comm_bandwidth_hz: float
    nav_bandwidth_hz: float
    sensing_bandwidth_hz: float
    fusion_factor: int

    @property
    def shared_constellation(self) -> bool:
        return self.level is not IntegrationLevel.TRADITIONAL


def build_regime(level: IntegrationLevel, config: ScenarioConfig) -> RegimeResources:
    counts = (config.comm_satellites, config.nav_satellites, config.sensing_satellites)
    bands = tuple(b * 1e6 for b in (config.comm_bandwidth_mhz, config.nav_bandwidth_mhz,
                                    config.sensing_bandwidth_mhz))
    if level is IntegrationLevel.TRADITIONAL:
        return RegimeResources(level, *counts, *bands, fusion_factor=1)
    total = sum(counts)
    if level is IntegrationLevel.SIGNAL_LEVEL:
        # ideal multipurpose waveform: every function sees the pooled spectrum
        pooled = sum(bands)
        bands = (pooled, pooled, pooled)
    return RegimeResources(level, total, total, total, *bands, fusion_factor=config.fusion_factor)


def safety_message_rate_bps(speed_m_s: float, report_spacing_m: float, perception_objects: int,
                            bytes_per_object: int, maneuver_bytes: int) -> float:
    """Uplink rate needed to send one perception + maneuver report per ``report_spacing_m``."""
    if not speed_m_s > 0 or not report_spacing_m > 0:
        raise InvalidParameterError("speed and report spacing must be positive")
    if min(perception_objects, bytes_per_object, maneuver_bytes) < 0:
        raise InvalidParameterError("payload sizes must be non-negative")
    bits = (perception_objects * bytes_per_object + maneuver_bytes) * 8
    return bits * speed_m_s / report_spacing_m


@dataclass(frozen=True)
class AssociationMap:
    """Per-vehicle serving satellite (``-1`` if none), slant range and bandwidth share."""

    satellite: np.ndarray
    slant_range_km: np.ndarray
    share_hz: np.ndarray

    @property
    def covered(self) -> np.ndarray:
        return self.satellite >= 0

    def __len__(self):
        return self.satellite.shape[0]


class UserFootprint:
    """Mean direction and angular spread of a user set, for satellite pre-filtering.

    Any satellite visible from some user lies within the mask's central angle
    of that user, hence within that angle plus the spread of the mean
    direction.
    """

    def __init__(self, users):
        users = np.asarray(users, dtype=float).reshape(-1, 3)
        centre = users.sum(axis=0)
        norm = np.linalg.norm(centre)
        if users.shape[0] == 0 or norm == 0.0:
            self.centre = None
            self.spread_deg = 180.0
        else:
            self.centre = centre / norm
            cos_spread = np.min(users @ self.centre / np.linalg.norm(users, axis=1))
            self.spread_deg = math.degrees(math.acos(min(1.0, max(-1.0, cos_spread))))

    def candidates(self, shell: Shell, min_elevation_deg: float,
                   earth: EarthModel = EarthModel()) -> np.ndarray:
        if shell.count == 0:
            return np.empty(0, dtype=np.intp)
        reach = self.spread_deg + visibility_central_angle_deg(shell.altitude_km,
                                                               min_elevation_deg, earth)
        if self.centre is None or reach >= 180.0:
            return np.arange(shell.count)
        pts = shell.points
        cos_sat = pts @ self.centre / np.sqrt(np.einsum("ij,ij->i", pts, pts))
        # 1e-6 rad slack; the elevation mask is re-checked exactly afterwards
        return np.flatnonzero(cos_sat >= math.cos(math.radians(reach) + 1e-6))


def candidate_satellites(users: np.ndarray, shell: Shell, min_elevation_deg: float,
                         earth: EarthModel = EarthModel()) -> np.ndarray:
    """Indices of shell members that can be visible from at least one user (exact pre-filter)."""
    return UserFootprint(users).candidates(shell, min_elevation_deg, earth)


def associate(vehicles, comm_shell: Shell, mask_deg: float, earth: EarthModel = EarthModel(),
              footprint: UserFootprint | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Nearest visible satellite per vehicle as ``(index, slant_range_km)``.

    Uncovered vehicles get index -1 and range NaN. Ties in slant range go to
    the lower satellite index.
    """
    vehicles = np.asarray(vehicles, dtype=float).reshape(-1, 3)
    n = vehicles.shape[0]
    sat = np.full(n, -1, dtype=np.intp)
    dist = np.full(n, np.nan)
    if footprint is None:
        footprint = UserFootprint(vehicles)
    cand = footprint.candidates(comm_shell, mask_deg, earth)
    if cand.size:
        best, best_d = nearest_visible(vehicles, comm_shell.points[cand], mask_deg)
        ok = best >= 0
        sat[ok] = cand[best[ok]]
        dist[ok] = best_d[ok]
    return sat, dist


def allocate(satellite: np.ndarray, slant_range_km: np.ndarray, bandwidth_hz: float,
             satellite_count: int) -> AssociationMap:
    """Each serving satellite splits ``bandwidth_hz`` equally among its vehicles."""
    share = np.zeros(satellite.shape[0])
    ok = satellite >= 0
    if np.any(ok):
        load = np.bincount(satellite[ok], minlength=satellite_count)
        share[ok] = bandwidth_hz / load[satellite[ok]]
    return AssociationMap(satellite, slant_range_km, share)


def associate_and_allocate(vehicles, comm_shell: Shell, mask_deg: float,
                           regime: RegimeResources, earth: EarthModel = EarthModel(),
                           footprint: UserFootprint | None = None) -> AssociationMap:
    """Nearest visible satellite per vehicle; each satellite splits its bandwidth equally."""
    sat, dist = associate(vehicles, comm_shell, mask_deg, earth, footprint)
    return allocate(sat, dist, regime.comm_bandwidth_hz, comm_shell.count)

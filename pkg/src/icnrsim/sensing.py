"""SAR resolution, constellation revisit time and age of information.

Everything here is deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DegenerateGeometryError, InvalidParameterError
from .geometry import EarthModel

SPEED_OF_LIGHT = 299792458.0


@dataclass(frozen=True)
class SarConfig:
    bandwidth_hz: float = 25e6
    view_angle_deg: float = 30.0
    swath_width_km: float = 20.0
    antenna_length_m: float = 10.0
    fusion_factor: int = 1

    def __post_init__(self):
        if not 0.0 < self.view_angle_deg < 90.0:
            raise InvalidParameterError("view_angle_deg must lie in (0, 90)")
        if self.fusion_factor < 1:
            raise InvalidParameterError("fusion_factor must be >= 1")
        for name in ("bandwidth_hz", "swath_width_km", "antenna_length_m"):
            if not getattr(self, name) > 0:
                raise InvalidParameterError(f"{name} must be positive")


@dataclass(frozen=True)
class SensingMetrics:
    range_resolution_m: float
    azimuth_resolution_m: float
    revisit_time_s: float
    download_time_s: float

    @property
    def aoi_s(self) -> float:
        return aoi_s(self.revisit_time_s, self.download_time_s)


def range_resolution_m(bandwidth_hz: float, view_angle_deg: float, fusion_factor: int = 1,
                       speed_of_light_m_s: float = SPEED_OF_LIGHT) -> float:
    """Ground-range resolution ``c / (2 B sin(theta))``, divided by the fusion factor.

    ``fusion_factor`` satellites co-illuminating one swath refine the range
    resolution proportionally.
    """
    if view_angle_deg == 0.0:
        raise DegenerateGeometryError("a nadir-looking SAR cannot resolve ground range")
    if not 0.0 < view_angle_deg <= 90.0:
        raise InvalidParameterError("view angle must lie in (0, 90]")
    if not bandwidth_hz > 0:
        raise InvalidParameterError("bandwidth must be positive")
    if fusion_factor < 1:
        raise InvalidParameterError("fusion_factor must be >= 1")
    sin_t = math.sin(math.radians(view_angle_deg))
    return speed_of_light_m_s / (2.0 * bandwidth_hz * sin_t) / fusion_factor


def azimuth_resolution_m(antenna_length_m: float) -> float:
    if not antenna_length_m > 0:
        raise InvalidParameterError("antenna length must be positive")
    return antenna_length_m / 2.0


def ground_track_speed_km_s(altitude_km: float, earth: EarthModel = EarthModel()) -> float:
    """Speed of the sub-satellite point for a circular orbit (non-rotating Earth)."""
    r = earth.radius_km + altitude_km
    return math.sqrt(earth.mu_km3_s2 / r) * earth.radius_km / r


def revisit_time_s(sat_count: int, swath_width_km: float, altitude_km: float,
                   earth: EarthModel = EarthModel(), fusion_factor: int = 1) -> float:
    """Area-sweep revisit time ``4 pi Re^2 / (N_eff * W * v_g)``.

    ``N_eff = sat_count / fusion_factor``: co-illuminating groups sweep a
    single swath between them.
    """
    if fusion_factor < 1 or sat_count < fusion_factor:
        raise InvalidParameterError(
            f"need sat_count >= fusion_factor >= 1, got {sat_count}, {fusion_factor}")
    if not swath_width_km > 0 or not altitude_km > 0:
        raise InvalidParameterError("swath width and altitude must be positive")
    area = 4.0 * math.pi * earth.radius_km**2
    n_eff = sat_count / fusion_factor
    return area / (n_eff * swath_width_km * ground_track_speed_km_s(altitude_km, earth))


def download_time_s(data_size_bits: float, spectral_efficiency_bps_hz: float,
                    bandwidth_hz: float) -> float:
    if data_size_bits < 0:
        raise InvalidParameterError("data size must be non-negative")
    if not spectral_efficiency_bps_hz > 0 or not bandwidth_hz > 0:
        raise InvalidParameterError("efficiency and bandwidth must be positive")
    return data_size_bits / (spectral_efficiency_bps_hz * bandwidth_hz)


def aoi_s(revisit_time_s: float, download_time_s: float) -> float:
    """Age of the newest sensing product at the ground receiver."""
    if revisit_time_s < 0 or download_time_s < 0:
        raise InvalidParameterError("times must be non-negative")
    return revisit_time_s + download_time_s


def sensing_metrics(sar: SarConfig, sat_count: int, altitude_km: float, data_size_bits: float,
                    spectral_efficiency_bps_hz: float, earth: EarthModel = EarthModel(),
                    revisit_fusion_factor: int = 1) -> SensingMetrics:
    return SensingMetrics(
        range_resolution_m=range_resolution_m(sar.bandwidth_hz, sar.view_angle_deg,
                                              sar.fusion_factor, earth.speed_of_light_m_s),
        azimuth_resolution_m=azimuth_resolution_m(sar.antenna_length_m),
        revisit_time_s=revisit_time_s(sat_count, sar.swath_width_km, altitude_km, earth,
                                      revisit_fusion_factor),
        download_time_s=download_time_s(data_size_bits, spectral_efficiency_bps_hz,
                                        sar.bandwidth_hz),
    )

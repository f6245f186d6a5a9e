"""Spherical-Earth geometry: satellite shells, cap users, visibility.

All positions are Earth-centred Cartesian coordinates in kilometres. Point
sets are stored as ``(n, 3)`` float arrays; :class:`EcefPoint` is only a
convenience for single points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numba
import numpy as np

from .errors import DegenerateGeometryError, InvalidParameterError


@dataclass(frozen=True)
class EarthModel:
    radius_km: float = 6371.0
    mu_km3_s2: float = 398600.4418
    speed_of_light_m_s: float = 299792458.0

    def __post_init__(self):
        for name in ("radius_km", "mu_km3_s2", "speed_of_light_m_s"):
            if not getattr(self, name) > 0:
                raise InvalidParameterError(f"{name} must be positive")


class EcefPoint(NamedTuple):
    x: float
    y: float
    z: float

    @property
    def radius(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)


@dataclass(frozen=True)
class Shell:
    """Satellites at a common altitude. ``points`` has shape ``(count, 3)``."""

    altitude_km: float
    points: np.ndarray = field(repr=False)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float).reshape(-1, 3)
        object.__setattr__(self, "points", pts)

    @property
    def count(self) -> int:
        return self.points.shape[0]

    @classmethod
    def empty(cls, altitude_km: float) -> "Shell":
        return cls(altitude_km, np.empty((0, 3)))

    def __len__(self):
        return self.count


@dataclass(frozen=True)
class GpsConfig:
    count: int = 24
    altitude_km: float = 20180.0
    layout: str = "uniform"  # or "walker"
    planes: int = 6
    inclination_deg: float = 55.0


def _as_points(points) -> np.ndarray:
    return np.asarray(points, dtype=float).reshape(-1, 3)


def sample_uniform_sphere(count: int, radius: float, rng: np.random.Generator,
                          earth: EarthModel = EarthModel()) -> Shell:
    """Draw ``count`` i.i.d. points uniformly on a sphere of ``radius`` km.

    Uses Archimedes' hat-box theorem: ``z`` is uniform on ``[-r, r]`` and
    the azimuth uniform on ``[0, 2*pi)``. Consumes ``2 * count`` uniforms.
    """
    if count < 1:
        raise InvalidParameterError(f"count must be >= 1, got {count}")
    if not radius > 0:
        raise InvalidParameterError(f"radius must be positive, got {radius}")
    u = rng.random((count, 2))
    cos_t = 1.0 - 2.0 * u[:, 0]
    phi = 2.0 * np.pi * u[:, 1]
    return Shell(radius - earth.radius_km, _polar_to_cartesian(cos_t, phi, radius))


def sample_shell(count: int, altitude_km: float, rng: np.random.Generator,
                 earth: EarthModel = EarthModel()) -> Shell:
    """Like :func:`sample_uniform_sphere` but by altitude; ``count == 0`` gives an empty shell."""
    if count == 0:
        return Shell.empty(altitude_km)
    return sample_uniform_sphere(count, earth.radius_km + altitude_km, rng, earth)


@numba.njit(cache=True)
def _polar_kernel(cos_t, phi, radius, out):
    for i in range(cos_t.size):
        c = cos_t[i]
        st = radius * math.sqrt(max(1.0 - c * c, 0.0))
        out[i, 0] = st * math.cos(phi[i])
        out[i, 1] = st * math.sin(phi[i])
        out[i, 2] = radius * c


def _polar_to_cartesian(cos_t, phi, radius):
    out = np.empty((cos_t.size, 3))
    _polar_kernel(np.ascontiguousarray(cos_t, dtype=float), np.ascontiguousarray(phi, dtype=float),
                  float(radius), out)
    return out


def cap_half_angle_deg(cap_area_km2: float, earth: EarthModel = EarthModel()) -> float:
    """Half-angle of a spherical cap of the given area on the Earth surface."""
    hemisphere = 2.0 * math.pi * earth.radius_km**2
    if not 0 < cap_area_km2 < hemisphere:
        raise InvalidParameterError(
            f"cap area must lie in (0, {hemisphere:.6g}) km^2, got {cap_area_km2}")
    return math.degrees(math.acos(1.0 - cap_area_km2 / hemisphere))


def sample_cap_users(count: int, cap_area_km2: float, earth: EarthModel,
                     rng: np.random.Generator) -> np.ndarray:
    """Uniform ground points in a cap of ``cap_area_km2`` around (0, 0, Re).

    Returns an ``(count, 3)`` array.
    """
    if count < 1:
        raise InvalidParameterError(f"count must be >= 1, got {count}")
    cos_max = math.cos(math.radians(cap_half_angle_deg(cap_area_km2, earth)))
    u = rng.random((count, 2))
    cos_t = 1.0 - u[:, 0] * (1.0 - cos_max)
    phi = 2.0 * np.pi * u[:, 1]
    return _polar_to_cartesian(cos_t, phi, earth.radius_km)


def slant_range(user, sat) -> float:
    a = np.asarray(user, dtype=float)
    b = np.asarray(sat, dtype=float)
    d = float(np.linalg.norm(a - b))
    if d == 0.0:
        raise DegenerateGeometryError("slant range between identical points")
    return d


def elevation_angle(user, sat) -> float:
    """Elevation of ``sat`` above the local horizon at ``user``, in degrees."""
    u = np.asarray(user, dtype=float)
    los = np.asarray(sat, dtype=float) - u
    if not np.any(los):
        raise DegenerateGeometryError("satellite coincides with user")
    up = u / np.linalg.norm(u)
    # atan2 keeps full precision near the zenith, where asin does not
    return math.degrees(math.atan2(float(np.dot(los, up)), float(np.linalg.norm(np.cross(los, up)))))


def look_vectors(users, sats) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Unit user-to-satellite vectors, slant ranges (km) and elevations (deg).

    Shapes are ``(n, k, 3)``, ``(n, k)`` and ``(n, k)``.
    """
    users = _as_points(users)
    sats = _as_points(sats)
    los = sats[None, :, :] - users[:, None, :]
    rng_km = np.sqrt(np.einsum("nkj,nkj->nk", los, los))
    if np.any(rng_km == 0.0):
        raise DegenerateGeometryError("satellite coincides with user")
    unit = los / rng_km[..., None]
    up = users / np.linalg.norm(users, axis=1, keepdims=True)
    sin_el = np.einsum("nkj,nj->nk", unit, up)
    return unit, rng_km, np.degrees(np.arcsin(np.clip(sin_el, -1.0, 1.0)))


def pair_geometry(users, sats, origin=None) -> tuple[np.ndarray, np.ndarray]:
    """Slant ranges (km) and sines of elevation for every user/satellite pair.

    Matrix-product form of :func:`look_vectors` for large batches. Positions
    are re-centred on ``origin`` (default: the users' mean) before the
    dot products to limit cancellation.
    """
    users = _as_points(users)
    sats = _as_points(sats)
    if origin is None:
        origin = users.mean(axis=0)
    q = users - origin
    p = sats - origin
    up = users / np.linalg.norm(users, axis=1, keepdims=True)
    d2 = (np.einsum("nj,nj->n", q, q)[:, None] + np.einsum("kj,kj->k", p, p)[None, :]
          - 2.0 * (q @ p.T))
    rng_km = np.sqrt(np.clip(d2, 0.0, None))
    if np.any(rng_km == 0.0):
        raise DegenerateGeometryError("satellite coincides with user")
    height = up @ p.T - np.einsum("nj,nj->n", up, q)[:, None]
    return rng_km, height / rng_km


@numba.njit(cache=True, error_model="numpy")
def _above_mask(dot, d2_un2, sin_mask, s2):
    """``dot / sqrt(d2_un2) >= sin_mask`` without the square root."""
    if sin_mask >= 0.0:
        return dot >= 0.0 and dot * dot >= s2 * d2_un2
    return dot >= 0.0 or dot * dot <= s2 * d2_un2


@numba.njit(cache=True, error_model="numpy")
def _nearest_visible_kernel(users, sats, sin_mask, index, dist):
    degenerate = False
    s2 = sin_mask * sin_mask
    for i in range(users.shape[0]):
        ux, uy, uz = users[i, 0], users[i, 1], users[i, 2]
        un2 = ux * ux + uy * uy + uz * uz
        best = np.inf
        for j in range(sats.shape[0]):
            dx = sats[j, 0] - ux
            dy = sats[j, 1] - uy
            dz = sats[j, 2] - uz
            d2 = dx * dx + dy * dy + dz * dz
            if d2 == 0.0:
                degenerate = True
                continue
            if d2 < best and _above_mask(dx * ux + dy * uy + dz * uz, d2 * un2, sin_mask, s2):
                best = d2
                index[i] = j
        dist[i] = math.sqrt(best)
    return degenerate


def nearest_visible(users, sats, min_elevation_deg: float) -> tuple[np.ndarray, np.ndarray]:
    """Closest satellite at or above the mask for each user.

    Returns ``(index, range_km)``; users with nothing visible get index -1
    and range ``inf``. Ties go to the lower satellite index.
    """
    users = _as_points(users)
    sats = _as_points(sats)
    index = np.full(users.shape[0], -1, dtype=np.int64)
    dist = np.empty(users.shape[0])
    if _nearest_visible_kernel(users, sats, math.sin(math.radians(min_elevation_deg)),
                               index, dist):
        raise DegenerateGeometryError("satellite coincides with user")
    return index, dist


def elevation_matrix(users, sats) -> tuple[np.ndarray, np.ndarray]:
    """Pairwise elevations (deg) and slant ranges (km), both shaped ``(n_users, n_sats)``."""
    _, rng_km, el = look_vectors(users, sats)
    return el, rng_km


def visible_satellites(user, shell: Shell, min_elevation_deg: float) -> list[tuple[int, float, float]]:
    """Satellites at or above the elevation mask as ``(index, range_km, elevation_deg)``.

    Sorted by ascending slant range, ties broken by index.
    """
    if not 0.0 <= min_elevation_deg <= 90.0:
        raise InvalidParameterError("min_elevation_deg must be within [0, 90]")
    if shell.count == 0:
        return []
    el, rng_km = elevation_matrix(user, shell.points)
    el, rng_km = el[0], rng_km[0]
    idx = np.flatnonzero(el >= min_elevation_deg)
    order = np.lexsort((idx, rng_km[idx]))
    return [(int(i), float(rng_km[i]), float(el[i])) for i in idx[order]]


def visibility_central_angle_deg(altitude_km: float, min_elevation_deg: float,
                                 earth: EarthModel = EarthModel()) -> float:
    """Earth-central angle between a user and a satellite seen exactly at the mask."""
    e = math.radians(min_elevation_deg)
    ratio = earth.radius_km / (earth.radius_km + altitude_km)
    return 90.0 - min_elevation_deg - math.degrees(math.asin(math.cos(e) * ratio))


def walker_points(count: int, planes: int, inclination_deg: float, radius_km: float,
                  phasing: int = 1) -> np.ndarray:
    if planes < 1 or count % planes:
        raise InvalidParameterError(f"walker layout needs count divisible by planes ({count}/{planes})")
    slots = count // planes
    inc = math.radians(inclination_deg)
    pts = []
    for p in range(planes):
        raan = 2.0 * math.pi * p / planes
        for s in range(slots):
            u = 2.0 * math.pi * s / slots + 2.0 * math.pi * phasing * p / count
            pts.append((
                math.cos(raan) * math.cos(u) - math.sin(raan) * math.sin(u) * math.cos(inc),
                math.sin(raan) * math.cos(u) + math.cos(raan) * math.sin(u) * math.cos(inc),
                math.sin(u) * math.sin(inc),
            ))
    return radius_km * np.array(pts)


def gps_shell(config: GpsConfig = GpsConfig(), rng: np.random.Generator | None = None,
              earth: EarthModel = EarthModel()) -> Shell:
    """The MEO reference constellation the LEO layer augments.

    ``layout="uniform"`` draws ``count`` random points from ``rng``;
    ``layout="walker"`` is a fixed planes x slots pattern and ignores ``rng``.
    """
    if config.count < 1:
        raise InvalidParameterError(f"GPS satellite count must be >= 1, got {config.count}")
    radius = earth.radius_km + config.altitude_km
    if config.layout == "walker":
        return Shell(config.altitude_km, walker_points(config.count, config.planes,
                                                       config.inclination_deg, radius))
    if config.layout != "uniform":
        raise InvalidParameterError(f"unknown GPS layout {config.layout!r}")
    if rng is None:
        raise InvalidParameterError("uniform GPS layout needs a random stream")
    return sample_uniform_sphere(config.count, radius, rng, earth)


def rotation_matrix(axis, angle_rad: float) -> np.ndarray:
    """Rodrigues rotation about ``axis``."""
    k = np.asarray(axis, dtype=float)
    k = k / np.linalg.norm(k)
    kx = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    return np.eye(3) + math.sin(angle_rad) * kx + (1 - math.cos(angle_rad)) * kx @ kx

"""Ranging error model and weighted least-squares positioning error.

The clock bias is carried as a range (``c * t``) in the fourth state
coordinate, so covariances are in square metres throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from .errors import (
    DegenerateGeometryError,
    InsufficientAnchorsError,
    InvalidParameterError,
    SingularGeometryError,
)
from .geometry import Shell, _above_mask, look_vectors

MIN_ANCHORS = 4
MAX_CONDITION = 1e12
SPEED_OF_LIGHT = 299792458.0

BANDWIDTH_RULES = ("linear", "sqrt", "off")


@dataclass(frozen=True)
class RangingModel:
    """Ranging standard deviation proportional to distance.

    ``bandwidth_scale_mode`` sets how the error shrinks when the navigation
    signal is wider than ``reference_bandwidth_hz``: ``linear`` (1/B),
    ``sqrt`` (1/sqrt(B)) or ``off``.
    """

    per_unit_distance_coeff: float = 2.28e-8
    bandwidth_scale_mode: str = "linear"
    reference_bandwidth_hz: float = 25e6

    def __post_init__(self):
        if not self.per_unit_distance_coeff > 0:
            raise InvalidParameterError("per_unit_distance_coeff must be positive")
        if not self.reference_bandwidth_hz > 0:
            raise InvalidParameterError("reference_bandwidth_hz must be positive")
        if self.bandwidth_scale_mode not in BANDWIDTH_RULES:
            raise InvalidParameterError(
                f"bandwidth_scale_mode must be one of {BANDWIDTH_RULES}")

    def bandwidth_factor(self, nav_bandwidth_hz: float) -> float:
        if not nav_bandwidth_hz > 0:
            raise InvalidParameterError("navigation bandwidth must be positive")
        ratio = self.reference_bandwidth_hz / nav_bandwidth_hz
        if self.bandwidth_scale_mode == "linear":
            return ratio
        if self.bandwidth_scale_mode == "sqrt":
            return math.sqrt(ratio)
        return 1.0


@dataclass(frozen=True)
class Anchor:
    position: tuple
    ranging_sigma_m: float

    def __post_init__(self):
        if not self.ranging_sigma_m > 0:
            raise InvalidParameterError("ranging_sigma_m must be positive")


@dataclass(frozen=True)
class NavSolutionError:
    covariance: np.ndarray
    positioning_error_m: float
    timing_error_s: float


def ranging_sigma_m(distance_km, nav_bandwidth_hz: float, model: RangingModel = RangingModel()):
    d = np.asarray(distance_km, dtype=float)
    if not np.all(d > 0):
        raise InvalidParameterError("distance must be positive")
    out = model.per_unit_distance_coeff * (d * 1000.0) * model.bandwidth_factor(nav_bandwidth_hz)
    return float(out) if out.ndim == 0 else out


def geometry_matrix(user, anchors: list[Anchor]) -> np.ndarray:
    """Linearised distance equations: row ``i`` is ``[-u_i, 1]`` with ``u_i`` the unit line of sight."""
    if len(anchors) < MIN_ANCHORS:
        raise InsufficientAnchorsError(
            f"at least {MIN_ANCHORS} reference satellites are required, got {len(anchors)}")
    u = np.asarray(user, dtype=float)
    pos = np.array([a.position for a in anchors], dtype=float).reshape(-1, 3)
    los = pos - u
    d = np.linalg.norm(los, axis=1)
    if np.any(d == 0.0):
        raise DegenerateGeometryError("anchor coincides with user")
    return np.column_stack((-los / d[:, None], np.ones(len(anchors))))


def condition_numbers(info: np.ndarray) -> np.ndarray:
    """Condition numbers of symmetric PSD matrices (inf when singular)."""
    eig = np.linalg.eigvalsh(info)
    lo, hi = eig[..., 0], eig[..., -1]
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(lo > 0, hi / lo, np.inf)


def solution_error(user, anchors: list[Anchor],
                   speed_of_light_m_s: float = SPEED_OF_LIGHT) -> NavSolutionError:
    """Error covariance ``(H^T W H)^-1`` with ``W = diag(1 / sigma_i^2)``.

    With a common sigma this is ``sigma^2`` times the GDOP matrix, so
    ``sqrt(trace(C)) = GDOP * sigma``.
    """
    h = geometry_matrix(user, anchors)
    w = np.array([1.0 / a.ranging_sigma_m**2 for a in anchors])
    info = h.T @ (h * w[:, None])
    if condition_numbers(info) > MAX_CONDITION:
        raise SingularGeometryError("anchor geometry is singular")
    cov = np.linalg.inv(info)
    cov = 0.5 * (cov + cov.T)
    return NavSolutionError(
        covariance=cov,
        positioning_error_m=math.sqrt(cov[0, 0] + cov[1, 1] + cov[2, 2]),
        timing_error_s=math.sqrt(cov[3, 3]) / speed_of_light_m_s,
    )


def hybrid_anchor_set(user, leo_nav_shell: Shell, gps: Shell, nav_bandwidth_hz: float,
                      model: RangingModel = RangingModel(), leo_mask_deg: float = 20.0,
                      gps_mask_deg: float = 20.0) -> list[Anchor]:
    """Visible GPS anchors followed by visible LEO navigation anchors.

    GPS ranging stays at the reference bandwidth; LEO ranging uses
    ``nav_bandwidth_hz``. May return fewer than four anchors.
    """
    anchors = []
    for shell, mask, bw in ((gps, gps_mask_deg, model.reference_bandwidth_hz),
                            (leo_nav_shell, leo_mask_deg, nav_bandwidth_hz)):
        if shell.count == 0:
            continue
        _, rng_km, el = look_vectors(user, shell.points)
        for k in np.flatnonzero(el[0] >= mask):
            anchors.append(Anchor(tuple(shell.points[k]), ranging_sigma_m(rng_km[0, k], bw, model)))
    return anchors


def information_batch(users, sats, weights, ranges_km, origin=None) -> np.ndarray:
    """Stacked ``H^T W H`` for ``n`` users over ``k`` candidate anchors.

    ``weights`` and ``ranges_km`` are ``(n, k)``; a zero weight drops the
    anchor for that user. Assembled from weighted moments of the satellite
    positions (re-centred on ``origin``) rather than per-pair vectors.
    """
    users = np.asarray(users, dtype=float).reshape(-1, 3)
    sats = np.asarray(sats, dtype=float).reshape(-1, 3)
    if origin is None:
        origin = users.mean(axis=0)
    q = users - origin
    p = sats - origin
    n = users.shape[0]
    a = weights / ranges_km**2
    b = weights / ranges_km
    alpha = a.sum(axis=1)
    beta = b.sum(axis=1)
    m_a = a @ p
    m_b = b @ p
    outer = (a @ (p[:, :, None] * p[:, None, :]).reshape(-1, 9)).reshape(n, 3, 3)
    qm = q[:, :, None] * m_a[:, None, :]
    info = np.empty((n, 4, 4))
    info[:, :3, :3] = outer - qm - qm.transpose(0, 2, 1) + alpha[:, None, None] * (
        q[:, :, None] * q[:, None, :])
    cross = -(m_b - beta[:, None] * q)
    info[:, :3, 3] = cross
    info[:, 3, :3] = cross
    info[:, 3, 3] = weights.sum(axis=1)
    return info


@numba.njit(cache=True, error_model="numpy")
def _information_kernel(users, sats, coeff_m_per_km, sin_mask, info, counts):
    degenerate = False
    s2 = sin_mask * sin_mask
    k2 = coeff_m_per_km * coeff_m_per_km
    for i in range(users.shape[0]):
        ux, uy, uz = users[i, 0], users[i, 1], users[i, 2]
        un2 = ux * ux + uy * uy + uz * uz
        j00 = j01 = j02 = j03 = j11 = j12 = j13 = j22 = j23 = j33 = 0.0
        m = 0
        for j in range(sats.shape[0]):
            dx = sats[j, 0] - ux
            dy = sats[j, 1] - uy
            dz = sats[j, 2] - uz
            d2 = dx * dx + dy * dy + dz * dz
            if d2 == 0.0:
                degenerate = True
                continue
            if not _above_mask(dx * ux + dy * uy + dz * uz, d2 * un2, sin_mask, s2):
                continue
            w = 1.0 / (k2 * d2)
            inv_r = 1.0 / math.sqrt(d2)
            h0 = -dx * inv_r
            h1 = -dy * inv_r
            h2 = -dz * inv_r
            j00 += w * h0 * h0
            j01 += w * h0 * h1
            j02 += w * h0 * h2
            j03 += w * h0
            j11 += w * h1 * h1
            j12 += w * h1 * h2
            j13 += w * h1
            j22 += w * h2 * h2
            j23 += w * h2
            j33 += w
            m += 1
        info[i, 0, 0] = j00
        info[i, 0, 1] = info[i, 1, 0] = j01
        info[i, 0, 2] = info[i, 2, 0] = j02
        info[i, 0, 3] = info[i, 3, 0] = j03
        info[i, 1, 1] = j11
        info[i, 1, 2] = info[i, 2, 1] = j12
        info[i, 1, 3] = info[i, 3, 1] = j13
        info[i, 2, 2] = j22
        info[i, 2, 3] = info[i, 3, 2] = j23
        info[i, 3, 3] = j33
        counts[i] = m
    return degenerate


def information_matrices(users, sats, min_elevation_deg: float,
                         per_unit_distance_coeff: float = 2.28e-8):
    """Per-user ``H^T W H`` and anchor counts over the satellites above the mask.

    Ranging sigma is ``per_unit_distance_coeff * range`` (both in metres), i.e.
    at the reference bandwidth; scale by ``1 / factor**2`` for other bandwidths.
    """
    users = np.asarray(users, dtype=float).reshape(-1, 3)
    sats = np.asarray(sats, dtype=float).reshape(-1, 3)
    info = np.zeros((users.shape[0], 4, 4))
    counts = np.zeros(users.shape[0], dtype=np.int64)
    if _information_kernel(users, sats, per_unit_distance_coeff * 1000.0,
                           math.sin(math.radians(min_elevation_deg)), info, counts):
        raise DegenerateGeometryError("anchor coincides with user")
    return info, counts


@numba.njit(cache=True, error_model="numpy")
def _schur_kernel(info, pos_var, clk_var, bound):
    # closed-form inverse of a 4x4 SPD matrix through the Schur complement on the clock term
    for i in range(info.shape[0]):
        c = info[i, 3, 3]
        b0, b1, b2 = info[i, 0, 3], info[i, 1, 3], info[i, 2, 3]
        a00, a01, a02 = info[i, 0, 0], info[i, 0, 1], info[i, 0, 2]
        a11, a12, a22 = info[i, 1, 1], info[i, 1, 2], info[i, 2, 2]
        m00 = a00 - b0 * b0 / c
        m01 = a01 - b0 * b1 / c
        m02 = a02 - b0 * b2 / c
        m11 = a11 - b1 * b1 / c
        m12 = a12 - b1 * b2 / c
        m22 = a22 - b2 * b2 / c
        det_m = (m00 * (m11 * m22 - m12 * m12) - m01 * (m01 * m22 - m12 * m02)
                 + m02 * (m01 * m12 - m11 * m02))
        det_a = (a00 * (a11 * a22 - a12 * a12) - a01 * (a01 * a22 - a12 * a02)
                 + a02 * (a01 * a12 - a11 * a02))
        pos_var[i] = ((m11 * m22 - m12 * m12) + (m00 * m22 - m02 * m02)
                      + (m00 * m11 - m01 * m01)) / det_m
        clk_var[i] = det_a / (c * det_m)
        bound[i] = (a00 + a11 + a22 + c) * (pos_var[i] + clk_var[i])


def _schur_errors(info):
    """Position variance sum, clock variance and the bound ``tr(J) tr(J^-1)`` on cond(J)."""
    info = np.ascontiguousarray(info, dtype=float)
    n = info.shape[0]
    pos_var, clk_var, bound = np.empty(n), np.empty(n), np.empty(n)
    with np.errstate(divide="ignore", invalid="ignore"):
        _schur_kernel(info, pos_var, clk_var, bound)
    return pos_var, clk_var, bound


def errors_from_information(info: np.ndarray, anchor_counts: np.ndarray,
                            speed_of_light_m_s: float = SPEED_OF_LIGHT):
    """Positioning (m) and timing (s) errors from stacked information matrices.

    Returns ``(positioning, timing, available)``; unavailable users (fewer than
    four anchors or condition number above 1e12) get NaN errors. The cheap
    bound ``cond <= tr(J) tr(J^-1)`` settles most users; the rest get an
    exact eigenvalue check and a LAPACK inverse.
    """
    n = info.shape[0]
    pos = np.full(n, np.nan)
    tim = np.full(n, np.nan)
    ok = np.asarray(anchor_counts) >= MIN_ANCHORS
    idx = np.flatnonzero(ok)
    if idx.size == 0:
        return pos, tim, ok
    pos_var, clk_var, bound = _schur_errors(info[idx])
    with np.errstate(invalid="ignore"):
        settled = (pos_var > 0) & (clk_var > 0) & np.isfinite(bound) & (bound <= MAX_CONDITION)
    pos[idx[settled]] = np.sqrt(pos_var[settled])
    tim[idx[settled]] = np.sqrt(clk_var[settled]) / speed_of_light_m_s
    rest = idx[~settled]
    if rest.size:
        good = condition_numbers(info[rest]) <= MAX_CONDITION
        ok[rest[~good]] = False
        keep = rest[good]
        if keep.size:
            cov = np.linalg.inv(info[keep])
            pos[keep] = np.sqrt(cov[:, 0, 0] + cov[:, 1, 1] + cov[:, 2, 2])
            tim[keep] = np.sqrt(cov[:, 3, 3]) / speed_of_light_m_s
    return pos, tim, ok

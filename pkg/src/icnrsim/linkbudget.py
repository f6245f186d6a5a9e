"""Noise-limited downlink budget with Rayleigh fading.

Functions accept scalars or numpy arrays unless noted otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np
from scipy import integrate

from .errors import InvalidParameterError

LN2 = math.log(2.0)
EULER_GAMMA = 0.57721566490153286061


@dataclass(frozen=True)
class LinkBudget:
    """Everything needed for a mean SNR. Fields may be numpy arrays of a common shape."""

    tx_power_w: float
    distance_km: float
    bandwidth_hz: float
    combined_gain_db: float = 55.0
    noise_psd_dbm_hz: float = -174.0
    noise_figure_db: float = 7.0
    path_loss_intercept_db: float = 110.0
    path_loss_slope_db: float = 37.6

    def __post_init__(self):
        for name in ("tx_power_w", "distance_km", "bandwidth_hz"):
            if not np.all(np.asarray(getattr(self, name)) > 0):
                raise InvalidParameterError(f"{name} must be positive")


@dataclass(frozen=True)
class CapacityStats:
    mean_snr_linear: float
    outage_probability: float
    ergodic_capacity_bps: float


def path_loss_db(distance_km, intercept_db: float = 110.0, slope_db: float = 37.6):
    """Large-scale loss ``intercept + slope * log10(d)`` with ``d`` in km."""
    d = np.asarray(distance_km, dtype=float)
    if not np.all(d > 0):
        raise InvalidParameterError("distance must be positive")
    out = intercept_db + slope_db * np.log10(d)
    return float(out) if out.ndim == 0 else out


def mean_snr_linear(budget: LinkBudget):
    tx_dbm = 10.0 * np.log10(np.asarray(budget.tx_power_w, dtype=float) * 1000.0)
    pl = path_loss_db(budget.distance_km, budget.path_loss_intercept_db, budget.path_loss_slope_db)
    snr_db = (tx_dbm + budget.combined_gain_db - pl - budget.noise_psd_dbm_hz
              - budget.noise_figure_db - 10.0 * np.log10(budget.bandwidth_hz))
    out = np.power(10.0, snr_db / 10.0)
    return float(out) if np.ndim(out) == 0 else out


def _check_positive(**values):
    for name, v in values.items():
        if not np.all(np.asarray(v) > 0):
            raise InvalidParameterError(f"{name} must be positive")


def outage_probability(mean_snr, bandwidth_hz, rate_threshold_bps):
    """P[B log2(1 + g) < R] for exponentially distributed ``g`` with the given mean."""
    _check_positive(mean_snr=mean_snr, bandwidth_hz=bandwidth_hz)
    r = np.asarray(rate_threshold_bps, dtype=float)
    if np.any(r < 0):
        raise InvalidParameterError("rate threshold must be non-negative")
    with np.errstate(over="ignore"):  # an unreachable threshold saturates to outage 1
        snr_needed = np.expm1(LN2 * r / np.asarray(bandwidth_hz, dtype=float))
    out = -np.expm1(-snr_needed / np.asarray(mean_snr, dtype=float))
    return float(out) if out.ndim == 0 else out


def ergodic_capacity_bps(mean_snr: float, bandwidth_hz: float) -> float:
    """``B * E[log2(1 + g)]`` by adaptive quadrature (relative tolerance 1e-9). Scalar only."""
    _check_positive(mean_snr=mean_snr, bandwidth_hz=bandwidth_hz)
    s = float(mean_snr)
    # integrate in units of the fading gain; the integrand decays as e^-x
    val, _ = integrate.quad(lambda x: math.log1p(s * x) * math.exp(-x), 0.0, math.inf,
                            epsabs=0.0, epsrel=1e-9, limit=200)
    return float(bandwidth_hz) * val / LN2


@numba.njit(cache=True, error_model="numpy")
def _scaled_exp1(x, out):
    # e^x E1(x): power series below 1, modified Lentz continued fraction above
    for i in range(x.size):
        v = x[i]
        if v < 1.0:
            term = 1.0
            total = 0.0
            k = 1
            while k < 200:
                term *= -v / k
                part = term / k
                total += part
                if abs(part) < 1e-17:
                    break
                k += 1
            out[i] = math.exp(v) * (-EULER_GAMMA - math.log(v) - total)
        elif v > 1e6:
            out[i] = (1.0 - 1.0 / v + 2.0 / (v * v)) / v
        else:
            b = v + 1.0
            c = 1e300
            d = 1.0 / b
            h = d
            for k in range(1, 1000):
                an = -float(k * k)
                b += 2.0
                d = 1.0 / (an * d + b)
                c = b + an / c
                step = c * d
                h *= step
                if abs(step - 1.0) < 1e-16:
                    break
            out[i] = h


def ergodic_capacity_exp1(mean_snr, bandwidth_hz):
    """Closed form ``B * exp(1/s) * E1(1/s) / ln 2``, vectorised.

    The scaled exponential integral ``e^x E1(x)`` is evaluated directly
    (series below ``x = 1``, continued fraction above), so nothing
    overflows for small mean SNR.
    """
    _check_positive(mean_snr=mean_snr, bandwidth_hz=bandwidth_hz)
    x = 1.0 / np.asarray(mean_snr, dtype=float)
    flat = np.ascontiguousarray(np.atleast_1d(x)).ravel()
    val = np.empty_like(flat)
    _scaled_exp1(flat, val)
    out = np.asarray(bandwidth_hz, dtype=float) * val.reshape(x.shape) / LN2
    return float(out) if np.ndim(out) == 0 else out


def draw_instantaneous_snr(mean_snr, rng: np.random.Generator, size=None):
    """Exponential (Rayleigh power) draw(s) with the given mean."""
    _check_positive(mean_snr=mean_snr)
    return rng.exponential(mean_snr, size=size)


def capacity_stats(budget: LinkBudget, rate_threshold_bps: float) -> CapacityStats:
    snr = mean_snr_linear(budget)
    return CapacityStats(
        mean_snr_linear=snr,
        outage_probability=outage_probability(snr, budget.bandwidth_hz, rate_threshold_bps),
        ergodic_capacity_bps=ergodic_capacity_bps(snr, budget.bandwidth_hz),
    )

"""Seeded Monte Carlo trials over integration levels and report aggregation.

Seed derivation
---------------
``derive_seed(master, *keys)`` folds 64-bit keys into a seed with the
SplitMix64 finaliser::

    h = mix(master)
    for k in keys: h = mix(h ^ k)

where ``mix(z)`` adds the golden-ratio increment ``0x9E3779B97F4A7C15`` and
applies the two xor-shift-multiply rounds of SplitMix64 (all modulo 2**64).
Trial ``i`` uses ``derive_seed(master, level_key, i)`` with ``level_key = 0``
when levels are paired (the default) and the level code (1, 2, 3)
otherwise. Inside a trial, geometry draws come from
``derive_seed(trial_seed, 0)`` and fading draws from
``derive_seed(trial_seed, 1)``, each feeding a Philox4x64 generator keyed
by that seed.
"""

from __future__ import annotations

import hashlib
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameterError
from .geometry import Shell, gps_shell, sample_cap_users, sample_shell
from .linkbudget import (
    LinkBudget,
    draw_instantaneous_snr,
    ergodic_capacity_exp1,
    mean_snr_linear,
    outage_probability,
)
from .navigation import errors_from_information, information_matrices
from .scenario import (
    ALL_LEVELS,
    IntegrationLevel,
    ScenarioConfig,
    allocate,
    associate,
    build_regime,
    UserFootprint,
)
from .sensing import SarConfig, sensing_metrics

MASK64 = (1 << 64) - 1

METRICS = (
    "outage_probability",
    "ergodic_capacity_bps",
    "positioning_error_m",
    "timing_error_s",
    "nav_availability",
    "range_resolution_m",
    "aoi_s",
)
DETERMINISTIC_METRICS = ("range_resolution_m", "aoi_s")
Z95 = 1.96


def _mix64(z: int) -> int:
    z = (z + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(master_seed: int, *keys: int) -> int:
    h = _mix64(master_seed & MASK64)
    for k in keys:
        h = _mix64(h ^ (k & MASK64))
    return h


def trial_seed(master_seed: int, level: IntegrationLevel, index: int, paired: bool = True) -> int:
    return derive_seed(master_seed, 0 if paired else level.code, index)


def make_rng(seed: int, algorithm: str = "philox") -> np.random.Generator:
    if algorithm == "philox":
        return np.random.Generator(np.random.Philox(key=seed))
    if algorithm == "pcg64":
        return np.random.Generator(np.random.PCG64(seed))
    raise InvalidParameterError(f"unknown rng algorithm {algorithm!r}")


@dataclass(frozen=True)
class TrialMetrics:
    """One trial's vehicle-averaged metrics for one integration level.

    Navigation errors average over vehicles with a usable fix and are NaN
    when no vehicle has one. ``outage_closed_form_mean`` is the fading-free
    outage probability over the same geometry, kept for consistency checks.
    """

    outage_indicator_mean: float
    ergodic_capacity_mean_bps: float
    positioning_error_m: float
    timing_error_s: float
    nav_availability_fraction: float
    range_resolution_m: float
    aoi_s: float
    outage_closed_form_mean: float

    @property
    def navigation_available(self) -> bool:
        return not math.isnan(self.positioning_error_m)

    def metric(self, name: str) -> float:
        return getattr(self, _TRIAL_FIELDS[name])


_TRIAL_FIELDS = {
    "outage_probability": "outage_indicator_mean",
    "ergodic_capacity_bps": "ergodic_capacity_mean_bps",
    "positioning_error_m": "positioning_error_m",
    "timing_error_s": "timing_error_s",
    "nav_availability": "nav_availability_fraction",
    "range_resolution_m": "range_resolution_m",
    "aoi_s": "aoi_s",
}


class _TrialGeometry:
    """Draws shared by every level evaluated on one trial seed.

    The integrated constellation is the union of the three traditional
    shells, so nested anchor and satellite sets hold across levels.
    """

    def __init__(self, config: ScenarioConfig, seed: int):
        self.config = config
        earth = config.earth
        geo = make_rng(derive_seed(seed, 0), config.rng_algorithm)
        fade = make_rng(derive_seed(seed, 1), config.rng_algorithm)
        self.vehicles = sample_cap_users(config.vehicle_count, config.cap_area_km2, earth, geo)
        self.footprint = UserFootprint(self.vehicles)
        if config.gps_enabled:
            self.gps = gps_shell(config.gps, geo, earth)
        else:
            self.gps = Shell.empty(config.gps_altitude_km)
        alt = config.altitude_km
        self.comm = sample_shell(config.comm_satellites, alt, geo, earth)
        self.nav = sample_shell(config.nav_satellites, alt, geo, earth)
        self.sensing = sample_shell(config.sensing_satellites, alt, geo, earth)
        self.integrated = Shell(alt, np.vstack((self.comm.points, self.nav.points,
                                                self.sensing.points)))
        # unit-mean Rayleigh power gains, scaled per link by its mean SNR
        self.fading = draw_instantaneous_snr(1.0, fade, size=config.vehicle_count)
        self._info = {}
        self._assoc = {}

    def shell_information(self, name: str):
        """Reference-bandwidth information matrices and anchor counts from one shell."""
        if name not in self._info:
            shell = getattr(self, name)
            cfg = self.config
            cand = self.footprint.candidates(shell, cfg.nav_elevation_deg, cfg.earth)
            self._info[name] = information_matrices(self.vehicles, shell.points[cand],
                                                    cfg.nav_elevation_deg, cfg.ranging_error_per_m)
        return self._info[name]

    def association(self, name: str):
        """Serving satellite and slant range per vehicle on one shell (bandwidth-free)."""
        if name not in self._assoc:
            cfg = self.config
            self._assoc[name] = associate(self.vehicles, getattr(self, name),
                                          cfg.comm_elevation_deg, cfg.earth, self.footprint)
        return self._assoc[name]


def _communication(geom: _TrialGeometry, regime, config: ScenarioConfig):
    name = "integrated" if regime.shared_constellation else "comm"
    sat, dist = geom.association(name)
    assoc = allocate(sat, dist, regime.comm_bandwidth_hz, getattr(geom, name).count)
    n = len(assoc)
    covered = assoc.covered
    outage = np.ones(n)
    closed = np.ones(n)
    capacity = np.zeros(n)
    if np.any(covered):
        share = assoc.share_hz[covered]
        snr = mean_snr_linear(LinkBudget(
            tx_power_w=config.comm_tx_power_w,
            distance_km=assoc.slant_range_km[covered],
            bandwidth_hz=share,
            combined_gain_db=config.combined_gain_db,
            noise_psd_dbm_hz=config.noise_psd_dbm_hz,
            noise_figure_db=config.noise_figure_db,
            path_loss_intercept_db=config.path_loss_intercept_db,
            path_loss_slope_db=config.path_loss_slope_db,
        ))
        rate = share * np.log2(1.0 + snr * geom.fading[covered])
        outage[covered] = rate < config.rate_threshold_bps
        closed[covered] = outage_probability(snr, share, config.rate_threshold_bps)
        capacity[covered] = ergodic_capacity_exp1(snr, share)
    return float(np.mean(outage)), float(np.mean(closed)), float(np.mean(capacity))


def _navigation(geom: _TrialGeometry, regime, config: ScenarioConfig):
    info, counts = geom.shell_information("gps")
    leo_names = ("comm", "nav", "sensing") if regime.shared_constellation else ("nav",)
    leo_info = sum(geom.shell_information(s)[0] for s in leo_names)
    leo_counts = sum(geom.shell_information(s)[1] for s in leo_names)
    factor = config.ranging_model.bandwidth_factor(regime.nav_bandwidth_hz)
    info = info + leo_info / factor**2
    pos, tim, ok = errors_from_information(info, counts + leo_counts, config.speed_of_light_m_s)
    if not np.any(ok):
        return math.nan, math.nan, 0.0
    return float(np.mean(pos[ok])), float(np.mean(tim[ok])), float(np.mean(ok))


def level_sensing(level: IntegrationLevel, config: ScenarioConfig):
    regime = build_regime(level, config)
    sar = SarConfig(regime.sensing_bandwidth_hz, config.sar_view_angle_deg, config.swath_width_km,
                    config.antenna_length_m, regime.fusion_factor)
    return sensing_metrics(sar, regime.sensing_satellites, config.altitude_km,
                           config.sensing_data_bits, config.delivery_efficiency_bps_hz,
                           config.earth,
                           revisit_fusion_factor=regime.fusion_factor if config.fusion_halves_revisit else 1)


def simulate_trial(levels, config: ScenarioConfig, seed: int) -> dict:
    """Evaluate several levels on the same draws; returns ``{level: TrialMetrics}``.

    Each level's result is identical to :func:`run_trial` for that level alone.
    """
    geom = _TrialGeometry(config, seed)
    out = {}
    for level in levels:
        regime = build_regime(level, config)
        outage, closed, capacity = _communication(geom, regime, config)
        pos, tim, avail = _navigation(geom, regime, config)
        sens = level_sensing(level, config)
        out[level] = TrialMetrics(
            outage_indicator_mean=outage,
            ergodic_capacity_mean_bps=capacity,
            positioning_error_m=pos,
            timing_error_s=tim,
            nav_availability_fraction=avail,
            range_resolution_m=sens.range_resolution_m,
            aoi_s=sens.aoi_s,
            outage_closed_form_mean=closed,
        )
    return out


def run_trial(level: IntegrationLevel, config: ScenarioConfig, trial_seed: int) -> TrialMetrics:
    return simulate_trial([level], config, trial_seed)[level]


@dataclass(frozen=True)
class MetricSummary:
    mean: float
    stderr: float
    ci_low: float
    ci_high: float
    n: int


@dataclass(frozen=True)
class MetricsReport:
    """Per-level summaries keyed ``summaries[level.value][metric]``.

    ``samples`` holds the per-trial values (same keys) in trial order; it is
    not part of any emitted output.
    """

    levels: tuple
    summaries: dict
    trials: int
    master_seed: int
    config_fingerprint: str
    samples: dict = field(default_factory=dict, repr=False, compare=False)


def summarize(values, deterministic: bool = False) -> MetricSummary:
    """Mean, standard error and 95% normal interval over finite values."""
    arr = np.asarray(values, dtype=float)
    arr = arr[np.isfinite(arr)]
    n = int(arr.size)
    if n == 0:
        return MetricSummary(math.nan, math.nan, math.nan, math.nan, 0)
    mean = float(np.mean(arr))
    if deterministic:
        return MetricSummary(mean, 0.0, mean, mean, n)
    stderr = float(np.std(arr, ddof=1) / math.sqrt(n)) if n > 1 else math.nan
    half = Z95 * stderr
    return MetricSummary(mean, stderr, mean - half, mean + half, n)


def config_fingerprint(config: ScenarioConfig) -> str:
    from .config import format_config

    return hashlib.sha256(format_config(config).encode("utf-8")).hexdigest()


def _run_block(args):
    groups, config, master_seed, start, stop = args
    rows = []
    for i in range(start, stop):
        row = {}
        for key, levels in groups:
            row.update(simulate_trial(levels, config, derive_seed(master_seed, key, i)))
        rows.append(row)
    return rows


def run_experiment(levels, config: ScenarioConfig, trials: int, master_seed: int,
                   workers: int = 1) -> MetricsReport:
    """Run ``trials`` seeded trials per level and aggregate in trial order.

    ``workers > 1`` spreads contiguous trial blocks over processes; the
    report does not depend on it.
    """
    if trials < 1:
        raise InvalidParameterError(f"trials must be >= 1, got {trials}")
    levels = tuple(dict.fromkeys(levels or ALL_LEVELS))
    if config.pair_levels:
        groups = [(0, levels)]
    else:
        groups = [(level.code, (level,)) for level in levels]

    workers = max(1, min(int(workers), trials))
    bounds = np.linspace(0, trials, workers + 1).astype(int)
    blocks = [(groups, config, master_seed, int(a), int(b)) for a, b in zip(bounds, bounds[1:])]
    if workers == 1:
        rows = _run_block(blocks[0])
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = [r for block in pool.map(_run_block, blocks) for r in block]

    summaries, samples = {}, {}
    for level in levels:
        per_metric = {m: np.array([row[level].metric(m) for row in rows]) for m in METRICS}
        samples[level.value] = per_metric
        summaries[level.value] = {
            m: summarize(per_metric[m], m in DETERMINISTIC_METRICS) for m in METRICS
        }
    return MetricsReport(
        levels=tuple(level.value for level in levels),
        summaries=summaries,
        trials=trials,
        master_seed=master_seed,
        config_fingerprint=config_fingerprint(config),
        samples=samples,
    )

"""End-to-end acceptance checks, one test per criterion.

Each test logs a PASS/FAIL line (shown in the terminal summary) before
asserting, so a failing criterion is reported rather than hidden.
"""

import math

import numpy as np
import pytest
from scipy import stats

from icnrsim.cli import main
from icnrsim.errors import SingularGeometryError
from icnrsim.geometry import (
    elevation_matrix,
    sample_shell,
    sample_uniform_sphere,
    visibility_central_angle_deg,
)
from icnrsim.linkbudget import (
    draw_instantaneous_snr,
    ergodic_capacity_bps,
    ergodic_capacity_exp1,
    outage_probability,
)
from icnrsim.navigation import Anchor, errors_from_information, geometry_matrix, solution_error
from icnrsim.scenario import ALL_LEVELS, ScenarioConfig, safety_message_rate_bps
from icnrsim.sensing import download_time_s, range_resolution_m, revisit_time_s
from icnrsim.simulator import level_sensing
from oracles import C_LIGHT, brute_force_covariance, errors_from_covariance, frobenius_rel

T, F, S = ALL_LEVELS
CFG = ScenarioConfig()
RE = 6371.0
Z95 = 1.96


def paired_lower_bound(a, b):
    """Lower 95% bound on the mean of ``a - b`` over trials where both are finite."""
    keep = np.isfinite(a) & np.isfinite(b)
    d = a[keep] - b[keep]
    return d.mean() - Z95 * d.std(ddof=1) / math.sqrt(d.size)


def test_criterion_01_range_resolution_chain(verdict):
    values = [level_sensing(lv, CFG).range_resolution_m for lv in ALL_LEVELS]
    # independent evaluation of c / (2 B sin(view angle)) / fusion
    sin30 = math.sin(math.radians(30.0))
    expected = [C_LIGHT / (2 * 25e6 * sin30), C_LIGHT / (2 * 25e6 * sin30) / 2,
                C_LIGHT / (2 * 300e6 * sin30) / 2]
    exact = all(abs(v / e - 1) <= 1e-9 for v, e in zip(values, expected))
    rounded = (round(values[0], 2) == 11.99 and round(values[1], 3) == 5.996
               and round(values[2], 4) == 0.4997)
    ok = exact and rounded and values[0] / values[2] >= 10
    verdict(1, ok, "range resolution " + " / ".join(f"{v:.6g} m" for v in values))


def test_criterion_02_aoi_chain(verdict):
    sens = {lv: level_sensing(lv, CFG) for lv in ALL_LEVELS}
    downloads = [download_time_s(360e9, 1.0, 25e6), download_time_s(360e9, 1.0, 300e6)]
    revisit = [revisit_time_s(250, 20.0, 500.0), revisit_time_s(5000, 20.0, 500.0, fusion_factor=2)
               if CFG.fusion_halves_revisit else revisit_time_s(5000, 20.0, 500.0)]
    composed = [revisit[0] + downloads[0], revisit[1] + downloads[0], revisit[1] + downloads[1]]
    aoi = [sens[lv].aoi_s for lv in ALL_LEVELS]
    ok = (downloads == [14400.0, 1200.0]
          and [sens[T].download_time_s, sens[F].download_time_s, sens[S].download_time_s]
          == [14400.0, 14400.0, 1200.0]
          and aoi == composed
          and abs(aoi[0] - 28844) < 1 and abs(aoi[1] - 15122) < 1 and abs(aoi[2] - 1922) < 1)
    verdict(2, ok, "AoI " + " / ".join(f"{a:.1f} s" for a in aoi))


def test_criterion_03_positioning_trend(default_run, verdict):
    rep, elapsed = default_run
    pos = {lv: rep.samples[lv]["positioning_error_m"] for lv in rep.levels}
    mean = {lv: rep.summaries[lv]["positioning_error_m"].mean for lv in rep.levels}
    ratio = mean["traditional"] / mean["signal"]
    between = (paired_lower_bound(pos["traditional"], pos["function"]) > 0
               and paired_lower_bound(pos["function"], pos["signal"]) > 0)
    ok = elapsed < 60.0 and mean["signal"] <= 0.03 and ratio >= 10 and between
    verdict(3, ok, f"{rep.trials} trials in {elapsed:.1f} s; errors "
                   f"{mean['traditional']:.4g} / {mean['function']:.4g} / {mean['signal']:.4g} m, "
                   f"ratio {ratio:.0f}, function strictly between: {between}")


def test_criterion_04_safety_rate(verdict):
    rate = safety_message_rate_bps(30.0, 3.0, 100, 80, 500)
    ok = rate == 680_000 and round(rate / 1e6, 1) == CFG.rate_threshold_mbps
    verdict(4, ok, f"safety rate {rate:.0f} bps, threshold {CFG.rate_threshold_mbps} Mbps")


def test_criterion_05_outage_oracle(verdict):
    gen = np.random.default_rng(2024)
    draws = 100_000
    inside = 0
    for _ in range(100):
        snr = 10 ** gen.uniform(-1, 2)
        bandwidth = 10 ** gen.uniform(5, 8)
        threshold = gen.uniform(0.05, 2.0) * bandwidth * math.log2(1 + snr)
        p = outage_probability(snr, bandwidth, threshold)
        inst = draw_instantaneous_snr(snr, gen, size=draws)
        p_mc = np.mean(bandwidth * np.log2(1 + inst) < threshold)
        sigma = math.sqrt(p * (1 - p) / draws)
        inside += abs(p_mc - p) <= 3 * sigma
    verdict(5, inside >= 97, f"{inside}/100 triples within 3 sigma")


def test_criterion_06_capacity_oracle(verdict):
    rel = {s: abs(ergodic_capacity_bps(s, 1.0) / ergodic_capacity_exp1(s, 1.0) - 1)
           for s in (0.1, 1.0, 10.0)}
    at_one = ergodic_capacity_bps(1.0, 1.0)
    ok = max(rel.values()) <= 1e-6 and round(at_one, 4) == 0.8603
    verdict(6, ok, f"max relative gap {max(rel.values()):.2e}, capacity at SNR 1 = {at_one:.6f}")


def random_anchor(gen, user):
    u = np.asarray(user)
    while True:
        alt = gen.choice([500.0, 1200.0, 20180.0])
        p = gen.normal(size=3)
        p *= (RE + alt) / np.linalg.norm(p)
        los = p - u
        if np.dot(los, u) / (np.linalg.norm(los) * RE) > math.sin(math.radians(5.0)):
            return Anchor(tuple(p), float(gen.uniform(0.01, 2.0)))


def test_criterion_07_navigation_oracle(verdict):
    gen = np.random.default_rng(77)
    worst, batch_worst, monotone, sets = 0.0, 0.0, True, 0
    while sets < 200:
        v = gen.normal(size=3)
        user = tuple(RE * v / np.linalg.norm(v))
        anchors = [random_anchor(gen, user) for _ in range(int(gen.integers(4, 13)))]
        try:
            sol = solution_error(user, anchors)
        except SingularGeometryError:
            continue
        sets += 1
        points = [a.position for a in anchors]
        sigmas = [a.ranging_sigma_m for a in anchors]
        oracle = brute_force_covariance(user, points, sigmas)
        worst = max(worst, frobenius_rel(sol.covariance.tolist(), oracle))
        # the batched route used by the simulator
        h = geometry_matrix(user, anchors)
        info = (h.T @ (h / np.square(sigmas)[:, None]))[None]
        pos, tim, usable = errors_from_information(info, np.array([len(anchors)]), C_LIGHT)
        pos_o, tim_o = errors_from_covariance(oracle)
        batch_worst = max(batch_worst, abs(pos[0] / pos_o - 1), abs(tim[0] / tim_o - 1))
        monotone &= bool(usable[0])
        more = solution_error(user, anchors + [random_anchor(gen, user)])
        monotone &= more.positioning_error_m <= sol.positioning_error_m * (1 + 1e-12)
        monotone &= more.timing_error_s <= sol.timing_error_s * (1 + 1e-12)
        monotone &= bool(np.all(np.linalg.eigvalsh(sol.covariance - more.covariance)
                                >= -1e-9 * np.abs(sol.covariance).max()))
    ok = worst <= 1e-9 and batch_worst <= 1e-9 and monotone
    verdict(7, ok, f"{sets} sets, worst Frobenius gap {worst:.2e}, batched {batch_worst:.2e}, "
                   f"monotone: {monotone}")


AXES = (("outage_probability", False), ("ergodic_capacity_bps", True),
        ("positioning_error_m", False), ("timing_error_s", False))


def test_criterion_08_dominance(default_run, verdict):
    rep, _ = default_run
    n = 1000  # trial seeds do not depend on the trial count, so this is a 10^3 paired run
    smp = {lv: {m: rep.samples[lv][m][:n] for m, _ in AXES} for lv in rep.levels}
    failures = []
    for better, worse in (("function", "traditional"), ("signal", "function")):
        for metric, maximize in AXES:
            a, b = smp[better][metric], smp[worse][metric]
            gain = a - b if maximize else b - a
            if paired_lower_bound(gain, np.zeros_like(gain)) < 0:
                failures.append(f"{metric} {worse}->{better}")
    sens = [level_sensing(lv, CFG) for lv in ALL_LEVELS]
    for m in ("range_resolution_m", "aoi_s"):
        vals = [getattr(s, m) for s in sens]
        if not vals[0] >= vals[1] >= vals[2]:
            failures.append(m)

    def mean(lv, m):
        return float(np.nanmean(rep.samples[lv][m][:n]))

    gains = {
        "outage": mean("traditional", "outage_probability") / mean("signal", "outage_probability"),
        "capacity": mean("signal", "ergodic_capacity_bps")
        / mean("traditional", "ergodic_capacity_bps"),
        "positioning": mean("traditional", "positioning_error_m")
        / mean("signal", "positioning_error_m"),
        "timing": mean("traditional", "timing_error_s") / mean("signal", "timing_error_s"),
        "range": sens[0].range_resolution_m / sens[2].range_resolution_m,
        "aoi": sens[0].aoi_s / sens[2].aoi_s,
    }
    comm = max(gains["outage"], gains["capacity"])
    others = min(gains["positioning"], gains["timing"], gains["range"], gains["aoi"])
    ok = not failures and comm < others
    verdict(8, ok, "signal-level gains " + ", ".join(f"{k} {v:.3g}x" for k, v in gains.items())
            + (f"; not dominated: {failures}" if failures else ""))


def test_criterion_09_determinism(tmp_path, verdict):
    outs = []
    for workers in (1, 2):
        out = tmp_path / f"w{workers}"
        code = main(["--trials", "24", "--seed", "42", "--workers", str(workers),
                     "--out", str(out)])
        assert code == 0
        outs.append({name: (out / name).read_bytes()
                     for name in ("report.csv", "report.json", "radar.svg")})
    same = [name for name in outs[0] if outs[0][name] == outs[1][name]]
    verdict(9, len(same) == 3, f"byte-identical across 1 and 2 workers: {', '.join(same)}")


def visible_count_test(count, draws, gen):
    """z statistic of the mean visible count at a 20 degree mask against N (1 - cos lambda) / 2."""
    p = (1 - math.cos(math.radians(visibility_central_angle_deg(500.0, 20.0)))) / 2
    users = sample_uniform_sphere(draws, RE, gen).points
    counts = np.empty(draws)
    for i in range(draws):
        el, _ = elevation_matrix(users[i:i + 1], sample_shell(count, 500.0, gen).points)
        counts[i] = np.count_nonzero(el >= 20.0)
    expected = count * p
    z = (counts.mean() - expected) / math.sqrt(count * p * (1 - p) / draws)
    return counts.mean(), expected, z


def test_criterion_10_geometry_statistics(verdict):
    gen = np.random.default_rng(10)
    pts = sample_uniform_sphere(10_000, RE + 500.0, gen).points
    r = np.linalg.norm(pts, axis=1)
    p_z = stats.kstest(pts[:, 2] / r, stats.uniform(loc=-1, scale=2).cdf).pvalue
    phi = np.mod(np.arctan2(pts[:, 1], pts[:, 0]), 2 * np.pi)
    p_phi = stats.kstest(phi, stats.uniform(loc=0, scale=2 * np.pi).cdf).pvalue
    crit = stats.norm.ppf(1 - 0.01 / 2)
    m250, e250, z250 = visible_count_test(250, 10_000, gen)
    m5000, e5000, z5000 = visible_count_test(5000, 10_000, gen)
    ok = (p_z > 0.01 and p_phi > 0.01 and abs(z250) < crit and abs(z5000) < crit
          and e250 == pytest.approx(1.674, abs=1e-3) and round(e5000 / e250) == 20)
    verdict(10, ok, f"KS p {p_z:.3f}/{p_phi:.3f}; visible {m250:.3f} (expect {e250:.3f}), "
                    f"{m5000:.2f} (expect {e5000:.2f})")

"""CSV / JSON summaries and the radar chart of a :class:`MetricsReport`.

Every emitter is a pure function of the report: no timestamps, floats as
shortest round-trip decimals (``repr``), ``\\n`` line endings.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from xml.sax.saxutils import escape

from .errors import InvalidParameterError, ReportIOError
from .simulator import METRICS, MetricsReport

CSV_COLUMNS = ("level", "metric", "mean", "stderr", "ci_low", "ci_high")
FORMATS = ("csv", "json")

LEVEL_LABELS = {
    "traditional": "Traditional",
    "function": "Function-level integration",
    "signal": "Signal-level integration",
}


def _write(path, text: str) -> None:
    path = Path(path)
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise ReportIOError(f"cannot write {path}: {exc.strerror or exc}") from exc


def _num(x: float) -> str:
    return repr(float(x))


def report_csv(report: MetricsReport) -> str:
    lines = [",".join(CSV_COLUMNS)]
    for level in report.levels:
        for metric in METRICS:
            s = report.summaries[level][metric]
            lines.append(",".join((level, metric, _num(s.mean), _num(s.stderr),
                                   _num(s.ci_low), _num(s.ci_high))))
    return "\n".join(lines) + "\n"


def _json_float(x: float):
    return None if not math.isfinite(x) else float(x)


def report_json(report: MetricsReport) -> str:
    """Nested ``levels -> metric -> {mean, stderr, ci_low, ci_high, n}``; NaN becomes ``null``."""
    levels = {}
    for level in report.levels:
        levels[level] = {}
        for metric in METRICS:
            s = report.summaries[level][metric]
            levels[level][metric] = {
                "mean": _json_float(s.mean),
                "stderr": _json_float(s.stderr),
                "ci_low": _json_float(s.ci_low),
                "ci_high": _json_float(s.ci_high),
                "n": s.n,
            }
    doc = {
        "master_seed": report.master_seed,
        "trials": report.trials,
        "config_fingerprint": report.config_fingerprint,
        "levels": levels,
    }
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def emit_report(report: MetricsReport, fmt: str, path) -> None:
    if fmt == "csv":
        _write(path, report_csv(report))
    elif fmt == "json":
        _write(path, report_json(report))
    else:
        raise InvalidParameterError(f"format must be one of {FORMATS}, got {fmt!r}")


# --------------------------------------------------------------------------- radar chart

COMM_COLOR = "#d62728"
NAV_COLOR = "#1f77b4"
SENSING_COLOR = "#9467bd"


@dataclass(frozen=True)
class RadarAxis:
    metric: str
    label: str
    maximize: bool
    color: str


DEFAULT_AXES = (
    RadarAxis("outage_probability", "Outage probability", False, COMM_COLOR),
    RadarAxis("ergodic_capacity_bps", "Ergodic capacity", True, COMM_COLOR),
    RadarAxis("positioning_error_m", "Positioning error", False, NAV_COLOR),
    RadarAxis("timing_error_s", "Timing error", False, NAV_COLOR),
    RadarAxis("range_resolution_m", "Range resolution", False, SENSING_COLOR),
    RadarAxis("aoi_s", "Age of information", False, SENSING_COLOR),
)

DEFAULT_LEVEL_COLORS = (
    ("traditional", "#7f7f7f"),
    ("function", "#ff7f0e"),
    ("signal", "#2ca02c"),
)


@dataclass(frozen=True)
class RadarChartSpec:
    """Six spokes, gains relative to an anchor level, compressed beyond ``linear_limit``.

    The gain on a spoke is ``value / anchor`` for maximized metrics and
    ``anchor / value`` for minimized ones, so "better" always points
    outward. Gains up to ``linear_limit`` map to the same radius; beyond it
    each further decade adds one radius unit. The anchor is the Traditional
    level, or the first listed level when Traditional is absent.
    """

    axes: tuple = DEFAULT_AXES
    level_colors: tuple = DEFAULT_LEVEL_COLORS
    anchor_level: str = "traditional"
    linear_limit: float = 10.0
    size_px: int = 640
    rings: int = 4

    def __post_init__(self):
        if len(self.axes) != 6:
            raise InvalidParameterError("a radar chart has exactly six axes")
        if not self.linear_limit >= 1.0:
            raise InvalidParameterError("linear_limit must be >= 1")


def compress_gain(gain: float, linear_limit: float = 10.0) -> float:
    if gain <= linear_limit:
        return gain
    return linear_limit + math.log10(gain / linear_limit)


def _gain(value: float, anchor: float, maximize: bool) -> float:
    # a ratio that cannot be formed (NaN, zero or negative) is drawn as "no change"
    if not (math.isfinite(value) and math.isfinite(anchor)) or value <= 0 or anchor <= 0:
        return 1.0
    return value / anchor if maximize else anchor / value


def _anchor(report: MetricsReport, spec: RadarChartSpec) -> str:
    return spec.anchor_level if spec.anchor_level in report.levels else report.levels[0]


def radar_radii(report: MetricsReport, spec: RadarChartSpec = RadarChartSpec()) -> dict:
    """Compressed gain per level and axis, ``{level: [r_0, ..., r_5]}``."""
    if not report.levels:
        raise InvalidParameterError("report has no levels")
    base = report.summaries[_anchor(report, spec)]
    out = {}
    for level in report.levels:
        row = report.summaries[level]
        out[level] = [compress_gain(_gain(row[a.metric].mean, base[a.metric].mean, a.maximize),
                                    spec.linear_limit) for a in spec.axes]
    return out


def _f(x: float) -> str:
    return f"{x:.2f}"


def _point(cx, cy, radius, k):
    angle = math.radians(-90.0 + 60.0 * k)
    return cx + radius * math.cos(angle), cy + radius * math.sin(angle)


def radar_svg(report: MetricsReport, spec: RadarChartSpec = RadarChartSpec()) -> str:
    radii = radar_radii(report, spec)
    r_max = max(1.0, max(max(r) for r in radii.values()))
    size = spec.size_px
    cx = cy = size / 2.0
    outer = size * 0.32
    colors = dict(spec.level_colors)
    fallback = ("#17becf", "#bcbd22", "#8c564b")

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{size}" height="{size}" fill="#ffffff"/>',
    ]
    out.append('<g id="grid" fill="none" stroke="#cccccc" stroke-width="1">')
    for i in range(1, spec.rings + 1):
        rr = outer * i / spec.rings
        pts = " ".join(f"{_f(x)},{_f(y)}" for x, y in (_point(cx, cy, rr, k) for k in range(6)))
        out.append(f'<polygon points="{pts}"/>')
    for k in range(6):
        x, y = _point(cx, cy, outer, k)
        out.append(f'<line x1="{_f(cx)}" y1="{_f(cy)}" x2="{_f(x)}" y2="{_f(y)}"/>')
    out.append("</g>")

    out.append('<g id="axis-labels">')
    for k, axis in enumerate(spec.axes):
        x, y = _point(cx, cy, outer + 28.0, k)
        anchor = "middle" if abs(x - cx) < 1.0 else ("start" if x > cx else "end")
        out.append(f'<text x="{_f(x)}" y="{_f(y + 4.0)}" text-anchor="{anchor}" '
                   f'fill="{axis.color}">{escape(axis.label)}</text>')
    out.append("</g>")

    out.append('<g id="levels">')
    for j, level in enumerate(report.levels):
        color = colors.get(level, fallback[j % len(fallback)])
        pts = " ".join(f"{_f(x)},{_f(y)}" for x, y in
                       (_point(cx, cy, outer * r / r_max, k) for k, r in enumerate(radii[level])))
        out.append(f'<polygon data-level="{escape(level)}" points="{pts}" fill="{color}" '
                   f'fill-opacity="0.15" stroke="{color}" stroke-width="2"/>')
    out.append("</g>")

    out.append('<g id="legend">')
    for j, level in enumerate(report.levels):
        color = colors.get(level, fallback[j % len(fallback)])
        y = 20.0 + 18.0 * j
        out.append(f'<rect x="16" y="{_f(y - 10.0)}" width="12" height="12" fill="{color}"/>')
        out.append(f'<text x="34" y="{_f(y)}">{escape(LEVEL_LABELS.get(level, level))}</text>')
    anchor = _anchor(report, spec)
    out.append(f'<text x="16" y="{_f(size - 16.0)}" fill="#555555">outer ring: radius '
               f'{r_max:.4g} relative to {escape(LEVEL_LABELS.get(anchor, anchor))} '
               f'(gain, linear to {spec.linear_limit:g}x, +1 per further decade)</text>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_radar_svg(report: MetricsReport, spec: RadarChartSpec, path) -> None:
    _write(path, radar_svg(report, spec))

"""Deterministic SVG rate-quality plots.

One figure per metric: rate on x, metric on y, one polyline with circle
markers per codec, a legend, and for wAP a dashed horizontal line at the
uncompressed-predictions reference score.  The SVG is assembled from
plain strings with fixed number formatting and fixed element order, so
identical inputs give byte-identical files.
"""

from __future__ import annotations

import logging
import math
from pathlib import Path

from vcmbench.errors import ConfigError
from vcmbench.harness.bdreport import SeriesBundle, collect_series
from vcmbench.harness.config import ExperimentConfig

log = logging.getLogger("vcmbench.plots")

WIDTH = 640.0
HEIGHT = 480.0
MARGIN_LEFT = 66.0
MARGIN_RIGHT = 18.0
MARGIN_TOP = 18.0
MARGIN_BOTTOM = 48.0

PALETTE = (
    "#1f77b4",
    "#d62728",
    "#2ca02c",
    "#9467bd",
    "#ff7f0e",
    "#8c564b",
    "#e377c2",
    "#7f7f7f",
)

_AXIS_LABELS = {"psnr": "psnr (dB)", "ssim": "ssim", "wap": "wap"}


def _fmt(value: float) -> str:
    return f"{value:.2f}"


def _tick_label(value: float) -> str:
    return f"{round(value, 10):g}"


def nice_ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    """Round tick positions covering [lo, hi] at a 1/2/5 step."""
    span = hi - lo
    if span <= 0:
        return [lo]
    raw = span / max(count - 1, 1)
    magnitude = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 5.0, 10.0):
        step = mult * magnitude
        if step >= raw:
            break
    first = math.ceil(lo / step) * step
    ticks = []
    t = first
    while t <= hi + step * 1e-9:
        ticks.append(round(t, 12))
        t += step
    return ticks


def _data_range(values: list[float]) -> tuple[float, float]:
    lo, hi = min(values), max(values)
    if hi == lo:
        pad = abs(lo) * 0.05 or 0.5
    else:
        pad = (hi - lo) * 0.05
    return lo - pad, hi + pad


def render_figure(
    metric: str,
    per_codec: dict[str, list],
    codec_order: list[str],
    rate_unit: str,
    reference: float | None = None,
    reference_label: str = "uncompressed",
) -> str:
    """Render one rate-quality figure to an SVG string."""
    xs = [p.rate for codec in codec_order for p in per_codec.get(codec, [])]
    ys = [p.quality for codec in codec_order for p in per_codec.get(codec, [])]
    if reference is not None:
        ys.append(reference)
    if not xs:
        raise ConfigError(f"nothing to plot for metric {metric!r}")
    x_lo, x_hi = _data_range(xs)
    y_lo, y_hi = _data_range(ys)
    plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM

    def sx(x: float) -> float:
        return MARGIN_LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w

    def sy(y: float) -> float:
        return MARGIN_TOP + (y_hi - y) / (y_hi - y_lo) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH:g}" '
        f'height="{HEIGHT:g}" viewBox="0 0 {WIDTH:g} {HEIGHT:g}">',
        f'<rect width="{WIDTH:g}" height="{HEIGHT:g}" fill="#ffffff"/>',
    ]

    # grid and ticks
    for x in nice_ticks(x_lo, x_hi):
        px = _fmt(sx(x))
        parts.append(
            f'<line x1="{px}" y1="{_fmt(MARGIN_TOP)}" x2="{px}" '
            f'y2="{_fmt(MARGIN_TOP + plot_h)}" stroke="#dddddd" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{px}" y="{_fmt(MARGIN_TOP + plot_h + 16)}" font-family="sans-serif" '
            f'font-size="11" text-anchor="middle" fill="#333333">{_tick_label(x)}</text>'
        )
    for y in nice_ticks(y_lo, y_hi):
        py = _fmt(sy(y))
        parts.append(
            f'<line x1="{_fmt(MARGIN_LEFT)}" y1="{py}" x2="{_fmt(MARGIN_LEFT + plot_w)}" '
            f'y2="{py}" stroke="#dddddd" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{_fmt(MARGIN_LEFT - 6)}" y="{py}" font-family="sans-serif" '
            f'font-size="11" text-anchor="end" dominant-baseline="middle" '
            f'fill="#333333">{_tick_label(y)}</text>'
        )

    # axes frame
    parts.append(
        f'<rect x="{_fmt(MARGIN_LEFT)}" y="{_fmt(MARGIN_TOP)}" width="{_fmt(plot_w)}" '
        f'height="{_fmt(plot_h)}" fill="none" stroke="#333333" stroke-width="1"/>'
    )

    # reference line
    if reference is not None:
        py = _fmt(sy(reference))
        parts.append(
            f'<line x1="{_fmt(MARGIN_LEFT)}" y1="{py}" x2="{_fmt(MARGIN_LEFT + plot_w)}" '
            f'y2="{py}" stroke="#000000" stroke-width="1.5" stroke-dasharray="6 4"/>'
        )
        parts.append(
            f'<text x="{_fmt(MARGIN_LEFT + 6)}" y="{_fmt(sy(reference) - 5)}" '
            f'font-family="sans-serif" font-size="11" fill="#000000">'
            f"{reference_label}</text>"
        )

    # one polyline + markers per codec
    for idx, codec in enumerate(codec_order):
        points = per_codec.get(codec, [])
        if not points:
            continue
        color = PALETTE[idx % len(PALETTE)]
        coords = " ".join(f"{_fmt(sx(p.rate))},{_fmt(sy(p.quality))}" for p in points)
        parts.append(
            f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="2"/>'
        )
        for p in points:
            parts.append(
                f'<circle cx="{_fmt(sx(p.rate))}" cy="{_fmt(sy(p.quality))}" r="3.5" '
                f'fill="{color}"/>'
            )

    # legend, top-right inside the frame
    legend_x = MARGIN_LEFT + plot_w - 150
    legend_y = MARGIN_TOP + 14
    for idx, codec in enumerate(codec_order):
        if codec not in per_codec or not per_codec[codec]:
            continue
        color = PALETTE[idx % len(PALETTE)]
        y = legend_y + 16 * idx
        parts.append(
            f'<line x1="{_fmt(legend_x)}" y1="{_fmt(y - 4)}" x2="{_fmt(legend_x + 22)}" '
            f'y2="{_fmt(y - 4)}" stroke="{color}" stroke-width="2"/>'
        )
        parts.append(
            f'<text x="{_fmt(legend_x + 28)}" y="{_fmt(y)}" font-family="sans-serif" '
            f'font-size="12" fill="#333333">{codec}</text>'
        )

    # axis titles
    x_title = "rate (bpp)" if rate_unit == "bpp" else "rate (total bits)"
    y_title = _AXIS_LABELS.get(metric, metric)
    parts.append(
        f'<text x="{_fmt(MARGIN_LEFT + plot_w / 2)}" y="{_fmt(HEIGHT - 10)}" '
        f'font-family="sans-serif" font-size="13" text-anchor="middle" '
        f'fill="#333333">{x_title}</text>'
    )
    parts.append(
        f'<text x="16" y="{_fmt(MARGIN_TOP + plot_h / 2)}" font-family="sans-serif" '
        f'font-size="13" text-anchor="middle" fill="#333333" '
        f'transform="rotate(-90 16 {_fmt(MARGIN_TOP + plot_h / 2)})">{y_title}</text>'
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def cmd_plot(config: ExperimentConfig, bundle: SeriesBundle | None = None) -> list[Path]:
    """Write one fig_<metric>.svg per enabled metric."""
    if bundle is None:
        bundle = collect_series(config)
    codec_order = [spec.name for spec in config.codecs]
    written = []
    for metric in config.metrics:
        reference = bundle.reference_wap if metric == "wap" else None
        svg = render_figure(
            metric.split(":", 1)[-1] if metric.startswith("external:") else metric,
            bundle.series[metric],
            codec_order,
            config.rate_unit,
            reference,
        )
        out = config.output_dir / f"fig_{metric.replace(':', '_')}.svg"
        out.write_text(svg, encoding="utf-8")
        written.append(out)
        log.info("wrote %s", out)
    return written

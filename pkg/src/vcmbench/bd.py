"""Rate-distortion curve modeling and generalized Bjontegaard delta rate.

The delta-rate calculation works over an arbitrary quality axis (PSNR,
SSIM, VMAF, wAP, ...) used raw, without transformation.  log10(rate) is
modeled as a function of quality by either a least-squares cubic
polynomial (``cubic_poly``, the classic variant) or monotone piecewise
cubic Hermite interpolation (``pchip``, the robust default).  Both models
are integrated over the overlapping quality interval with a fixed
1000-subinterval composite Simpson rule; the quadrature error this
introduces is orders of magnitude below the 0.01-percentage-point
tolerances used by the test suite.

Negative delta-rate means the test codec needs less rate than the anchor
for the same quality.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.interpolate import PchipInterpolator

from vcmbench.errors import CurveError

INTERP_MODES = ("cubic_poly", "pchip")
SIMPSON_SUBINTERVALS = 1000


@dataclass(frozen=True)
class RdPoint:
    """One (rate, quality) operating point of a codec sweep."""

    rate: float
    quality: float
    label: str = ""

    def __post_init__(self):
        if not (math.isfinite(self.rate) and self.rate > 0):
            raise ValueError(f"rate must be positive and finite, got {self.rate}")
        if not math.isfinite(self.quality):
            raise ValueError(f"quality must be finite, got {self.quality}")


@dataclass(frozen=True)
class RdCurve:
    codec_name: str
    metric_name: str
    points: tuple[RdPoint, ...]

    def __post_init__(self):
        points = tuple(self.points)
        object.__setattr__(self, "points", points)
        if len(points) < 2:
            raise ValueError(f"curve {self.codec_name}/{self.metric_name} needs >= 2 points")
        rates = [p.rate for p in points]
        if any(b <= a for a, b in zip(rates, rates[1:])):
            raise ValueError(
                f"curve {self.codec_name}/{self.metric_name} must have strictly "
                f"increasing rate, got {rates}"
            )

    @property
    def rates(self) -> np.ndarray:
        return np.array([p.rate for p in self.points])

    @property
    def qualities(self) -> np.ndarray:
        return np.array([p.quality for p in self.points])

    def replace_points(self, points) -> "RdCurve":
        return RdCurve(self.codec_name, self.metric_name, tuple(points))


@dataclass(frozen=True)
class BdReport:
    """Delta-rate table against one anchor: one row per codec, one column
    per metric, with the per-column minimum flagged as best."""

    anchor_name: str
    metrics: tuple[str, ...]
    rows: dict[tuple[str, str], float]
    codec_order: tuple[str, ...]
    best: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        best = {}
        for metric in self.metrics:
            column = {c: v for (c, m), v in self.rows.items() if m == metric}
            if not column:
                raise ValueError(f"metric {metric} has no rows")
            best[metric] = min(sorted(column), key=lambda c: column[c])
        object.__setattr__(self, "best", best)


def lagrangian_cost(rate: float, distortion: float, lam: float) -> float:
    """Scalar cost balancing rate against distortion: rate + lam * distortion."""
    if rate < 0:
        raise ValueError(f"rate must be non-negative, got {rate}")
    if distortion < 0:
        raise ValueError(f"distortion must be non-negative, got {distortion}")
    if lam <= 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    return rate + lam * distortion


def clean_curve(curve: RdCurve, mode: str = "strict") -> RdCurve:
    """Enforce quality monotonicity along increasing rate.

    ``strict`` raises on any non-increase; ``pareto`` drops points that
    are dominated in (rate, quality) and returns the monotone subset.
    """
    if mode not in ("strict", "pareto"):
        raise ValueError(f"unknown clean mode {mode!r}")
    qualities = [p.quality for p in curve.points]
    if mode == "strict":
        for a, b in zip(qualities, qualities[1:]):
            if b <= a:
                raise CurveError(
                    f"curve {curve.codec_name}/{curve.metric_name} is not strictly "
                    f"increasing in quality: {qualities}"
                )
        return curve
    survivors = []
    best = -math.inf
    for point in curve.points:
        if point.quality > best:
            survivors.append(point)
            best = point.quality
    if len(survivors) < 2:
        raise CurveError(
            f"curve {curve.codec_name}/{curve.metric_name} has fewer than 2 points "
            "after pareto cleaning"
        )
    return curve.replace_points(survivors)


def _check_bd_pair(anchor: RdCurve, test: RdCurve) -> None:
    if anchor.metric_name != test.metric_name:
        raise CurveError(
            f"metric mismatch: {anchor.metric_name} (anchor) vs {test.metric_name}"
        )
    for curve in (anchor, test):
        if len(curve.points) < 4:
            raise CurveError(
                f"curve {curve.codec_name}/{curve.metric_name} has "
                f"{len(curve.points)} points, need >= 4"
            )


def _require_cleaned(curve: RdCurve, axis: np.ndarray, what: str) -> None:
    diffs = np.diff(axis)
    if np.any(diffs == 0):
        raise CurveError(f"curve {curve.codec_name}/{curve.metric_name} has duplicate {what}")
    if np.any(diffs < 0):
        raise CurveError(
            f"curve {curve.codec_name}/{curve.metric_name} is not increasing in {what}; "
            "run clean_curve first"
        )


def _fit(x: np.ndarray, y: np.ndarray, interp: str):
    if interp == "cubic_poly":
        coeffs = np.polyfit(x, y, 3)
        return lambda grid: np.polyval(coeffs, grid)
    if interp == "pchip":
        return PchipInterpolator(x, y)
    raise ValueError(f"unknown interpolation mode {interp!r}; expected one of {INTERP_MODES}")


def _overlap(a: np.ndarray, b: np.ndarray) -> tuple[float, float]:
    lo = max(a.min(), b.min())
    hi = min(a.max(), b.max())
    if hi <= lo:
        raise CurveError(f"quality intervals do not overlap: [{lo}, {hi}]")
    return float(lo), float(hi)


def _simpson_mean(fn, lo: float, hi: float, n: int = SIMPSON_SUBINTERVALS) -> float:
    """Mean of fn over [lo, hi] via composite Simpson with n subintervals."""
    grid = np.linspace(lo, hi, n + 1)
    values = np.asarray(fn(grid), dtype=np.float64)
    weights = np.ones(n + 1)
    weights[1:-1:2] = 4.0
    weights[2:-1:2] = 2.0
    integral = (hi - lo) / (3.0 * n) * float(np.dot(weights, values))
    return integral / (hi - lo)


def bd_rate(anchor: RdCurve, test: RdCurve, interp: str = "pchip") -> float:
    """Average rate difference of ``test`` against ``anchor`` in percent
    at identical quality, integrated over the shared quality interval."""
    _check_bd_pair(anchor, test)
    _require_cleaned(anchor, anchor.qualities, "quality values")
    _require_cleaned(test, test.qualities, "quality values")
    fit_anchor = _fit(anchor.qualities, np.log10(anchor.rates), interp)
    fit_test = _fit(test.qualities, np.log10(test.rates), interp)
    lo, hi = _overlap(anchor.qualities, test.qualities)
    delta = _simpson_mean(fit_test, lo, hi) - _simpson_mean(fit_anchor, lo, hi)
    return (10.0**delta - 1.0) * 100.0


def bd_quality(anchor: RdCurve, test: RdCurve, interp: str = "pchip") -> float:
    """Average vertical quality gap of ``test`` over ``anchor`` across the
    shared log10(rate) interval."""
    _check_bd_pair(anchor, test)
    log_anchor = np.log10(anchor.rates)
    log_test = np.log10(test.rates)
    _require_cleaned(anchor, log_anchor, "rates")
    _require_cleaned(test, log_test, "rates")
    fit_anchor = _fit(log_anchor, anchor.qualities, interp)
    fit_test = _fit(log_test, test.qualities, interp)
    lo, hi = _overlap(log_anchor, log_test)
    return _simpson_mean(fit_test, lo, hi) - _simpson_mean(fit_anchor, lo, hi)


def build_bd_table(
    anchor_curves: dict[str, RdCurve],
    test_curves: dict[str, dict[str, RdCurve]],
    interp: str = "pchip",
) -> BdReport:
    """Delta-rate table: ``anchor_curves`` maps metric -> anchor curve,
    ``test_curves`` maps codec -> metric -> curve.  The anchor must not
    appear among the test codecs; its self-delta is checked to vanish."""
    if not anchor_curves:
        raise ValueError("anchor_curves is empty")
    anchor_names = {c.codec_name for c in anchor_curves.values()}
    if len(anchor_names) != 1:
        raise ValueError(f"anchor curves carry mixed codec names: {sorted(anchor_names)}")
    anchor_name = anchor_names.pop()
    if anchor_name in test_curves:
        raise ValueError(f"anchor {anchor_name!r} compared against itself")
    metrics = tuple(anchor_curves)
    rows: dict[tuple[str, str], float] = {}
    for metric, curve in anchor_curves.items():
        self_delta = bd_rate(curve, curve.replace_points(curve.points), interp)
        if abs(self_delta) > 1e-9:
            raise CurveError(f"anchor self delta-rate is {self_delta}, expected 0")
    for codec, curves in test_curves.items():
        for metric in metrics:
            if metric not in curves:
                raise CurveError(f"codec {codec} has no curve for metric {metric}")
            try:
                rows[(codec, metric)] = bd_rate(anchor_curves[metric], curves[metric], interp)
            except CurveError as exc:
                raise CurveError(f"[codec={codec}, metric={metric}] {exc}") from exc
    return BdReport(anchor_name, metrics, rows, tuple(test_curves))


def write_bd_table(report: BdReport, csv_path) -> None:
    """Write the table as ``codec,<metric...>,best_<metric...>`` with
    delta-rate percentages at 1 decimal and 0/1 best flags."""
    path = Path(csv_path)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(
            ["codec", *report.metrics, *(f"best_{m}" for m in report.metrics)]
        )
        for codec in report.codec_order:
            values = [f"{report.rows[(codec, m)]:.1f}" for m in report.metrics]
            flags = [str(int(report.best[m] == codec)) for m in report.metrics]
            writer.writerow([codec, *values, *flags])

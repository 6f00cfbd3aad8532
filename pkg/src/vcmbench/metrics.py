"""Perceptual quality metrics (PSNR, SSIM) and dataset-level aggregation.

PSNR pools squared error over all planes of whatever color space is
presented (a ``luma_only`` flag restricts it to the first plane).  SSIM is
single-scale on the luma plane: 11x11 Gaussian window with sigma 1.5
truncated and renormalized to sum 1, K1=0.01, K2=0.03, and only fully
valid (non-padded) window positions contribute.

Dataset aggregation: SSIM and ingested external metrics average
arithmetically; PSNR is recomputed from pooled per-image MSE so images
with infinite per-image PSNR contribute zero error instead of poisoning
the mean.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np
from scipy.ndimage import correlate1d

from vcmbench.images import ColorSpace, PlanarImage, luma_plane

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03

#: Distinguished marker for the PSNR of identical images.
PSNR_INF = math.inf


def _check_comparable(ref: PlanarImage, dist: PlanarImage) -> None:
    if not ref.same_geometry(dist):
        raise ValueError(
            "images are not comparable: "
            f"{ref.width}x{ref.height}/{ref.bit_depth}bit/{ref.color_space.value} vs "
            f"{dist.width}x{dist.height}/{dist.bit_depth}bit/{dist.color_space.value}"
        )


def mse(ref: PlanarImage, dist: PlanarImage, *, luma_only: bool = False) -> float:
    """Mean squared error pooled over all planes' samples."""
    _check_comparable(ref, dist)
    planes = [0] if luma_only else range(len(ref.planes))
    sse = 0.0
    n = 0
    for i in planes:
        a = ref.planes[i].astype(np.float64)
        b = dist.planes[i].astype(np.float64)
        sse += float(np.sum((a - b) ** 2))
        n += a.size
    return sse / n


def psnr(ref: PlanarImage, dist: PlanarImage, *, luma_only: bool = False) -> float:
    """PSNR in dB; returns ``PSNR_INF`` for identical images."""
    err = mse(ref, dist, luma_only=luma_only)
    if err == 0.0:
        return PSNR_INF
    return 10.0 * math.log10(ref.max_value**2 / err)


def _gaussian_window(size: int, sigma: float) -> np.ndarray:
    offsets = np.arange(size, dtype=np.float64) - (size - 1) / 2.0
    w = np.exp(-(offsets**2) / (2.0 * sigma**2))
    return w / w.sum()


def _valid_filter(img: np.ndarray, window: np.ndarray) -> np.ndarray:
    # Constant-mode padding only contaminates the border band, which the
    # crop below removes, so the result equals a 'valid' convolution.
    r = len(window) // 2
    out = correlate1d(img, window, axis=0, mode="constant")
    out = correlate1d(out, window, axis=1, mode="constant")
    return out[r:-r, r:-r]


def ssim(ref: PlanarImage, dist: PlanarImage, *, channel_mode: str = "luma") -> float:
    """Single-scale SSIM in [-1, 1].

    ``channel_mode="luma"`` (default) evaluates the luma plane only;
    ``"channel_mean"`` averages per-channel SSIM over equal-size planes.
    """
    _check_comparable(ref, dist)
    if min(ref.width, ref.height) < SSIM_WINDOW:
        raise ValueError(
            f"image {ref.width}x{ref.height} smaller than the {SSIM_WINDOW}x{SSIM_WINDOW} window"
        )
    if channel_mode == "luma":
        pairs = [(luma_plane(ref), luma_plane(dist))]
    elif channel_mode == "channel_mean":
        if ref.color_space is ColorSpace.YCBCR420:
            raise ValueError("channel_mean mode requires equal-size planes")
        pairs = [
            (a.astype(np.float64), b.astype(np.float64))
            for a, b in zip(ref.planes, dist.planes)
        ]
    else:
        raise ValueError(f"unknown channel_mode {channel_mode!r}")
    window = _gaussian_window(SSIM_WINDOW, SSIM_SIGMA)
    values = [_ssim_plane(a, b, window, ref.max_value) for a, b in pairs]
    return float(np.mean(values))


def _ssim_plane(a: np.ndarray, b: np.ndarray, window: np.ndarray, max_value: int) -> float:
    c1 = (SSIM_K1 * max_value) ** 2
    c2 = (SSIM_K2 * max_value) ** 2
    mu_a = _valid_filter(a, window)
    mu_b = _valid_filter(b, window)
    var_a = _valid_filter(a * a, window) - mu_a * mu_a
    var_b = _valid_filter(b * b, window) - mu_b * mu_b
    cov = _valid_filter(a * b, window) - mu_a * mu_b
    num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)
    den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2)
    return float(np.mean(num / den))


@dataclass(frozen=True)
class MetricScore:
    """Per-image values of one metric plus the dataset aggregate."""

    metric_name: str
    per_image: dict[str, float] = field(default_factory=dict)
    aggregate: float = 0.0

    def __post_init__(self):
        if not self.per_image:
            raise ValueError("per_image must be non-empty")
        if self.metric_name == "ssim":
            bad = {k: v for k, v in self.per_image.items() if not -1.0 <= v <= 1.0}
            if bad:
                raise ValueError(f"SSIM values outside [-1, 1]: {bad}")
        if self.metric_name == "psnr":
            bad = {k: v for k, v in self.per_image.items() if not (v >= 0.0 or v == PSNR_INF)}
            if bad:
                raise ValueError(f"negative PSNR values: {bad}")

    @classmethod
    def from_per_image(cls, metric_name: str, per_image: Mapping[str, float], **kwargs):
        values = dict(per_image)
        return cls(metric_name, values, aggregate_metric(values, metric_name, **kwargs))


def aggregate_metric(
    per_image: Mapping[str, float],
    metric_name: str,
    *,
    max_value: int = 255,
    sample_counts: Mapping[str, int] | None = None,
) -> float:
    """Pool per-image metric values into one dataset-level scalar.

    PSNR values are converted back to per-image MSE (infinite PSNR maps
    to zero MSE), pooled, and re-expressed in dB.  Images are weighted
    equally unless ``sample_counts`` gives their sample totals.  Every
    other metric is averaged arithmetically.
    """
    if not per_image:
        raise ValueError("cannot aggregate an empty score set")
    if metric_name != "psnr":
        return float(np.mean(list(per_image.values())))
    peak = float(max_value) ** 2
    total_sse = 0.0
    total_n = 0
    for image_id, value in per_image.items():
        n = 1 if sample_counts is None else sample_counts[image_id]
        img_mse = 0.0 if value == PSNR_INF else peak * 10.0 ** (-value / 10.0)
        total_sse += img_mse * n
        total_n += n
    pooled = total_sse / total_n
    if pooled == 0.0:
        return PSNR_INF
    return 10.0 * math.log10(peak / pooled)


def ingest_external_metric(csv_path, metric_name: str) -> MetricScore:
    """Load per-image values of an externally computed metric.

    Expects a UTF-8 CSV with the mandatory header ``image_id,value``.
    """
    path = Path(csv_path)
    per_image: dict[str, float] = {}
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None or [c.strip() for c in header] != ["image_id", "value"]:
            raise ValueError(f"{path}: expected header 'image_id,value', got {header}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise ValueError(f"{path}:{lineno}: malformed row {row}")
            image_id = row[0].strip()
            try:
                value = float(row[1])
            except ValueError:
                raise ValueError(f"{path}:{lineno}: non-numeric value {row[1]!r}") from None
            if not math.isfinite(value):
                raise ValueError(f"{path}:{lineno}: non-finite value {row[1]!r}")
            if image_id in per_image:
                raise ValueError(f"{path}:{lineno}: duplicate image_id {image_id!r}")
            per_image[image_id] = value
    if not per_image:
        raise ValueError(f"{path}: no data rows")
    return MetricScore(metric_name, per_image, aggregate_metric(per_image, metric_name))

"""Curve assembly and delta-rate reporting.

Per (codec, q) the rate is the mean per-image bits-per-pixel (or mean
total bits under ``rate_unit: total-bits``) over completed ledger rows,
and each quality metric is pooled with ``aggregate_metric`` over the
same images, so rate and quality weight images identically.  PSNR/SSIM
curves must already be monotone (strict cleaning); wAP and external
metrics saturate, so they get pareto cleaning by default.
"""

from __future__ import annotations

import csv
import logging
from pathlib import Path

from vcmbench.bd import INTERP_MODES, BdReport, RdCurve, RdPoint, clean_curve
from vcmbench.bd import build_bd_table as _build_bd_table
from vcmbench.bd import write_bd_table
from vcmbench.errors import ConfigError, CurveError
from vcmbench.harness.config import ExperimentConfig
from vcmbench.harness.ledger import LedgerRow, read_completed_rows
from vcmbench.harness.score import WAP_SCORES_FILENAME, read_wap_scores
from vcmbench.harness.sweep import LEDGER_FILENAME
from vcmbench.metrics import PSNR_INF, aggregate_metric, ingest_external_metric

log = logging.getLogger("vcmbench.bdreport")

STRICT_CLEAN_METRICS = ("psnr", "ssim")


def clean_mode_for(metric_name: str) -> str:
    return "strict" if metric_name in STRICT_CLEAN_METRICS else "pareto"


class SeriesBundle:
    """Raw per-metric, per-codec point series plus bookkeeping."""

    def __init__(
        self,
        series: dict[str, dict[str, list[RdPoint]]],
        complete_rows: int,
        reference_wap: float | None,
    ):
        self.series = series
        self.complete_rows = complete_rows
        self.reference_wap = reference_wap


def _rate_of(rows: list[LedgerRow], rate_unit: str) -> float:
    if rate_unit == "bpp":
        return sum(r.bits / r.pixels for r in rows) / len(rows)
    return sum(r.bits for r in rows) / len(rows)


def collect_series(config: ExperimentConfig) -> SeriesBundle:
    """Assemble raw rate-quality points for every enabled metric."""
    rows = read_completed_rows(
        config.output_dir / LEDGER_FILENAME, config.config_hash
    )
    if not rows:
        raise ConfigError("ledger has no completed rows; run 'vcmbench sweep' first")
    grouped: dict[tuple[str, int], list[LedgerRow]] = {}
    for row in rows:
        grouped.setdefault((row.codec, row.q), []).append(row)

    wap_scores: dict[tuple[str, int], float] = {}
    reference_wap: float | None = None
    if "wap" in config.metrics:
        scores_path = config.output_dir / WAP_SCORES_FILENAME
        if not scores_path.is_file():
            raise ConfigError(f"no {scores_path.name}; run 'vcmbench score' first")
        wap_scores, reference_wap = read_wap_scores(scores_path)

    series: dict[str, dict[str, list[RdPoint]]] = {m: {} for m in config.metrics}
    codec_names = [spec.name for spec in config.codecs]
    for codec in codec_names:
        spec = config.codec(codec)
        for q in spec.quality_levels:
            point_rows = grouped.get((codec, q))
            if not point_rows:
                log.warning("no completed rows for codec=%s q=%s; point dropped", codec, q)
                continue
            rate = _rate_of(point_rows, config.rate_unit)
            for metric in config.metrics:
                value = _metric_value(config, metric, codec, q, point_rows, wap_scores)
                if value is None:
                    continue
                series[metric].setdefault(codec, []).append(
                    RdPoint(rate=rate, quality=value, label=str(q))
                )
    for metric in series:
        for codec in series[metric]:
            series[metric][codec].sort(key=lambda p: (p.rate, p.quality))
    return SeriesBundle(series, len(rows), reference_wap)


def _metric_value(
    config: ExperimentConfig,
    metric: str,
    codec: str,
    q: int,
    point_rows: list[LedgerRow],
    wap_scores: dict[tuple[str, int], float],
) -> float | None:
    if metric in ("psnr", "ssim"):
        per_image = {r.image_id: r.metrics[metric] for r in point_rows}
        value = aggregate_metric(per_image, metric)
        if value == PSNR_INF:
            log.warning(
                "codec=%s q=%s has infinite PSNR (lossless); point dropped from "
                "the psnr curve",
                codec,
                q,
            )
            return None
        return value
    if metric == "wap":
        if (codec, q) not in wap_scores:
            return None
        return wap_scores[(codec, q)]
    name = metric.split(":", 1)[1]
    assert config.external_metrics_pattern is not None
    csv_path = Path(
        config.external_metrics_pattern.replace("{codec}", codec)
        .replace("{q}", str(q))
        .replace("{metric}", name)
    )
    if not csv_path.is_file():
        log.warning(
            "external metric %s missing for codec=%s q=%s (%s); point dropped",
            name,
            codec,
            q,
            csv_path,
        )
        return None
    return ingest_external_metric(csv_path, name).aggregate


def curve_from_series(
    codec: str, metric: str, points: list[RdPoint]
) -> RdCurve:
    """Raw points -> cleaned RdCurve, with codec/metric context on errors."""
    try:
        curve = RdCurve(codec_name=codec, metric_name=metric, points=tuple(points))
        return clean_curve(curve, clean_mode_for(metric))
    except (ValueError, CurveError) as exc:
        raise CurveError(f"[codec={codec}, metric={metric}] {exc}") from exc


def write_curves_csv(
    metric: str,
    per_codec: dict[str, list[RdPoint]],
    codec_order: list[str],
    rate_unit: str,
    complete_rows: int,
    csv_path: str | Path,
) -> None:
    """Raw (uncleaned) series as ``codec,q,rate,<metric>`` plus a footer."""
    rate_col = "bpp" if rate_unit == "bpp" else "total_bits"
    with open(csv_path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["codec", "q", rate_col, metric])
        for codec in codec_order:
            for p in per_codec.get(codec, []):
                writer.writerow([codec, p.label, str(p.rate), str(p.quality)])
        f.write(f"# complete ledger rows: {complete_rows}\n")


def cmd_bdrate(config: ExperimentConfig, both_interp: bool = False) -> BdReport:
    """Build BD tables and per-metric curve CSVs in the output directory."""
    bundle = collect_series(config)
    codec_order = [spec.name for spec in config.codecs]
    for metric in config.metrics:
        write_curves_csv(
            metric.replace(":", "_"),
            bundle.series[metric],
            codec_order,
            config.rate_unit,
            bundle.complete_rows,
            config.output_dir / f"curves_{metric.replace(':', '_')}.csv",
        )

    anchor_curves: dict[str, RdCurve] = {}
    test_curves: dict[str, dict[str, RdCurve]] = {}
    for metric in config.metrics:
        per_codec = bundle.series[metric]
        for codec in codec_order:
            if codec not in per_codec:
                raise CurveError(
                    f"[codec={codec}, metric={metric}] no points survived assembly"
                )
            curve = curve_from_series(codec, metric, per_codec[codec])
            if codec == config.anchor:
                anchor_curves[metric] = curve
            else:
                test_curves.setdefault(codec, {})[metric] = curve

    if not test_curves:
        raise ConfigError("config lists only the anchor codec; nothing to compare")

    modes = INTERP_MODES if both_interp else (config.interp,)
    report: BdReport | None = None
    for mode in modes:
        mode_report = _build_bd_table(anchor_curves, test_curves, mode)
        if both_interp:
            write_bd_table(
                mode_report, config.output_dir / f"bd_table_{config.anchor}_{mode}.csv"
            )
        if mode == config.interp:
            report = mode_report
            write_bd_table(report, config.output_dir / f"bd_table_{config.anchor}.csv")
    assert report is not None
    log.info(
        "bd table written for anchor %s over %d complete ledger rows",
        config.anchor,
        bundle.complete_rows,
    )
    return report

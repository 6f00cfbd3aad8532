"""Detection scoring: wAP per (codec, q) from ingested prediction files.

Predictions are produced by whatever detector the user runs on the
reconstructed images; this command only scores them against the ground
truth.  A (codec, q) whose prediction directory is missing is marked
absent and excluded from the wAP curve with a warning.  Inside an
existing directory, a missing per-image manifest means that image had no
detections.  When the config names an uncompressed-predictions
directory, its wAP is computed once as the reference line for plots.
"""

from __future__ import annotations

import csv
import logging
from pathlib import Path

from vcmbench.errors import ConfigError
from vcmbench.harness.config import ExperimentConfig
from vcmbench.segmentation import (
    ApResult,
    InstanceMask,
    Prediction,
    evaluate_dataset,
    load_cityscapes_gt,
    load_predictions,
    write_ap_report,
)

WAP_SCORES_FILENAME = "wap_scores.csv"
AP_REPORTS_DIRNAME = "ap_reports"
UNCOMPRESSED_LABEL = "uncompressed"

log = logging.getLogger("vcmbench.score")


def load_ground_truth(config: ExperimentConfig) -> list[InstanceMask]:
    """All GT instances for the dataset, one label PNG per image id."""
    if config.gt_dir is None:
        raise ConfigError("scoring requires 'dataset.gt_dir'")
    masks: list[InstanceMask] = []
    for image_id, _ in config.list_images():
        gt_path = config.gt_dir / f"{image_id}.png"
        if not gt_path.is_file():
            raise ConfigError(f"missing ground-truth label image {gt_path}")
        masks.extend(load_cityscapes_gt(gt_path))
    if not masks:
        raise ConfigError(f"ground truth under {config.gt_dir} contains no instances")
    return masks


def _load_prediction_dir(
    config: ExperimentConfig, pred_dir: Path
) -> list[Prediction]:
    preds: list[Prediction] = []
    for image_id, _ in config.list_images():
        manifest = pred_dir / f"{image_id}.txt"
        if manifest.is_file():
            preds.extend(load_predictions(manifest))
    return preds


def cmd_score(config: ExperimentConfig) -> dict[tuple[str, int], ApResult]:
    """Score every (codec, q); write wap_scores.csv and per-point AP reports."""
    if "wap" not in config.metrics:
        raise ConfigError("metric 'wap' is not enabled in this config")
    gts = load_ground_truth(config)

    results: dict[tuple[str, int], ApResult] = {}
    reference: ApResult | None = None
    if config.uncompressed_predictions_dir is not None:
        if not config.uncompressed_predictions_dir.is_dir():
            raise ConfigError(
                f"uncompressed predictions directory "
                f"{config.uncompressed_predictions_dir} does not exist"
            )
        preds = _load_prediction_dir(config, config.uncompressed_predictions_dir)
        reference = evaluate_dataset(preds, gts)
        log.info("uncompressed reference wAP = %.6f", reference.wap)

    for spec in config.codecs:
        for q in spec.quality_levels:
            pred_dir = config.predictions_dir(spec.name, q)
            if not pred_dir.is_dir():
                log.warning(
                    "predictions missing for codec=%s q=%s (%s); point marked absent",
                    spec.name,
                    q,
                    pred_dir,
                )
                continue
            preds = _load_prediction_dir(config, pred_dir)
            results[(spec.name, q)] = evaluate_dataset(preds, gts)

    config.output_dir.mkdir(parents=True, exist_ok=True)
    write_wap_scores(
        results, reference, config.output_dir / WAP_SCORES_FILENAME
    )
    reports_dir = config.output_dir / AP_REPORTS_DIRNAME
    reports_dir.mkdir(parents=True, exist_ok=True)
    for (codec, q), result in sorted(results.items()):
        write_ap_report(result, reports_dir / f"{codec}_q{q}.csv")
    if reference is not None:
        write_ap_report(reference, reports_dir / f"{UNCOMPRESSED_LABEL}.csv")
    log.info("scored %d (codec, q) points", len(results))
    return results


def write_wap_scores(
    results: dict[tuple[str, int], ApResult],
    reference: ApResult | None,
    csv_path: str | Path,
) -> None:
    """Write ``codec,q,wap`` rows plus an optional uncompressed row."""
    with open(csv_path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["codec", "q", "wap"])
        for (codec, q), result in sorted(results.items()):
            writer.writerow([codec, q, f"{result.wap:.6f}"])
        if reference is not None:
            writer.writerow([UNCOMPRESSED_LABEL, "", f"{reference.wap:.6f}"])


def read_wap_scores(
    csv_path: str | Path,
) -> tuple[dict[tuple[str, int], float], float | None]:
    """Parse wap_scores.csv back into per-(codec, q) values + reference."""
    path = Path(csv_path)
    scores: dict[tuple[str, int], float] = {}
    reference: float | None = None
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != ["codec", "q", "wap"]:
            raise ValueError(f"{path}: expected header 'codec,q,wap', got {header}")
        for row in reader:
            if not row:
                continue
            codec, q, wap = row
            if codec == UNCOMPRESSED_LABEL and q == "":
                reference = float(wap)
            else:
                scores[(codec, int(q))] = float(wap)
    return scores, reference

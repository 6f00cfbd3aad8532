"""Instance-segmentation scoring: per-class AP and instance-weighted wAP.

Matching and integration follow the COCO-style protocol on the
0.50:0.05:0.95 IoU grid: predictions are matched greedily per image in
descending confidence order (ties broken by insertion index), each
ground-truth instance is matched at most once, and AP is the exact area
under the all-points interpolated precision-recall curve accumulated
dataset-wide.  wAP weights per-class AP by ground-truth instance counts;
classes without instances carry weight zero and are excluded.

Known deviations from the original Cityscapes tooling, which this module
does not try to silently match: no crowd/ignore-region handling and no
minimum-region filtering.  Class ids are opaque integers.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from vcmbench.errors import ImageFormatError

IOU_THRESHOLDS = tuple(t / 100 for t in range(50, 100, 5))

# Cityscapes instance label encoding: pixel = class_id * 1000 + index.
_INSTANCE_ID_BASE = 1000


@dataclass(frozen=True)
class RleMask:
    """Row-major run-length encoded binary mask.

    Runs alternate background/foreground starting with background; the
    first run may be zero-length, interior runs may not.  Run lengths sum
    to width * height.
    """

    width: int
    height: int
    counts: tuple[int, ...]

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError(f"mask dims must be positive, got {self.width}x{self.height}")
        if any(c < 0 for c in self.counts):
            raise ValueError("negative run length")
        if sum(self.counts) != self.width * self.height:
            raise ValueError(
                f"run lengths sum to {sum(self.counts)}, expected {self.width * self.height}"
            )
        if any(c == 0 for c in self.counts[1:]):
            raise ValueError("zero-length interior run")

    @property
    def area(self) -> int:
        return sum(self.counts[1::2])


@dataclass(frozen=True)
class InstanceMask:
    image_id: str
    class_id: int
    mask: RleMask

    def __post_init__(self):
        if self.mask.area == 0:
            raise ValueError(f"empty mask for {self.image_id}/class {self.class_id}")


@dataclass(frozen=True)
class Prediction:
    image_id: str
    class_id: int
    mask: RleMask
    confidence: float

    def __post_init__(self):
        if self.mask.area == 0:
            raise ValueError(f"empty mask for {self.image_id}/class {self.class_id}")
        if not (np.isfinite(self.confidence) and 0.0 <= self.confidence <= 1.0):
            raise ValueError(f"confidence {self.confidence} outside [0, 1]")


@dataclass(frozen=True)
class ApResult:
    """Per-class AP, ground-truth instance counts, and the weighted mean."""

    per_class_ap: dict[int, float]
    per_class_gt_count: dict[int, int]
    wap: float


def rle_encode(bitmask: np.ndarray) -> RleMask:
    """Encode a row-major binary grid into canonical run lengths."""
    arr = np.asarray(bitmask)
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError(f"expected non-empty 2-D mask, got shape {arr.shape}")
    flat = arr.reshape(-1).astype(bool)
    changes = np.flatnonzero(flat[1:] != flat[:-1]) + 1
    bounds = np.concatenate(([0], changes, [flat.size]))
    counts = np.diff(bounds).tolist()
    if flat[0]:
        counts = [0] + counts
    h, w = arr.shape
    return RleMask(w, h, tuple(int(c) for c in counts))


def rle_decode(mask: RleMask) -> np.ndarray:
    """Decode run lengths back to a (height, width) boolean grid."""
    values = np.zeros(len(mask.counts), dtype=bool)
    values[1::2] = True
    flat = np.repeat(values, mask.counts)
    return flat.reshape(mask.height, mask.width)


def mask_iou(a: RleMask, b: RleMask) -> float:
    if (a.width, a.height) != (b.width, b.height):
        raise ValueError(f"mask dims differ: {a.width}x{a.height} vs {b.width}x{b.height}")
    da = rle_decode(a)
    db = rle_decode(b)
    inter = int(np.count_nonzero(da & db))
    union = int(np.count_nonzero(da | db))
    return inter / union if union else 0.0


def iou(a: InstanceMask, b: InstanceMask) -> float:
    """Intersection over union of two masks on the same grid."""
    return mask_iou(a.mask, b.mask)


def _iou_matrix(preds: list[Prediction], gts: list[InstanceMask]) -> np.ndarray:
    """Pairwise IoU with masks decoded once each."""
    matrix = np.zeros((len(preds), len(gts)))
    if not preds or not gts:
        return matrix
    pred_arrays = [rle_decode(p.mask).reshape(-1) for p in preds]
    gt_arrays = [rle_decode(g.mask).reshape(-1) for g in gts]
    pred_areas = [int(a.sum()) for a in pred_arrays]
    gt_areas = [int(a.sum()) for a in gt_arrays]
    for i, pa in enumerate(pred_arrays):
        for j, ga in enumerate(gt_arrays):
            inter = int(np.count_nonzero(pa & ga))
            union = pred_areas[i] + gt_areas[j] - inter
            matrix[i, j] = inter / union if union else 0.0
    return matrix


def _greedy_assign(
    matrix: np.ndarray, confidences: list[float], threshold: float
) -> tuple[list[bool], int]:
    """Greedy TP assignment given a precomputed prediction x GT IoU matrix."""
    n_preds, n_gts = matrix.shape
    order = sorted(range(n_preds), key=lambda k: (-confidences[k], k))
    gt_taken = [False] * n_gts
    tp = [False] * n_preds
    for k in order:
        best_iou = 0.0
        best_j = -1
        for j in range(n_gts):
            if gt_taken[j]:
                continue
            if matrix[k, j] > best_iou:
                best_iou = matrix[k, j]
                best_j = j
        if best_j >= 0 and best_iou >= threshold:
            gt_taken[best_j] = True
            tp[k] = True
    return tp, gt_taken.count(False)


def match_predictions(
    preds: list[Prediction],
    gts: list[InstanceMask],
    class_id: int,
    iou_threshold: float,
) -> tuple[list[bool], int]:
    """Greedy single-image matching.

    Returns per-prediction TP flags (original ``preds`` order, restricted
    to ``class_id``) and the number of unmatched ground-truth instances.
    Predictions are processed in descending confidence order, ties broken
    by ascending insertion index; each takes the unmatched same-class GT
    with the highest IoU if that IoU reaches the threshold.
    """
    if not 0.0 < iou_threshold <= 1.0:
        raise ValueError(f"iou_threshold must be in (0, 1], got {iou_threshold}")
    sel_preds = [p for p in preds if p.class_id == class_id]
    sel_gts = [g for g in gts if g.class_id == class_id]
    matrix = _iou_matrix(sel_preds, sel_gts)
    return _greedy_assign(matrix, [p.confidence for p in sel_preds], iou_threshold)


def _group_by_image(items):
    grouped: dict[str, list] = {}
    for item in items:
        grouped.setdefault(item.image_id, []).append(item)
    return grouped


def average_precision(
    preds: list[Prediction],
    gts: list[InstanceMask],
    class_id: int,
    thresholds: tuple[float, ...] = IOU_THRESHOLDS,
) -> float:
    """Dataset-wide AP for one class, averaged over IoU thresholds."""
    for t in thresholds:
        if not 0.0 < t <= 1.0:
            raise ValueError(f"iou threshold must be in (0, 1], got {t}")
    n_gt = sum(1 for g in gts if g.class_id == class_id)
    if n_gt == 0:
        raise ValueError(f"no ground-truth instances for class {class_id}")
    class_preds = [(i, p) for i, p in enumerate(preds) if p.class_id == class_id]
    preds_by_image = _group_by_image([p for _, p in class_preds])
    gts_by_image = _group_by_image([g for g in gts if g.class_id == class_id])
    cached = {
        image_id: (
            _iou_matrix(image_preds, gts_by_image.get(image_id, [])),
            [p.confidence for p in image_preds],
        )
        for image_id, image_preds in preds_by_image.items()
    }
    index_by_image: dict[str, list[int]] = {}
    for i, p in class_preds:
        index_by_image.setdefault(p.image_id, []).append(i)

    ap_sum = 0.0
    for t in thresholds:
        labels: dict[int, bool] = {}
        for image_id, (matrix, confidences) in cached.items():
            tp_flags, _ = _greedy_assign(matrix, confidences, t)
            for index, flag in zip(index_by_image[image_id], tp_flags):
                labels[index] = flag
        ranked = sorted(class_preds, key=lambda ip: (-ip[1].confidence, ip[0]))
        tp_cum = 0
        fp_cum = 0
        precisions = []
        recalls = []
        for i, _ in ranked:
            if labels[i]:
                tp_cum += 1
            else:
                fp_cum += 1
            precisions.append(tp_cum / (tp_cum + fp_cum))
            recalls.append(tp_cum / n_gt)
        # Monotone non-increasing precision envelope, then exact
        # rectangle integration over recall increments.
        for k in range(len(precisions) - 2, -1, -1):
            precisions[k] = max(precisions[k], precisions[k + 1])
        ap_t = 0.0
        prev_recall = 0.0
        for p, r in zip(precisions, recalls):
            if r > prev_recall:
                ap_t += (r - prev_recall) * p
                prev_recall = r
        ap_sum += ap_t
    return ap_sum / len(thresholds)


def weighted_ap(per_class_ap: dict[int, float], per_class_gt_count: dict[int, int]) -> ApResult:
    """Instance-count-weighted mean of per-class AP values.

    Classes with zero ground-truth instances carry weight zero and are
    excluded from the mean.
    """
    weighted = {c: n for c, n in per_class_gt_count.items() if n > 0}
    if not weighted:
        raise ValueError("all classes have zero ground-truth instances")
    missing = set(weighted) - set(per_class_ap)
    if missing:
        raise ValueError(f"missing AP for classes {sorted(missing)}")
    total = sum(weighted.values())
    wap = sum(per_class_ap[c] * n for c, n in weighted.items()) / total
    return ApResult(dict(per_class_ap), dict(per_class_gt_count), wap)


def evaluate_dataset(preds: list[Prediction], gts: list[InstanceMask]) -> ApResult:
    """AP per class plus wAP over every class present in the ground truth."""
    counts: dict[int, int] = {}
    for g in gts:
        counts[g.class_id] = counts.get(g.class_id, 0) + 1
    if not counts:
        raise ValueError("ground truth contains no instances")
    per_class_ap = {c: average_precision(preds, gts, c) for c in sorted(counts)}
    return weighted_ap(per_class_ap, counts)


def load_cityscapes_gt(instance_png_path) -> list[InstanceMask]:
    """Decode an instance-id label image into per-instance masks.

    The label image is 16-bit single-channel; instance pixels carry
    ``class_id * 1000 + instance_index`` and values below 1000 are
    semantic-only labels, which are ignored.  Pixels sharing an id form
    one mask regardless of connectivity.
    """
    path = Path(instance_png_path)
    try:
        with Image.open(path) as im:
            im.load()
            arr = np.asarray(im)
    except FileNotFoundError:
        raise
    except Exception as exc:
        raise ImageFormatError(f"{path}: unreadable label image ({exc})") from exc
    if arr.ndim != 2:
        raise ImageFormatError(f"{path}: expected single-channel label image")
    arr = arr.astype(np.int64)
    image_id = path.stem
    masks = []
    for value in sorted(int(v) for v in np.unique(arr) if v >= _INSTANCE_ID_BASE):
        masks.append(
            InstanceMask(image_id, value // _INSTANCE_ID_BASE, rle_encode(arr == value))
        )
    return masks


def load_predictions(manifest_txt_path) -> list[Prediction]:
    """Load one image's predictions from a manifest file.

    Each line reads ``<relative mask PNG path> <class_id> <confidence>``;
    mask PNGs are binary (0/255).  An empty manifest is a valid image
    with no detections.
    """
    path = Path(manifest_txt_path)
    base = path.parent
    image_id = path.stem
    preds = []
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ValueError(f"{path}:{lineno}: malformed line {line!r}")
        mask_rel, class_part, conf_part = parts
        try:
            class_id = int(class_part)
            confidence = float(conf_part)
        except ValueError:
            raise ValueError(f"{path}:{lineno}: malformed line {line!r}") from None
        if not 0.0 <= confidence <= 1.0:
            raise ValueError(f"{path}:{lineno}: confidence {confidence} outside [0, 1]")
        mask_path = base / mask_rel
        if not mask_path.is_file():
            raise FileNotFoundError(f"{path}:{lineno}: missing mask file {mask_path}")
        with Image.open(mask_path) as im:
            im.load()
            arr = np.asarray(im)
        if arr.ndim != 2:
            raise ImageFormatError(f"{mask_path}: expected single-channel binary mask")
        preds.append(Prediction(image_id, class_id, rle_encode(arr != 0), confidence))
    return preds


def write_ap_report(result: ApResult, csv_path) -> None:
    """Write per-class rows ``class_id,gt_count,ap`` plus a final wAP row."""
    path = Path(csv_path)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["class_id", "gt_count", "ap"])
        for class_id in sorted(result.per_class_gt_count):
            count = result.per_class_gt_count[class_id]
            ap = result.per_class_ap.get(class_id)
            writer.writerow([class_id, count, "" if ap is None else f"{ap:.6f}"])
        writer.writerow(["wAP", "", f"{result.wap:.6f}"])

"""Seeded synthetic fixtures: test images, labels, and a demo experiment.

Everything here is deterministic in the seed, so tests and the bundled
demo produce byte-identical files on every run.  The demo experiment
materializes a full dataset tree (images, 16-bit instance labels,
prediction manifests at several degradation levels, a config file) on
which sweep -> score -> bdrate -> plot runs end to end in seconds.

Predictions are synthesized directly from the ground truth: each
instance mask is shrunk by a margin that falls as quality rises, which
yields a wAP curve that climbs toward the exact-prediction reference,
the way detector accuracy climbs toward its uncompressed-input score.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from PIL import Image
from scipy import ndimage

from vcmbench.image_io import save_image
from vcmbench.images import PlanarImage, from_rgb_array

# Instance rectangles: (class_id, height, width). All instances of a
# class share one shape so every prediction of the class has the same
# IoU at a given shrink margin.
_RECT_LARGE = (24, 20, 24)
_RECT_SMALL = (26, 14, 16)


def synthetic_image(seed: int, width: int = 64, height: int = 64) -> PlanarImage:
    """Smooth random RGB image with mild texture, seeded."""
    if width % 2 or height % 2:
        raise ValueError(f"even dimensions required, got {width}x{height}")
    rng = np.random.default_rng(seed)
    coarse = rng.random((3, height // 8 + 1, width // 8 + 1))
    channels = []
    for c in range(3):
        smooth = ndimage.zoom(coarse[c], 8.0, order=3)[:height, :width]
        channels.append(smooth)
    arr = np.stack(channels, axis=-1)
    arr = (arr - arr.min()) / (arr.max() - arr.min() + 1e-12)
    noise = rng.normal(0.0, 0.01, size=arr.shape)
    arr = np.clip((arr * 0.8 + 0.1 + noise) * 255.0, 0, 255)
    return from_rgb_array(arr.astype(np.uint8))


def rd_sanity_images(count: int = 3, width: int = 64, height: int = 64) -> list[PlanarImage]:
    """The bundled image set for rate/quality monotonicity checks."""
    return [synthetic_image(seed, width, height) for seed in range(count)]


def shrink_margin(q: int) -> int:
    """Prediction-mask shrink (pixels per side) at quality q: 0 at high q."""
    return max(0, (96 - q) // 18)


def _instance_layout(seed: int, size: int) -> list[tuple[int, int, int, int, int]]:
    """Rectangles as (class_id, row0, col0, height, width), non-overlapping."""
    rng = np.random.default_rng(1000 + seed)
    cls_a, h_a, w_a = _RECT_LARGE
    cls_b, h_b, w_b = _RECT_SMALL
    rects = [
        (cls_a, int(rng.integers(2, 9)), int(rng.integers(2, 9)), h_a, w_a),
        (cls_b, int(rng.integers(38, 45)), int(rng.integers(4, 11)), h_b, w_b),
    ]
    if seed % 2 == 0:
        rects.append((cls_b, int(rng.integers(38, 45)), int(rng.integers(40, 47)), h_b, w_b))
    for _, r0, c0, h, w in rects:
        assert r0 + h <= size and c0 + w <= size
    return rects


def _label_array(rects, size: int) -> np.ndarray:
    label = np.zeros((size, size), dtype=np.uint16)
    index_per_class: dict[int, int] = {}
    for class_id, r0, c0, h, w in rects:
        index_per_class[class_id] = index_per_class.get(class_id, 0) + 1
        label[r0 : r0 + h, c0 : c0 + w] = class_id * 1000 + index_per_class[class_id]
    return label


def _write_mask_png(path: Path, mask: np.ndarray) -> None:
    Image.fromarray((mask.astype(np.uint8)) * 255, mode="L").save(path)


def _write_predictions(
    pred_dir: Path, image_id: str, rects, size: int, margin: int, confidence: float
) -> None:
    """One manifest plus its mask PNGs; masks are GT rects shrunk by margin."""
    pred_dir.mkdir(parents=True, exist_ok=True)
    lines = []
    for i, (class_id, r0, c0, h, w) in enumerate(rects):
        if h - 2 * margin <= 0 or w - 2 * margin <= 0:
            continue
        mask = np.zeros((size, size), dtype=bool)
        mask[r0 + margin : r0 + h - margin, c0 + margin : c0 + w - margin] = True
        mask_name = f"{image_id}_{i:03d}.png"
        _write_mask_png(pred_dir / mask_name, mask)
        lines.append(f"{mask_name} {class_id} {confidence}")
    (pred_dir / f"{image_id}.txt").write_text(
        "".join(line + "\n" for line in lines), encoding="utf-8"
    )


def build_demo_experiment(
    root: str | Path,
    num_images: int = 8,
    size: int = 64,
    workers: int = 4,
) -> Path:
    """Materialize the bundled demo dataset tree; returns the config path.

    Two parameterizations of the builtin codec pose as two codecs with
    interleaved quality grids, so their curves overlap without
    coinciding.
    """
    root = Path(root)
    image_dir = root / "images"
    gt_dir = root / "gt"
    preds_dir = root / "preds"
    image_dir.mkdir(parents=True, exist_ok=True)
    gt_dir.mkdir(parents=True, exist_ok=True)

    codec_grids = {"codec-a": [25, 45, 65, 85], "codec-b": [35, 55, 75, 95]}

    for seed in range(num_images):
        image_id = f"img{seed:02d}"
        save_image(synthetic_image(seed, size, size), image_dir / f"{image_id}.png")
        rects = _instance_layout(seed, size)
        Image.fromarray(_label_array(rects, size)).save(gt_dir / f"{image_id}.png")
        _write_predictions(
            preds_dir / "uncompressed", image_id, rects, size, margin=0, confidence=1.0
        )
        for codec, grid in codec_grids.items():
            for q in grid:
                _write_predictions(
                    preds_dir / codec / f"q{q}",
                    image_id,
                    rects,
                    size,
                    margin=shrink_margin(q),
                    confidence=0.9,
                )

    config = {
        "dataset": {
            "image_dir": "images",
            "gt_dir": "gt",
            "uncompressed_predictions_dir": "preds/uncompressed",
        },
        "codecs": [
            {"name": name, "kind": "builtin_dct", "quality_levels": grid}
            for name, grid in codec_grids.items()
        ],
        "metrics": ["psnr", "ssim", "wap"],
        "anchor": "codec-a",
        "predictions_pattern": "preds/{codec}/q{q}",
        "output_dir": "out",
        "interp": "pchip",
        "rate_unit": "bpp",
        "workers": workers,
    }
    config_path = root / "config.json"
    config_path.write_text(json.dumps(config, indent=2) + "\n", encoding="utf-8")
    return config_path

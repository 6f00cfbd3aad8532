"""Experiment configuration: JSON loading, validation, and hashing.

A config file is a single JSON object; relative paths inside it resolve
against the directory holding the file, so an experiment tree can be
moved wholesale.  The config hash covers the fully resolved content and
keys the run ledger's resume logic.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from vcmbench.bd import INTERP_MODES
from vcmbench.codecs.base import KIND_BUILTIN, KIND_EXTERNAL, CodecSpec
from vcmbench.errors import ConfigError

RATE_UNITS = ("bpp", "total-bits")
BASE_METRICS = ("psnr", "ssim", "wap")
IMAGE_EXTENSIONS = (".png", ".ppm", ".pgm")


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ConfigError(message)


def _get_str(obj: dict, key: str, default: str | None = None) -> str | None:
    value = obj.get(key, default)
    if value is None:
        return None
    _require(isinstance(value, str) and value != "", f"{key!r} must be a non-empty string")
    return value


def _resolve(base: Path, value: str) -> Path:
    path = Path(value)
    return path if path.is_absolute() else (base / path).resolve()


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated, path-resolved experiment description."""

    image_dir: Path
    gt_dir: Path | None
    uncompressed_predictions_dir: Path | None
    codecs: tuple[CodecSpec, ...]
    metrics: tuple[str, ...]
    anchor: str
    predictions_pattern: str | None
    external_metrics_pattern: str | None
    output_dir: Path
    interp: str
    rate_unit: str
    failure_budget: float
    workers: int
    config_hash: str = field(default="", compare=False)

    @property
    def external_metrics(self) -> tuple[str, ...]:
        return tuple(m.split(":", 1)[1] for m in self.metrics if m.startswith("external:"))

    def codec(self, name: str) -> CodecSpec:
        for spec in self.codecs:
            if spec.name == name:
                return spec
        raise KeyError(name)

    def list_images(self) -> list[tuple[str, Path]]:
        """Sorted (image_id, path) pairs from the image directory."""
        if not self.image_dir.is_dir():
            raise ConfigError(f"image directory {self.image_dir} does not exist")
        pairs = sorted(
            (p.stem, p)
            for p in self.image_dir.iterdir()
            if p.is_file() and p.suffix.lower() in IMAGE_EXTENSIONS
        )
        _require(bool(pairs), f"image directory {self.image_dir} contains no images")
        ids = [i for i, _ in pairs]
        _require(len(set(ids)) == len(ids), "image ids (file stems) must be unique")
        return pairs

    def predictions_dir(self, codec: str, q: int) -> Path:
        assert self.predictions_pattern is not None
        raw = self.predictions_pattern.replace("{codec}", codec).replace("{q}", str(q))
        return Path(raw)


def _parse_codec(entry: dict, base: Path, index: int) -> CodecSpec:
    _require(isinstance(entry, dict), f"codecs[{index}] must be an object")
    name = _get_str(entry, "name")
    kind = _get_str(entry, "kind")
    _require(name is not None, f"codecs[{index}] is missing 'name'")
    _require(kind in (KIND_BUILTIN, KIND_EXTERNAL), f"codec {name!r}: unknown kind {kind!r}")
    levels = entry.get("quality_levels")
    _require(
        isinstance(levels, list) and all(isinstance(q, int) and not isinstance(q, bool) for q in levels),
        f"codec {name!r}: 'quality_levels' must be a list of integers",
    )
    workdir = _get_str(entry, "workdir")
    try:
        return CodecSpec(
            name=name,
            kind=kind,
            quality_levels=tuple(levels),
            encode_template=entry.get("encode_template", ""),
            decode_template=entry.get("decode_template", ""),
            workdir=_resolve(base, workdir) if workdir else None,
        )
    except ValueError as exc:
        raise ConfigError(f"codec {name!r}: {exc}") from exc


def load_config(config_path: str | Path) -> ExperimentConfig:
    """Load, validate, and hash a JSON experiment config."""
    path = Path(config_path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    _require(isinstance(raw, dict), f"{path}: top-level value must be an object")
    base = path.resolve().parent

    dataset = raw.get("dataset")
    _require(isinstance(dataset, dict), "'dataset' must be an object")
    image_dir = _get_str(dataset, "image_dir")
    _require(image_dir is not None, "'dataset.image_dir' is required")
    gt_dir = _get_str(dataset, "gt_dir")
    uncompressed_dir = _get_str(dataset, "uncompressed_predictions_dir")

    codecs_raw = raw.get("codecs")
    _require(
        isinstance(codecs_raw, list) and codecs_raw, "'codecs' must be a non-empty list"
    )
    codecs = tuple(_parse_codec(c, base, i) for i, c in enumerate(codecs_raw))
    names = [c.name for c in codecs]
    _require(len(set(names)) == len(names), "codec names must be unique")

    metrics_raw = raw.get("metrics")
    _require(
        isinstance(metrics_raw, list) and metrics_raw and all(isinstance(m, str) for m in metrics_raw),
        "'metrics' must be a non-empty list of strings",
    )
    for m in metrics_raw:
        _require(
            m in BASE_METRICS or (m.startswith("external:") and len(m) > len("external:")),
            f"unknown metric {m!r} (expected psnr, ssim, wap, or external:<name>)",
        )
    _require(len(set(metrics_raw)) == len(metrics_raw), "metrics must be unique")

    anchor = _get_str(raw, "anchor")
    _require(anchor is not None, "'anchor' is required")
    _require(anchor in names, f"anchor {anchor!r} does not appear in codecs")

    predictions_pattern = _get_str(raw, "predictions_pattern")
    external_pattern = _get_str(raw, "external_metrics_pattern")
    output_dir = _get_str(raw, "output_dir")
    _require(output_dir is not None, "'output_dir' is required")

    interp = _get_str(raw, "interp", "pchip")
    _require(interp in INTERP_MODES, f"interp must be one of {INTERP_MODES}, got {interp!r}")
    rate_unit = _get_str(raw, "rate_unit", "bpp")
    _require(
        rate_unit in RATE_UNITS, f"rate_unit must be one of {RATE_UNITS}, got {rate_unit!r}"
    )

    failure_budget = raw.get("failure_budget", 0.1)
    _require(
        isinstance(failure_budget, (int, float)) and 0.0 <= failure_budget <= 1.0,
        "'failure_budget' must be a number in [0, 1]",
    )
    workers = raw.get("workers", 4)
    _require(
        isinstance(workers, int) and not isinstance(workers, bool) and workers >= 1,
        "'workers' must be a positive integer",
    )

    if "wap" in metrics_raw:
        _require(gt_dir is not None, "metric 'wap' requires 'dataset.gt_dir'")
        _require(
            predictions_pattern is not None, "metric 'wap' requires 'predictions_pattern'"
        )
    if predictions_pattern is not None:
        for ph in ("{codec}", "{q}"):
            _require(
                predictions_pattern.count(ph) == 1,
                f"'predictions_pattern' must contain {ph} exactly once",
            )
    if any(m.startswith("external:") for m in metrics_raw):
        _require(
            external_pattern is not None,
            "external metrics require 'external_metrics_pattern'",
        )
    if external_pattern is not None:
        for ph in ("{codec}", "{q}", "{metric}"):
            _require(
                external_pattern.count(ph) == 1,
                f"'external_metrics_pattern' must contain {ph} exactly once",
            )

    resolved_output = _resolve(base, output_dir)
    resolved_images = _resolve(base, image_dir)
    resolved_gt = _resolve(base, gt_dir) if gt_dir else None
    resolved_uncompressed = _resolve(base, uncompressed_dir) if uncompressed_dir else None
    for label, d in (("image_dir", resolved_images), ("gt_dir", resolved_gt)):
        _require(
            d is None or d != resolved_output,
            f"output_dir must be distinct from dataset {label}",
        )

    resolved_predictions = (
        str(_resolve(base, predictions_pattern)) if predictions_pattern else None
    )
    resolved_external = str(_resolve(base, external_pattern)) if external_pattern else None

    config = ExperimentConfig(
        image_dir=resolved_images,
        gt_dir=resolved_gt,
        uncompressed_predictions_dir=resolved_uncompressed,
        codecs=codecs,
        metrics=tuple(metrics_raw),
        anchor=anchor,
        predictions_pattern=resolved_predictions,
        external_metrics_pattern=resolved_external,
        output_dir=resolved_output,
        interp=interp,
        rate_unit=rate_unit,
        failure_budget=float(failure_budget),
        workers=workers,
    )
    object.__setattr__(config, "config_hash", _hash_config(config))
    return config


def _hash_config(config: ExperimentConfig) -> str:
    payload = {
        "image_dir": str(config.image_dir),
        "gt_dir": str(config.gt_dir) if config.gt_dir else None,
        "uncompressed_predictions_dir": (
            str(config.uncompressed_predictions_dir)
            if config.uncompressed_predictions_dir
            else None
        ),
        "codecs": [
            {
                "name": c.name,
                "kind": c.kind,
                "quality_levels": list(c.quality_levels),
                "encode_template": c.encode_template,
                "decode_template": c.decode_template,
                "workdir": str(c.workdir) if c.workdir else None,
            }
            for c in config.codecs
        ],
        "metrics": list(config.metrics),
        "anchor": config.anchor,
        "predictions_pattern": config.predictions_pattern,
        "external_metrics_pattern": config.external_metrics_pattern,
        "rate_unit": config.rate_unit,
    }
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()

"""vcmbench: rate-distortion and machine-vision scoring for image codecs.

Sweeps codecs over quality grids, measures PSNR/SSIM and instance-
segmentation wAP on the reconstructions, and compares codecs with
Bjontegaard deltas over any quality axis.
"""

from vcmbench.bd import (
    BdReport,
    RdCurve,
    RdPoint,
    bd_quality,
    bd_rate,
    build_bd_table,
    clean_curve,
    lagrangian_cost,
)
from vcmbench.codecs import (
    CodecSpec,
    EncodedArtifact,
    external_transcode,
    toy_decode,
    toy_encode,
)
from vcmbench.errors import (
    BitstreamError,
    CodecRunError,
    ConfigError,
    CurveError,
    ImageFormatError,
    SweepAbortedError,
    VcmbenchError,
)
from vcmbench.image_io import load_image, save_image
from vcmbench.images import ColorSpace, PlanarImage, rgb_to_ycbcr420, ycbcr420_to_rgb
from vcmbench.metrics import (
    PSNR_INF,
    MetricScore,
    aggregate_metric,
    ingest_external_metric,
    mse,
    psnr,
    ssim,
)
from vcmbench.segmentation import (
    ApResult,
    InstanceMask,
    Prediction,
    RleMask,
    average_precision,
    evaluate_dataset,
    weighted_ap,
)

__version__ = "0.1.0"

__all__ = [
    "ApResult",
    "BdReport",
    "BitstreamError",
    "CodecRunError",
    "CodecSpec",
    "ColorSpace",
    "ConfigError",
    "CurveError",
    "EncodedArtifact",
    "ImageFormatError",
    "InstanceMask",
    "MetricScore",
    "PSNR_INF",
    "PlanarImage",
    "Prediction",
    "RdCurve",
    "RdPoint",
    "RleMask",
    "SweepAbortedError",
    "VcmbenchError",
    "aggregate_metric",
    "average_precision",
    "bd_quality",
    "bd_rate",
    "build_bd_table",
    "clean_curve",
    "evaluate_dataset",
    "external_transcode",
    "ingest_external_metric",
    "lagrangian_cost",
    "load_image",
    "mse",
    "psnr",
    "rgb_to_ycbcr420",
    "save_image",
    "ssim",
    "toy_decode",
    "toy_encode",
    "weighted_ap",
    "ycbcr420_to_rgb",
    "__version__",
]

"""Preset quality grids and spec constructors.

Two standard sweep grids ship with the toolkit: the QP grid 12..42 in
steps of 5 used for HM/VTM-style encoders, and the JPEG-style quality
grid 10..90 in steps of 10 used by the builtin codec.
"""

from __future__ import annotations

from pathlib import Path

from vcmbench.codecs.base import KIND_BUILTIN, KIND_EXTERNAL, CodecSpec

QP_LEVELS: tuple[int, ...] = tuple(range(12, 43, 5))
JPEG_QUALITY_LEVELS: tuple[int, ...] = tuple(range(10, 91, 10))


def builtin_dct_spec(
    name: str = "builtin-dct",
    quality_levels: tuple[int, ...] = JPEG_QUALITY_LEVELS,
) -> CodecSpec:
    """Builtin DCT codec over the JPEG-style quality grid."""
    return CodecSpec(name=name, kind=KIND_BUILTIN, quality_levels=quality_levels)


def external_codec_spec(
    name: str,
    encode_template: str,
    decode_template: str,
    workdir: str | Path,
    quality_levels: tuple[int, ...] = QP_LEVELS,
) -> CodecSpec:
    """External codec, defaulting to the QP grid 12..42 step 5."""
    return CodecSpec(
        name=name,
        kind=KIND_EXTERNAL,
        quality_levels=quality_levels,
        encode_template=encode_template,
        decode_template=decode_template,
        workdir=Path(workdir),
    )

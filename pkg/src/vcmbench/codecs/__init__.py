"""Codec layer: builtin DCT codec, external codec runner, presets."""

from vcmbench.codecs.base import (
    KIND_BUILTIN,
    KIND_EXTERNAL,
    CodecSpec,
    EncodedArtifact,
)
from vcmbench.codecs.external import external_transcode
from vcmbench.codecs.kernels import BACKEND
from vcmbench.codecs.presets import (
    JPEG_QUALITY_LEVELS,
    QP_LEVELS,
    builtin_dct_spec,
    external_codec_spec,
)
from vcmbench.codecs.toy import toy_decode, toy_encode

__all__ = [
    "BACKEND",
    "KIND_BUILTIN",
    "KIND_EXTERNAL",
    "CodecSpec",
    "EncodedArtifact",
    "JPEG_QUALITY_LEVELS",
    "QP_LEVELS",
    "builtin_dct_spec",
    "external_codec_spec",
    "external_transcode",
    "toy_decode",
    "toy_encode",
]

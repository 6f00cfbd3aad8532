"""Builtin block-DCT anchor codec.

Deterministic and dependency-free so rate sweeps are testable without any
external encoder binaries.  Pipeline: RGB -> YCbCr 4:2:0, per plane pad to
a multiple of 8 by edge replication, 8x8 orthonormal DCT-II, uniform
quantization from the standard luma table scaled by quality, zigzag scan,
and the run/level exp-Golomb coder from ``kernels``.  The bitstream is
``docs/bitstream.md``: an 18-byte big-endian header (magic ``VCMB``,
version, dims, q) followed by all Y, Cb, Cr blocks in raster order.
"""

from __future__ import annotations

import struct

import numpy as np

from vcmbench.codecs import kernels
from vcmbench.codecs.base import EncodedArtifact
from vcmbench.errors import BitstreamError, ImageFormatError
from vcmbench.images import (
    ColorSpace,
    PlanarImage,
    round_half_away,
    rgb_to_ycbcr420,
    ycbcr420_to_rgb,
)

MAGIC = b"VCMB"
VERSION = 1
HEADER_FORMAT = ">4sHIIB3x"
HEADER_SIZE = struct.calcsize(HEADER_FORMAT)

# Largest pixel count a header may claim; guards corrupt headers from
# turning into giant allocations.
_MAX_PIXELS = 1 << 26

QUANT_TABLE = np.array(
    [
        [16, 11, 10, 16, 24, 40, 51, 61],
        [12, 12, 14, 19, 26, 58, 60, 55],
        [14, 13, 16, 24, 40, 57, 69, 56],
        [14, 17, 22, 29, 51, 87, 80, 62],
        [18, 22, 37, 56, 68, 109, 103, 77],
        [24, 35, 55, 64, 81, 104, 113, 92],
        [49, 64, 78, 87, 103, 121, 120, 101],
        [72, 92, 95, 98, 112, 100, 103, 99],
    ],
    dtype=np.float64,
)


def _dct_matrix() -> np.ndarray:
    n = np.arange(8)
    mat = np.cos(np.pi * (2 * n[None, :] + 1) * n[:, None] / 16.0)
    mat *= np.sqrt(2.0 / 8.0)
    mat[0, :] = np.sqrt(1.0 / 8.0)
    return mat


def _zigzag_indices() -> np.ndarray:
    coords = sorted(
        ((i, j) for i in range(8) for j in range(8)),
        key=lambda ij: (ij[0] + ij[1], ij[1] if (ij[0] + ij[1]) % 2 == 0 else ij[0]),
    )
    return np.array([i * 8 + j for i, j in coords])


_DCT = _dct_matrix()
_ZIGZAG = _zigzag_indices()


def quality_scale(q: int) -> float:
    """Quantizer scale for q in 1..100 (5000/q below 50, 200-2q above)."""
    return (5000.0 / q if q < 50 else 200.0 - 2.0 * q) / 100.0


def quant_steps(q: int) -> np.ndarray:
    """Per-coefficient quantization steps, each clamped to at least 1."""
    return np.maximum(QUANT_TABLE * quality_scale(q), 1.0)


def _check_quality(q: int) -> None:
    if not isinstance(q, int) or isinstance(q, bool) or not 1 <= q <= 100:
        raise ValueError(f"quality must be an integer in 1..100, got {q!r}")


def _pad_to_blocks(plane: np.ndarray) -> np.ndarray:
    h, w = plane.shape
    return np.pad(plane, ((0, -h % 8), (0, -w % 8)), mode="edge")


def _to_blocks(plane: np.ndarray) -> np.ndarray:
    h, w = plane.shape
    return plane.reshape(h // 8, 8, w // 8, 8).swapaxes(1, 2).reshape(-1, 8, 8)


def _from_blocks(blocks: np.ndarray, h: int, w: int) -> np.ndarray:
    return blocks.reshape(h // 8, w // 8, 8, 8).swapaxes(1, 2).reshape(h, w)


def _plane_shapes(width: int, height: int) -> list[tuple[int, int]]:
    cw, ch = (width + 1) // 2, (height + 1) // 2
    return [(height, width), (ch, cw), (ch, cw)]


def toy_encode(img: PlanarImage, q: int, image_id: str = "") -> EncodedArtifact:
    """Encode an 8-bit even-dimension RGB image at quality q in 1..100."""
    _check_quality(q)
    if img.bit_depth != 8:
        raise ImageFormatError(f"builtin codec is 8-bit only, got {img.bit_depth}-bit")
    if img.color_space is not ColorSpace.RGB:
        raise ImageFormatError(
            f"builtin codec expects RGB input, got {img.color_space.value}"
        )
    if img.width % 2 or img.height % 2:
        raise ImageFormatError(
            f"builtin codec needs even dimensions, got {img.width}x{img.height}"
        )
    ycc = rgb_to_ycbcr420(img)
    steps = quant_steps(q)
    pieces = []
    for plane in ycc.planes:
        blocks = _to_blocks(_pad_to_blocks(plane)).astype(np.float64) - 128.0
        coeffs = _DCT @ blocks @ _DCT.T
        levels = round_half_away(coeffs / steps).astype(np.int64)
        pieces.append(levels.reshape(-1, 64)[:, _ZIGZAG])
    body = kernels.encode_coefficients(np.concatenate(pieces, axis=0))
    header = struct.pack(HEADER_FORMAT, MAGIC, VERSION, img.width, img.height, q)
    payload = header + body
    return EncodedArtifact(
        codec_name="builtin-dct",
        quality_param=q,
        num_bits=8 * len(payload),
        source_image_id=image_id,
        payload=payload,
    )


def parse_header(payload: bytes) -> tuple[int, int, int]:
    """Validate the header and return (width, height, q)."""
    if len(payload) < HEADER_SIZE:
        raise BitstreamError(
            f"payload of {len(payload)} bytes is shorter than the {HEADER_SIZE}-byte header"
        )
    magic, version, width, height, q = struct.unpack(HEADER_FORMAT, payload[:HEADER_SIZE])
    if magic != MAGIC:
        raise BitstreamError(f"bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise BitstreamError(f"unsupported bitstream version {version}")
    if not 1 <= q <= 100:
        raise BitstreamError(f"corrupt header: quality {q} out of 1..100")
    if width == 0 or height == 0 or width % 2 or height % 2:
        raise BitstreamError(f"corrupt header: bad dimensions {width}x{height}")
    if width * height > _MAX_PIXELS:
        raise BitstreamError(f"corrupt header: implausible dimensions {width}x{height}")
    return width, height, q


def toy_decode(artifact: EncodedArtifact) -> PlanarImage:
    """Decode a builtin-codec artifact back to an 8-bit RGB image."""
    payload = artifact.payload
    if payload is None:
        payload = artifact.bitstream_path.read_bytes()
    width, height, q = parse_header(payload)
    shapes = _plane_shapes(width, height)
    counts = [((h + 7) // 8) * ((w + 7) // 8) for h, w in shapes]
    vectors = kernels.decode_coefficients(payload[HEADER_SIZE:], sum(counts))
    steps = quant_steps(q)
    planes = []
    offset = 0
    for (h, w), count in zip(shapes, counts):
        vecs = vectors[offset : offset + count]
        offset += count
        blocks = np.zeros((count, 64), dtype=np.float64)
        blocks[:, _ZIGZAG] = vecs
        blocks = blocks.reshape(-1, 8, 8) * steps
        pixels = _DCT.T @ blocks @ _DCT + 128.0
        padded = _from_blocks(pixels, h + (-h % 8), w + (-w % 8))
        plane = np.clip(round_half_away(padded[:h, :w]), 0, 255).astype(np.uint8)
        planes.append(plane)
    ycc = PlanarImage(width, height, 8, ColorSpace.YCBCR420, tuple(planes))
    return ycbcr420_to_rgb(ycc)

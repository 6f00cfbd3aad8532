"""Planar image representation and color conversion.

Images are stored as ordered tuples of 2-D numpy sample planes together
with width/height, bit depth, and a color-space tag.  All conversions are
pure functions; plane arrays are marked read-only on construction so
instances can be shared freely across threads.

Color conversion uses the BT.601 limited-range matrix (Y in [16, 235],
Cb/Cr in [16, 240] before the final rounding clamp) with the luma and
chroma coefficients fixed to four decimals:

    Y  =  16 + (219/255) * ( 0.2990 R + 0.5870 G + 0.1140 B)
    Cb = 128 + (224/255) * (-0.1687 R - 0.3313 G + 0.5000 B)
    Cr = 128 + (224/255) * ( 0.5000 R - 0.4187 G - 0.0813 B)

Chroma is downsampled by 2x2 block averaging and upsampled by 2x2
replication.  Rounding is half-away-from-zero throughout, which keeps the
conversions bit-reproducible across platforms.  Chroma siting conventions
of specific encoder deployments are deliberately not modeled.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np


class ColorSpace(enum.Enum):
    RGB = "rgb"
    GRAY = "gray"
    YCBCR444 = "ycbcr444"
    YCBCR420 = "ycbcr420"


_PLANE_COUNT = {
    ColorSpace.RGB: 3,
    ColorSpace.GRAY: 1,
    ColorSpace.YCBCR444: 3,
    ColorSpace.YCBCR420: 3,
}

# Forward matrix rows already include the limited-range scale factors.
_KY = np.array([0.2990, 0.5870, 0.1140]) * (219.0 / 255.0)
_KCB = np.array([-0.1687, -0.3313, 0.5000]) * (224.0 / 255.0)
_KCR = np.array([0.5000, -0.4187, -0.0813]) * (224.0 / 255.0)
_FWD = np.stack([_KY, _KCB, _KCR])
_INV = np.linalg.inv(_FWD)


def round_half_away(x: np.ndarray) -> np.ndarray:
    """Round half away from zero (numpy rounds half to even)."""
    return np.copysign(np.floor(np.abs(x) + 0.5), x)


def _quantize(x: np.ndarray, bit_depth: int) -> np.ndarray:
    limit = (1 << bit_depth) - 1
    out = np.clip(round_half_away(x), 0, limit)
    return out.astype(np.uint8 if bit_depth == 8 else np.uint16)


@dataclass(frozen=True)
class PlanarImage:
    """Immutable multi-plane pixel buffer.

    ``planes`` is an ordered tuple of 2-D arrays; for YCbCr420 the chroma
    planes are exactly ceil(width/2) x ceil(height/2).
    """

    width: int
    height: int
    bit_depth: int
    color_space: ColorSpace
    planes: tuple[np.ndarray, ...]

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError(f"dimensions must be positive, got {self.width}x{self.height}")
        if self.bit_depth not in (8, 16):
            raise ValueError(f"bit depth must be 8 or 16, got {self.bit_depth}")
        expected = _PLANE_COUNT[self.color_space]
        if len(self.planes) != expected:
            raise ValueError(
                f"{self.color_space.value} requires {expected} planes, got {len(self.planes)}"
            )
        dtype = np.uint8 if self.bit_depth == 8 else np.uint16
        planes = []
        for i, plane in enumerate(self.planes):
            arr = np.asarray(plane)
            if arr.ndim != 2:
                raise ValueError(f"plane {i} must be 2-D, got shape {arr.shape}")
            if arr.dtype != dtype:
                if not np.issubdtype(arr.dtype, np.integer):
                    raise ValueError(f"plane {i} has non-integer dtype {arr.dtype}")
                limit = (1 << self.bit_depth) - 1
                if arr.size and (arr.min() < 0 or arr.max() > limit):
                    raise ValueError(f"plane {i} has samples outside [0, {limit}]")
                arr = arr.astype(dtype)
            arr = arr.copy()
            arr.flags.writeable = False
            planes.append(arr)
        object.__setattr__(self, "planes", tuple(planes))
        self._check_plane_dims()

    def _check_plane_dims(self):
        w, h = self.width, self.height
        if self.color_space is ColorSpace.YCBCR420:
            if w % 2 or h % 2:
                raise ValueError(f"YCbCr420 requires even dimensions, got {w}x{h}")
            cw, ch = (w + 1) // 2, (h + 1) // 2
            expect = [(h, w), (ch, cw), (ch, cw)]
        else:
            expect = [(h, w)] * len(self.planes)
        for i, (plane, shape) in enumerate(zip(self.planes, expect)):
            if plane.shape != shape:
                raise ValueError(
                    f"plane {i} has shape {plane.shape}, expected {shape} for "
                    f"{self.color_space.value} {w}x{h}"
                )

    @property
    def max_value(self) -> int:
        return (1 << self.bit_depth) - 1

    @property
    def num_pixels(self) -> int:
        return self.width * self.height

    def same_geometry(self, other: "PlanarImage") -> bool:
        return (
            self.width == other.width
            and self.height == other.height
            and self.bit_depth == other.bit_depth
            and self.color_space == other.color_space
        )


def from_rgb_array(arr: np.ndarray) -> PlanarImage:
    """Build an RGB PlanarImage from an (H, W, 3) uint8/uint16 array."""
    arr = np.asarray(arr)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(f"expected (H, W, 3) array, got shape {arr.shape}")
    depth = 16 if arr.dtype == np.uint16 else 8
    h, w = arr.shape[:2]
    return PlanarImage(w, h, depth, ColorSpace.RGB, tuple(arr[:, :, c] for c in range(3)))


def from_gray_array(arr: np.ndarray) -> PlanarImage:
    arr = np.asarray(arr)
    if arr.ndim != 2:
        raise ValueError(f"expected 2-D array, got shape {arr.shape}")
    depth = 16 if arr.dtype == np.uint16 else 8
    h, w = arr.shape
    return PlanarImage(w, h, depth, ColorSpace.GRAY, (arr,))


def to_interleaved(img: PlanarImage) -> np.ndarray:
    """Return (H, W, C) or (H, W) array; requires equal-size planes."""
    if img.color_space is ColorSpace.YCBCR420:
        raise ValueError("cannot interleave subsampled planes")
    if len(img.planes) == 1:
        return img.planes[0].copy()
    return np.stack(img.planes, axis=-1)


def rgb_to_ycbcr420(img: PlanarImage) -> PlanarImage:
    """Convert 8-bit RGB to BT.601 limited-range YCbCr 4:2:0.

    Chroma planes are produced by 2x2 mean over the full-resolution Cb/Cr
    before the single rounding step.
    """
    if img.color_space is not ColorSpace.RGB:
        raise ValueError(f"expected RGB input, got {img.color_space.value}")
    if img.bit_depth != 8:
        raise ValueError(f"expected 8-bit input, got {img.bit_depth}")
    if img.width % 2 or img.height % 2:
        raise ValueError(f"dimensions must be even for 4:2:0, got {img.width}x{img.height}")
    rgb = np.stack([p.astype(np.float64) for p in img.planes])
    y = 16.0 + np.tensordot(_KY, rgb, axes=1)
    cb = 128.0 + np.tensordot(_KCB, rgb, axes=1)
    cr = 128.0 + np.tensordot(_KCR, rgb, axes=1)
    h, w = y.shape
    sub = lambda c: c.reshape(h // 2, 2, w // 2, 2).mean(axis=(1, 3))
    planes = (_quantize(y, 8), _quantize(sub(cb), 8), _quantize(sub(cr), 8))
    return PlanarImage(img.width, img.height, 8, ColorSpace.YCBCR420, planes)


def ycbcr420_to_rgb(img: PlanarImage) -> PlanarImage:
    """Convert BT.601 limited-range YCbCr 4:2:0 back to 8-bit RGB.

    Chroma is upsampled by nearest-neighbor 2x2 replication.
    """
    if img.color_space is not ColorSpace.YCBCR420:
        raise ValueError(f"expected YCbCr420 input, got {img.color_space.value}")
    y = img.planes[0].astype(np.float64) - 16.0
    up = lambda c: np.repeat(np.repeat(c, 2, axis=0), 2, axis=1)[: img.height, : img.width]
    cb = up(img.planes[1].astype(np.float64)) - 128.0
    cr = up(img.planes[2].astype(np.float64)) - 128.0
    ycc = np.stack([y, cb, cr])
    rgb = np.tensordot(_INV, ycc, axes=1)
    planes = tuple(_quantize(rgb[c], 8) for c in range(3))
    return PlanarImage(img.width, img.height, 8, ColorSpace.RGB, planes)


def luma_plane(img: PlanarImage) -> np.ndarray:
    """Float64 luma plane: Y for YCbCr, the sole plane for Gray, and the
    full-range BT.601 luma (0.2990 R + 0.5870 G + 0.1140 B, unrounded)
    for RGB."""
    if img.color_space in (ColorSpace.YCBCR444, ColorSpace.YCBCR420):
        return img.planes[0].astype(np.float64)
    if img.color_space is ColorSpace.GRAY:
        return img.planes[0].astype(np.float64)
    r, g, b = (p.astype(np.float64) for p in img.planes)
    return 0.2990 * r + 0.5870 * g + 0.1140 * b

"""Lossless image file I/O.

Supported containers:

* PNG  -- read: 8-bit RGB/Gray and 16-bit Gray; write: 8-bit RGB/Gray.
* PPM  -- binary P6, 8- or 16-bit (16-bit samples big-endian per netpbm).
* PGM  -- binary P5, 8- or 16-bit.

The file extension selects the format on save.  Save-then-load round
trips are bit identical.
"""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np
from PIL import Image

from vcmbench.errors import ImageFormatError
from vcmbench.images import ColorSpace, PlanarImage, from_gray_array, from_rgb_array, to_interleaved

# Guards against absurd header-declared dimensions before allocating.
_MAX_PIXELS = 1 << 31


def load_image(path) -> PlanarImage:
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".png":
        return _load_png(path)
    if suffix in (".ppm", ".pgm"):
        return _load_netpbm(path)
    raise ImageFormatError(f"unsupported container {suffix!r} for {path}")


def save_image(img: PlanarImage, path) -> None:
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".png":
        _save_png(img, path)
    elif suffix == ".ppm":
        _save_netpbm(img, path, magic=b"P6", want=ColorSpace.RGB)
    elif suffix == ".pgm":
        _save_netpbm(img, path, magic=b"P5", want=ColorSpace.GRAY)
    else:
        raise ImageFormatError(f"unsupported container {suffix!r} for {path}")


def _load_png(path: Path) -> PlanarImage:
    try:
        with Image.open(path) as im:
            im.load()
            mode = im.mode
            if mode == "RGB":
                return from_rgb_array(np.asarray(im, dtype=np.uint8))
            if mode == "L":
                return from_gray_array(np.asarray(im, dtype=np.uint8))
            if mode in ("I", "I;16", "I;16B"):
                arr = np.asarray(im)
                if arr.size and (arr.min() < 0 or arr.max() > 65535):
                    raise ImageFormatError(f"{path}: samples outside 16-bit range")
                return from_gray_array(arr.astype(np.uint16))
            raise ImageFormatError(f"{path}: unsupported PNG mode {mode!r}")
    except ImageFormatError:
        raise
    except FileNotFoundError:
        raise
    except Exception as exc:
        raise ImageFormatError(f"{path}: not a valid PNG ({exc})") from exc


def _save_png(img: PlanarImage, path: Path) -> None:
    if img.bit_depth != 8:
        raise ImageFormatError("PNG write supports 8-bit images only")
    if img.color_space is ColorSpace.RGB:
        pil = Image.fromarray(to_interleaved(img), mode="RGB")
    elif img.color_space is ColorSpace.GRAY:
        pil = Image.fromarray(img.planes[0], mode="L")
    else:
        raise ImageFormatError(f"PNG write supports RGB/Gray, not {img.color_space.value}")
    pil.save(path, format="PNG")


def _read_token(f) -> bytes:
    # netpbm tokens are separated by whitespace; '#' starts a comment.
    token = b""
    while True:
        c = f.read(1)
        if not c:
            if token:
                return token
            raise ImageFormatError("truncated header")
        if c == b"#":
            while c and c != b"\n":
                c = f.read(1)
            continue
        if c.isspace():
            if token:
                return token
            continue
        token += c


def _load_netpbm(path: Path) -> PlanarImage:
    with open(path, "rb") as f:
        magic = f.read(2)
        if magic not in (b"P5", b"P6"):
            raise ImageFormatError(f"{path}: bad magic {magic!r}")
        try:
            width = int(_read_token(f))
            height = int(_read_token(f))
            maxval = int(_read_token(f))
        except ValueError as exc:
            raise ImageFormatError(f"{path}: malformed header") from exc
        if width <= 0 or height <= 0:
            raise ImageFormatError(f"{path}: non-positive dimensions {width}x{height}")
        channels = 3 if magic == b"P6" else 1
        if width * height * channels > _MAX_PIXELS:
            raise ImageFormatError(f"{path}: dimension overflow {width}x{height}")
        if maxval == 255:
            dtype, depth = np.dtype(np.uint8), 8
        elif maxval == 65535:
            dtype, depth = np.dtype(">u2"), 16
        else:
            raise ImageFormatError(f"{path}: unsupported maxval {maxval}")
        need = width * height * channels * dtype.itemsize
        payload = f.read(need)
        if len(payload) < need:
            raise ImageFormatError(
                f"{path}: truncated payload ({len(payload)} of {need} bytes)"
            )
        arr = np.frombuffer(payload, dtype=dtype)
        if depth == 16:
            arr = arr.astype(np.uint16)
        if channels == 3:
            return from_rgb_array(arr.reshape(height, width, 3))
        return from_gray_array(arr.reshape(height, width))


def _save_netpbm(img: PlanarImage, path: Path, *, magic: bytes, want: ColorSpace) -> None:
    if img.color_space is not want:
        raise ImageFormatError(
            f"{path.suffix} requires {want.value} images, got {img.color_space.value}"
        )
    maxval = img.max_value
    buf = io.BytesIO()
    buf.write(magic + b"\n%d %d\n%d\n" % (img.width, img.height, maxval))
    data = to_interleaved(img)
    if img.bit_depth == 16:
        data = data.astype(">u2")
    buf.write(data.tobytes())
    path.write_bytes(buf.getvalue())

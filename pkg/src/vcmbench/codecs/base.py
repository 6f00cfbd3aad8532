"""Codec descriptions and encoded-bitstream records.

A ``CodecSpec`` names a codec and its quality grid.  Builtin codecs run
in-process; external ones are shelled out to via command templates with
``{input}``, ``{bitstream}``, ``{recon}`` and ``{q}`` placeholders.  An
``EncodedArtifact`` is one encoder output with its measured bit count.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

KIND_BUILTIN = "builtin_dct"
KIND_EXTERNAL = "external"

PLACEHOLDERS = ("input", "bitstream", "recon", "q")
ENCODE_REQUIRED = ("input", "bitstream", "q")
DECODE_REQUIRED = ("bitstream", "recon")

_NAME_RE = re.compile(r"^[A-Za-z0-9][A-Za-z0-9._-]*$")
_PLACEHOLDER_RE = re.compile(r"\{([a-z_]+)\}")


def _check_template(template: str, required: tuple[str, ...], which: str) -> None:
    found = _PLACEHOLDER_RE.findall(template)
    unknown = sorted(set(found) - set(PLACEHOLDERS))
    if unknown:
        raise ValueError(f"{which} template has unknown placeholders: {unknown}")
    for name in PLACEHOLDERS:
        count = found.count(name)
        if name in required and count != 1:
            raise ValueError(
                f"{which} template must contain {{{name}}} exactly once, found {count}"
            )
        if name not in required and count > 1:
            raise ValueError(f"{which} template repeats {{{name}}}")


@dataclass(frozen=True)
class CodecSpec:
    """Identity, quality grid, and (for external codecs) command templates."""

    name: str
    kind: str
    quality_levels: tuple[int, ...]
    encode_template: str = ""
    decode_template: str = ""
    workdir: Path | None = None

    def __post_init__(self) -> None:
        if not _NAME_RE.match(self.name):
            raise ValueError(f"codec name {self.name!r} is not filesystem-safe")
        if self.kind not in (KIND_BUILTIN, KIND_EXTERNAL):
            raise ValueError(f"unknown codec kind {self.kind!r}")
        levels = tuple(self.quality_levels)
        object.__setattr__(self, "quality_levels", levels)
        if len(levels) < 2:
            raise ValueError("need at least 2 quality levels")
        if len(set(levels)) != len(levels):
            raise ValueError("quality levels must be unique")
        if not all(isinstance(q, int) and not isinstance(q, bool) for q in levels):
            raise ValueError("quality levels must be integers")
        if self.kind == KIND_BUILTIN:
            if self.encode_template or self.decode_template:
                raise ValueError("builtin codecs take no command templates")
        else:
            if not self.encode_template or not self.decode_template:
                raise ValueError("external codecs need encode and decode templates")
            _check_template(self.encode_template, ENCODE_REQUIRED, "encode")
            _check_template(self.decode_template, DECODE_REQUIRED, "decode")
        if self.workdir is not None:
            object.__setattr__(self, "workdir", Path(self.workdir))


@dataclass(frozen=True)
class EncodedArtifact:
    """One encoder output: either an in-memory payload or a bitstream file."""

    codec_name: str
    quality_param: int
    num_bits: int
    source_image_id: str
    payload: bytes | None = None
    bitstream_path: Path | None = field(default=None)

    def __post_init__(self) -> None:
        if (self.payload is None) == (self.bitstream_path is None):
            raise ValueError("exactly one of payload and bitstream_path must be set")
        if self.num_bits <= 0:
            raise ValueError("num_bits must be positive")
        if self.payload is not None and self.num_bits != 8 * len(self.payload):
            raise ValueError(
                f"num_bits {self.num_bits} != 8 x payload length {len(self.payload)}"
            )
        if self.bitstream_path is not None:
            object.__setattr__(self, "bitstream_path", Path(self.bitstream_path))

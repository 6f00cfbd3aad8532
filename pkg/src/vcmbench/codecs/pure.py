"""Pure-Python coefficient-stream codec, the fallback for the compiled
kernel in ``_speedups``.

The stream is a sequence of 64-coefficient zigzagged blocks.  Per block,
tokens are (zero-run, level) pairs: the run is unsigned exp-Golomb, the
non-zero level signed exp-Golomb.  A run that lands exactly on the block
end means "rest of block is zero" and carries no level, which makes each
block self-terminating without an explicit end marker.  A run crossing
the block end or a zero level is a corruption error.
"""

from __future__ import annotations

import numpy as np

from vcmbench.codecs.bitio import BitReader, BitWriter
from vcmbench.errors import BitstreamError

BLOCK_SIZE = 64


def encode_coefficients(blocks: np.ndarray) -> bytes:
    """Encode an (n_blocks, 64) int array into a byte-aligned stream."""
    blocks = np.ascontiguousarray(blocks, dtype=np.int64)
    if blocks.ndim != 2 or blocks.shape[1] != BLOCK_SIZE:
        raise ValueError(f"expected (n, {BLOCK_SIZE}) array, got shape {blocks.shape}")
    writer = BitWriter()
    for block in blocks:
        pos = 0
        for idx in np.flatnonzero(block):
            writer.write_ue(int(idx) - pos)
            writer.write_se(int(block[idx]))
            pos = int(idx) + 1
        if pos < BLOCK_SIZE:
            writer.write_ue(BLOCK_SIZE - pos)
    return writer.getvalue()


def decode_coefficients(payload: bytes, n_blocks: int) -> np.ndarray:
    """Decode ``n_blocks`` blocks from a byte-aligned stream."""
    reader = BitReader(payload)
    out = np.zeros((n_blocks, BLOCK_SIZE), dtype=np.int32)
    for b in range(n_blocks):
        pos = 0
        while pos < BLOCK_SIZE:
            try:
                run = reader.read_ue()
            except BitstreamError:
                raise BitstreamError(f"block {b}: truncated or corrupt stream") from None
            if pos + run == BLOCK_SIZE:
                pos = BLOCK_SIZE
                continue
            if pos + run > BLOCK_SIZE:
                raise BitstreamError(
                    f"block {b}: run of {run} overflows past block end at position {pos}"
                )
            pos += run
            try:
                level = reader.read_se()
            except BitstreamError:
                raise BitstreamError(f"block {b}: truncated or corrupt stream") from None
            if level == 0:
                raise BitstreamError(f"block {b}: zero level at position {pos}")
            if not -(1 << 31) <= level < (1 << 31):
                raise BitstreamError(f"block {b}: level {level} out of range")
            out[b, pos] = level
            pos += 1
    return out

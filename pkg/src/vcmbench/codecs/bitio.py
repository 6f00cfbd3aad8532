"""MSB-first bit stream I/O and exp-Golomb codes.

Unsigned exp-Golomb writes value+1 in binary preceded by one leading
zero per significant bit beyond the first.  Signed values map positive k
to code number 2k-1 and non-positive k to -2k before unsigned coding.
Code numbers are capped at 32 prefix zeros on read so corrupt streams
fail fast instead of materializing absurd symbols.
"""

from __future__ import annotations

from vcmbench.errors import BitstreamError

_MAX_PREFIX_ZEROS = 32


class BitWriter:
    def __init__(self):
        self._buffer = bytearray()
        self._accum = 0
        self._nbits = 0

    def write_bit(self, bit: int) -> None:
        self._accum = (self._accum << 1) | (bit & 1)
        self._nbits += 1
        if self._nbits == 8:
            self._buffer.append(self._accum)
            self._accum = 0
            self._nbits = 0

    def write_bits(self, value: int, count: int) -> None:
        for shift in range(count - 1, -1, -1):
            self.write_bit((value >> shift) & 1)

    def write_ue(self, value: int) -> None:
        if value < 0:
            raise ValueError(f"unsigned exp-Golomb needs value >= 0, got {value}")
        code = value + 1
        nbits = code.bit_length()
        self.write_bits(0, nbits - 1)
        self.write_bits(code, nbits)

    def write_se(self, value: int) -> None:
        self.write_ue(2 * value - 1 if value > 0 else -2 * value)

    def getvalue(self) -> bytes:
        """Zero-pad to a byte boundary and return the stream."""
        out = bytearray(self._buffer)
        if self._nbits:
            out.append(self._accum << (8 - self._nbits))
        return bytes(out)

    def __len__(self) -> int:
        return len(self._buffer) * 8 + self._nbits


class BitReader:
    def __init__(self, data: bytes):
        self._data = data
        self._pos = 0

    @property
    def bits_left(self) -> int:
        return len(self._data) * 8 - self._pos

    def read_bit(self) -> int:
        if self._pos >= len(self._data) * 8:
            raise BitstreamError("truncated stream: ran out of bits")
        byte = self._data[self._pos >> 3]
        bit = (byte >> (7 - (self._pos & 7))) & 1
        self._pos += 1
        return bit

    def read_bits(self, count: int) -> int:
        value = 0
        for _ in range(count):
            value = (value << 1) | self.read_bit()
        return value

    def read_ue(self) -> int:
        zeros = 0
        while self.read_bit() == 0:
            zeros += 1
            if zeros > _MAX_PREFIX_ZEROS:
                raise BitstreamError("corrupt stream: exp-Golomb prefix too long")
        return (1 << zeros) - 1 + self.read_bits(zeros)

    def read_se(self) -> int:
        code = self.read_ue()
        if code & 1:
            return (code + 1) >> 1
        return -(code >> 1)

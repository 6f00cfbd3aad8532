# Compiled coefficient-stream codec. Mirrors vcmbench.codecs.pure
# bit-exactly; pure.py documents the stream layout.

from libc.stdlib cimport free, malloc, realloc

import numpy as np

cimport numpy as cnp

from vcmbench.errors import BitstreamError

cnp.import_array()

cdef enum:
    BLOCK_SIZE = 64
    MAX_PREFIX_ZEROS = 32


cdef struct Writer:
    unsigned char *data
    size_t cap
    size_t nbytes
    unsigned int accum
    int nbits


cdef int _writer_init(Writer *w, size_t cap) noexcept nogil:
    w.data = <unsigned char *> malloc(cap)
    if w.data == NULL:
        return -1
    w.cap = cap
    w.nbytes = 0
    w.accum = 0
    w.nbits = 0
    return 0


cdef inline int _write_bits(Writer *w, unsigned long long value, int count) noexcept nogil:
    cdef int shift
    cdef unsigned char *grown
    for shift in range(count - 1, -1, -1):
        w.accum = (w.accum << 1) | <unsigned int> ((value >> shift) & 1)
        w.nbits += 1
        if w.nbits == 8:
            if w.nbytes == w.cap:
                grown = <unsigned char *> realloc(w.data, w.cap * 2)
                if grown == NULL:
                    return -1
                w.data = grown
                w.cap = w.cap * 2
            w.data[w.nbytes] = <unsigned char> w.accum
            w.nbytes += 1
            w.accum = 0
            w.nbits = 0
    return 0


cdef inline int _write_ue(Writer *w, unsigned long long value) noexcept nogil:
    cdef unsigned long long code = value + 1
    cdef unsigned long long tmp = code
    cdef int nbits = 0
    while tmp:
        nbits += 1
        tmp >>= 1
    if _write_bits(w, 0, nbits - 1) < 0:
        return -1
    return _write_bits(w, code, nbits)


cdef inline int _write_se(Writer *w, long long value) noexcept nogil:
    if value > 0:
        return _write_ue(w, 2 * <unsigned long long> value - 1)
    return _write_ue(w, <unsigned long long> (-2 * value))


cdef struct Reader:
    const unsigned char *data
    size_t total_bits
    size_t pos


cdef inline int _read_bit(Reader *r) noexcept nogil:
    cdef int bit
    if r.pos >= r.total_bits:
        return -1
    bit = (r.data[r.pos >> 3] >> (7 - (r.pos & 7))) & 1
    r.pos += 1
    return bit


cdef long long _read_ue(Reader *r) noexcept nogil:
    # >= 0 on success, -1 truncated, -2 prefix overlong
    cdef int zeros = 0
    cdef int bit
    cdef unsigned long long value
    cdef int k
    while True:
        bit = _read_bit(r)
        if bit < 0:
            return -1
        if bit == 1:
            break
        zeros += 1
        if zeros > MAX_PREFIX_ZEROS:
            return -2
    value = 1
    for k in range(zeros):
        bit = _read_bit(r)
        if bit < 0:
            return -1
        value = (value << 1) | <unsigned long long> bit
    return <long long> (value - 1)


def encode_coefficients(blocks):
    """Encode an (n_blocks, 64) int array into a byte-aligned stream."""
    arr = np.ascontiguousarray(blocks, dtype=np.int64)
    if arr.ndim != 2 or arr.shape[1] != BLOCK_SIZE:
        raise ValueError(f"expected (n, {BLOCK_SIZE}) array, got shape {arr.shape}")
    cdef const cnp.int64_t[:, ::1] view = arr
    cdef Py_ssize_t n = view.shape[0]
    cdef Writer w
    if _writer_init(&w, 4096) < 0:
        raise MemoryError()
    cdef Py_ssize_t b
    cdef int pos, i, rc
    cdef cnp.int64_t level
    rc = 0
    with nogil:
        for b in range(n):
            pos = 0
            for i in range(BLOCK_SIZE):
                level = view[b, i]
                if level != 0:
                    rc = _write_ue(&w, <unsigned long long> (i - pos))
                    if rc < 0:
                        break
                    rc = _write_se(&w, level)
                    if rc < 0:
                        break
                    pos = i + 1
            if rc < 0:
                break
            if pos < BLOCK_SIZE:
                rc = _write_ue(&w, <unsigned long long> (BLOCK_SIZE - pos))
                if rc < 0:
                    break
    if rc < 0:
        free(w.data)
        raise MemoryError()
    if w.nbits:
        # flush the final partial byte, zero-padded
        if _write_bits(&w, 0, 8 - w.nbits) < 0:
            free(w.data)
            raise MemoryError()
    out = bytes(w.data[:w.nbytes])
    free(w.data)
    return out


def decode_coefficients(payload, Py_ssize_t n_blocks):
    """Decode ``n_blocks`` blocks from a byte-aligned stream."""
    cdef const unsigned char[::1] data = payload
    cdef Reader r
    r.data = &data[0] if data.shape[0] else NULL
    r.total_bits = <size_t> data.shape[0] * 8
    r.pos = 0
    out = np.zeros((n_blocks, BLOCK_SIZE), dtype=np.int32)
    cdef cnp.int32_t[:, ::1] view = out
    cdef Py_ssize_t b = 0
    cdef int pos = 0
    cdef long long run, code, level
    cdef int fail = 0  # 1 truncated/prefix, 2 overflow, 3 zero level
    with nogil:
        for b in range(n_blocks):
            pos = 0
            while pos < BLOCK_SIZE:
                run = _read_ue(&r)
                if run < 0:
                    fail = 1
                    break
                if pos + run == BLOCK_SIZE:
                    pos = BLOCK_SIZE
                    continue
                if pos + run > BLOCK_SIZE:
                    fail = 2
                    break
                pos += <int> run
                code = _read_ue(&r)
                if code < 0:
                    fail = 1
                    break
                if code & 1:
                    level = (code + 1) >> 1
                else:
                    level = -(code >> 1)
                if level == 0:
                    fail = 3
                    break
                if level >= (<long long> 1 << 31) or level < -(<long long> 1 << 31):
                    fail = 4
                    break
                view[b, pos] = <cnp.int32_t> level
                pos += 1
            if fail:
                break
    if fail == 2:
        raise BitstreamError(
            f"block {b}: run of {run} overflows past block end at position {pos}"
        )
    if fail == 3:
        raise BitstreamError(f"block {b}: zero level at position {pos}")
    if fail == 4:
        raise BitstreamError(f"block {b}: level {level} out of range")
    if fail:
        raise BitstreamError(f"block {b}: truncated or corrupt stream")
    return out

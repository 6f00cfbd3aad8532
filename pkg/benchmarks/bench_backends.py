#!/usr/bin/env python3
"""Compare the compiled and pure-Python entropy-coding backends.

Times the run/level coder on synthetic coefficient blocks, then the
whole builtin codec with each backend swapped in, and prints a small
table with the speedup.  Numbers are best-of-``--repeats`` wall time.

Usage:
    python3 benchmarks/bench_backends.py [--blocks N] [--repeats R] [--size S]
"""

from __future__ import annotations

import argparse
import time
from contextlib import contextmanager

import numpy as np

from vcmbench.codecs import kernels, pure
from vcmbench.codecs.toy import toy_decode, toy_encode
from vcmbench.synthetic import synthetic_image

try:
    from vcmbench.codecs import _speedups as native
except ImportError:
    native = None


def make_blocks(n_blocks: int, seed: int = 7) -> np.ndarray:
    """Sparse int64 blocks shaped like quantized transform output."""
    rng = np.random.default_rng(seed)
    blocks = np.zeros((n_blocks, 64), dtype=np.int64)
    blocks[:, 0] = rng.integers(-200, 201, n_blocks)  # DC
    for i in range(n_blocks):
        n_ac = int(rng.integers(2, 14))
        idx = rng.choice(np.arange(1, 64), size=n_ac, replace=False)
        blocks[i, idx] = rng.integers(-40, 41, n_ac)
        blocks[i, idx] = np.where(blocks[i, idx] == 0, 1, blocks[i, idx])
    return blocks


def best_of(fn, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


@contextmanager
def backend(impl):
    """Temporarily route the codec through one backend's kernels."""
    saved = (kernels.encode_coefficients, kernels.decode_coefficients)
    kernels.encode_coefficients = impl.encode_coefficients
    kernels.decode_coefficients = impl.decode_coefficients
    try:
        yield
    finally:
        kernels.encode_coefficients, kernels.decode_coefficients = saved


def bench_kernels(impl, blocks: np.ndarray, repeats: int) -> tuple[float, float]:
    payload = impl.encode_coefficients(blocks)
    t_enc = best_of(lambda: impl.encode_coefficients(blocks), repeats)
    t_dec = best_of(lambda: impl.decode_coefficients(payload, len(blocks)), repeats)
    return t_enc, t_dec


def bench_codec(impl, image, repeats: int) -> tuple[float, float]:
    with backend(impl):
        artifact = toy_encode(image, 50, "bench")
        t_enc = best_of(lambda: toy_encode(image, 50, "bench"), repeats)
        t_dec = best_of(lambda: toy_decode(artifact), repeats)
    return t_enc, t_dec


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--blocks", type=int, default=20_000)
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--size", type=int, default=256, help="test image edge length")
    args = parser.parse_args()

    if native is None:
        print("compiled backend not built; showing pure-Python numbers only")
    print(f"active backend at import time: {kernels.BACKEND}")
    print()

    blocks = make_blocks(args.blocks)
    image = synthetic_image(0, args.size, args.size)
    rows = []

    pure_enc, pure_dec = bench_kernels(pure, blocks, args.repeats)
    rows.append(("run/level encode", f"{args.blocks} blocks", pure_enc, None))
    rows.append(("run/level decode", f"{args.blocks} blocks", pure_dec, None))
    if native is not None:
        check = native.encode_coefficients(blocks)
        if check != pure.encode_coefficients(blocks):
            raise SystemExit("backends disagree; benchmark aborted")
        nat_enc, nat_dec = bench_kernels(native, blocks, args.repeats)
        rows[0] = ("run/level encode", f"{args.blocks} blocks", pure_enc, nat_enc)
        rows[1] = ("run/level decode", f"{args.blocks} blocks", pure_dec, nat_dec)

    codec_label = f"{args.size}x{args.size} q=50"
    pure_enc, pure_dec = bench_codec(pure, image, args.repeats)
    if native is not None:
        nat_enc, nat_dec = bench_codec(native, image, args.repeats)
        rows.append(("codec encode", codec_label, pure_enc, nat_enc))
        rows.append(("codec decode", codec_label, pure_dec, nat_dec))
    else:
        rows.append(("codec encode", codec_label, pure_enc, None))
        rows.append(("codec decode", codec_label, pure_dec, None))

    header = f"{'operation':<18} {'workload':<16} {'pure':>10} {'native':>10} {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for op, workload, t_pure, t_native in rows:
        pure_ms = f"{t_pure * 1e3:8.2f}ms"
        if t_native is None:
            print(f"{op:<18} {workload:<16} {pure_ms:>10} {'-':>10} {'-':>8}")
        else:
            native_ms = f"{t_native * 1e3:8.2f}ms"
            print(
                f"{op:<18} {workload:<16} {pure_ms:>10} {native_ms:>10} "
                f"{t_pure / t_native:>7.1f}x"
            )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

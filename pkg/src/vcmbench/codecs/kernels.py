"""Entropy-coding backend selection.

The compiled kernel in ``_speedups`` and the fallback in ``pure`` produce
bit-identical streams; the compiled one is only faster.  Import order:

* ``VCMBENCH_PURE_PYTHON=1`` in the environment forces the fallback,
* otherwise ``_speedups`` is used when the extension built,
* otherwise the fallback loads silently.

``BACKEND`` names the active implementation ("native" or "pure").
"""

from __future__ import annotations

import os

if os.environ.get("VCMBENCH_PURE_PYTHON"):
    _impl = None
else:
    try:
        from vcmbench.codecs import _speedups as _impl
    except ImportError:
        _impl = None

if _impl is not None:
    BACKEND = "native"
    encode_coefficients = _impl.encode_coefficients
    decode_coefficients = _impl.decode_coefficients
else:
    from vcmbench.codecs import pure as _impl

    BACKEND = "pure"
    encode_coefficients = _impl.encode_coefficients
    decode_coefficients = _impl.decode_coefficients

__all__ = ["BACKEND", "encode_coefficients", "decode_coefficients"]

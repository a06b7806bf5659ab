"""Kernel backend selection: compiled extension if built, pure Python otherwise.

Both backends are bit-identical by contract; set STEPMARK_PURE_KERNELS=1
to force the fallback (used by the parity tests and the benchmark).
"""

from __future__ import annotations

import os

from . import _pure

if os.environ.get("STEPMARK_PURE_KERNELS"):
    _impl = _pure
else:
    try:
        from . import _core as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _pure

BACKEND = _impl.BACKEND
mix64 = _impl.mix64
fnv1a64 = _impl.fnv1a64
stream_key = _impl.stream_key
sample_rollout_batch = _impl.sample_rollout_batch

__all__ = [
    "BACKEND",
    "mix64",
    "fnv1a64",
    "stream_key",
    "sample_rollout_batch",
]

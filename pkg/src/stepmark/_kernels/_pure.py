"""Pure-Python reference implementation of the rollout sampling kernel.

The compiled extension (``_core``) mirrors this file operation for
operation; both must produce bit-identical output for the same key, so
every arithmetic step here is written in the exact order the C code
performs it.  Uniforms come from a counter-based splitmix64 stream,
gaussians from the Box-Muller transform.
"""

from __future__ import annotations

import math

BACKEND = "pure"

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_INV_2_53 = 1.0 / 9007199254740992.0  # 2^-53
_MIN_U = 1.1102230246251565e-16  # 2^-53, floor for log() input
_TWO_PI = 6.283185307179586


def mix64(z: int) -> int:
    """splitmix64 finalizer; full avalanche over 64 bits."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def fnv1a64(data: bytes) -> int:
    """FNV-1a hash of a byte string, used to key streams off identifiers."""
    h = 0xCBF29CE484222325
    for b in data:
        h = ((h ^ b) * 0x100000001B3) & _MASK64
    return h


def stream_key(*parts: int) -> int:
    """Combine integer components into one 64-bit stream key."""
    key = 0x51ED270B4C3B3D1D
    for p in parts:
        key = mix64((key ^ (p & _MASK64)) + _GOLDEN)
    return key


def sample_rollout_batch(
    base_key: int,
    start_index: int,
    n: int,
    lmin: int,
    lmax: int,
    p_correct: float,
    mean_correct: float,
    mean_incorrect: float,
    stddev: float,
):
    """Draw n deterministic rollouts from the stream rooted at base_key.

    Rollout i uses the substream for sample index start_index + i, so the
    result is independent of how the n draws are chunked across calls.
    Returns (correct_flags, logprob_lists).
    """
    correct_flags: list[bool] = []
    logprob_lists: list[list[float]] = []
    span = lmax - lmin + 1
    for i in range(n):
        state = mix64(base_key ^ ((_GOLDEN * (start_index + i + 1)) & _MASK64))

        state = (state + _GOLDEN) & _MASK64
        u = (mix64(state) >> 11) * _INV_2_53
        correct = u < p_correct

        state = (state + _GOLDEN) & _MASK64
        u = (mix64(state) >> 11) * _INV_2_53
        length = lmin + int(u * span)
        if length > lmax:
            length = lmax

        mean = mean_correct if correct else mean_incorrect
        logprobs = []
        for _ in range(length):
            state = (state + _GOLDEN) & _MASK64
            u1 = (mix64(state) >> 11) * _INV_2_53
            if u1 < _MIN_U:
                u1 = _MIN_U
            state = (state + _GOLDEN) & _MASK64
            u2 = (mix64(state) >> 11) * _INV_2_53
            z = math.sqrt(-2.0 * math.log(u1)) * math.cos(_TWO_PI * u2)
            lp = mean + stddev * z
            if lp > 0.0:
                lp = 0.0
            logprobs.append(lp)
        correct_flags.append(correct)
        logprob_lists.append(logprobs)
    return correct_flags, logprob_lists

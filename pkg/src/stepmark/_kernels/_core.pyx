# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled rollout sampling kernel.

Bit-for-bit mirror of ``_pure.py``; see that module for the layout of
the splitmix64 streams.  Any change here must be made there as well --
the parity test compares the two outputs exactly.
"""

from libc.math cimport log, sqrt, cos

BACKEND = "compiled"

cdef extern from *:
    ctypedef unsigned long long uint64_t "unsigned long long"

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL
cdef double INV_2_53 = 1.0 / 9007199254740992.0
cdef double MIN_U = 1.1102230246251565e-16
cdef double TWO_PI = 6.283185307179586


cdef inline uint64_t c_mix64(uint64_t z) nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


def mix64(z):
    """splitmix64 finalizer; full avalanche over 64 bits."""
    return c_mix64(<uint64_t> z)


def fnv1a64(data):
    """FNV-1a hash of a byte string, used to key streams off identifiers."""
    cdef const unsigned char[:] buf = data
    cdef uint64_t h = 0xCBF29CE484222325ULL
    cdef Py_ssize_t i
    for i in range(buf.shape[0]):
        h = (h ^ buf[i]) * 0x100000001B3ULL
    return h


def stream_key(*parts):
    """Combine integer components into one 64-bit stream key."""
    cdef uint64_t key = 0x51ED270B4C3B3D1DULL
    cdef uint64_t p
    for part in parts:
        p = <uint64_t> part
        key = c_mix64((key ^ p) + GOLDEN)
    return key


def sample_rollout_batch(
    base_key,
    start_index,
    n,
    lmin,
    lmax,
    p_correct,
    mean_correct,
    mean_incorrect,
    stddev,
):
    """Draw n deterministic rollouts from the stream rooted at base_key.

    Same contract as the pure fallback: rollout i uses the substream for
    sample index start_index + i.  Returns (correct_flags, logprob_lists).
    """
    cdef uint64_t key = <uint64_t> base_key
    cdef uint64_t state
    cdef long start = start_index
    cdef long count = n
    cdef long low = lmin
    cdef long high = lmax
    cdef long span = high - low + 1
    cdef double pc = p_correct
    cdef double mc = mean_correct
    cdef double mi = mean_incorrect
    cdef double sd = stddev
    cdef double u, u1, u2, z, lp, mean
    cdef long i, j, length
    cdef bint correct

    correct_flags = []
    logprob_lists = []
    for i in range(count):
        state = c_mix64(key ^ (GOLDEN * <uint64_t> (start + i + 1)))

        state = state + GOLDEN
        u = <double> (c_mix64(state) >> 11) * INV_2_53
        correct = u < pc

        state = state + GOLDEN
        u = <double> (c_mix64(state) >> 11) * INV_2_53
        length = low + <long> (u * span)
        if length > high:
            length = high

        mean = mc if correct else mi
        logprobs = []
        for j in range(length):
            state = state + GOLDEN
            u1 = <double> (c_mix64(state) >> 11) * INV_2_53
            if u1 < MIN_U:
                u1 = MIN_U
            state = state + GOLDEN
            u2 = <double> (c_mix64(state) >> 11) * INV_2_53
            z = sqrt(-2.0 * log(u1)) * cos(TWO_PI * u2)
            lp = mean + sd * z
            if lp > 0.0:
                lp = 0.0
            logprobs.append(lp)
        correct_flags.append(bool(correct))
        logprob_lists.append(logprobs)
    return correct_flags, logprob_lists

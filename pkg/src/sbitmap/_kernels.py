"""Jitted hot loops for the sketch and baselines.

Every kernel mirrors a pure-Python path bit for bit: the digest here
equals ``hashing.digest``/``hashing.digest_pairs``, the bucket/sampler
split equals ``hashing.split``, and the sampling compare uses the same
ceil-threshold table the sketch builds. Tests pin the equivalence.

Items arrive either as precomputed 64-bit digests or as synthetic
16-byte counter streams (stream_id, index) digested inline; the latter
saves materializing gigabytes of digests in the Monte Carlo sweeps.
All signatures are explicit so Python ints are cast on entry instead of
silently retyping the arithmetic.
"""

import numpy as np
from numba import int64, njit, types, uint8, uint64, void

# Read-only views (frozen rate tables, borrowed digest buffers) must be
# accepted alongside writable ones.
_U64_RO = types.Array(types.uint64, 1, "C", readonly=True)

_P1 = np.uint64(0x9E3779B185EBCA87)
_P2 = np.uint64(0xC2B2AE3D27D4EB4F)
_P3 = np.uint64(0x165667B19E3779F9)
_P4 = np.uint64(0x85EBCA77C2B2AE63)
_P5 = np.uint64(0x27D4EB2F165667C5)
_LEN16 = np.uint64(16)

_S3 = np.uint64(3)
_M7 = np.uint64(7)
_S27 = np.uint64(27)
_S29 = np.uint64(29)
_S31 = np.uint64(31)
_S32 = np.uint64(32)
_S33 = np.uint64(33)
_S37 = np.uint64(37)
_ONE = np.uint64(1)

# Rank window for register sketches: lowest 30 digest bits, ranks 1..31.
_RANK_MASK = np.uint64((1 << 30) - 1)
_RANK_TOP = np.uint64(1 << 29)


@njit(uint64(uint64, uint64), cache=True)
def _mix(h, word):
    word = word * _P2
    word = ((word << _S31) | (word >> _S33)) * _P1
    h ^= word
    return ((h << _S27) | (h >> _S37)) * _P1 + _P4


@njit(uint64(uint64), cache=True)
def _avalanche(h):
    h ^= h >> _S33
    h *= _P2
    h ^= h >> _S29
    h *= _P3
    h ^= h >> _S32
    return h


@njit(uint64(uint64, uint64, uint64), cache=True)
def digest16(seed, hi, lo):
    h = seed + _P5 + _LEN16
    h = _mix(h, hi)
    h = _mix(h, lo)
    return _avalanche(h)


@njit(uint64(uint8[::1], uint64, _U64_RO, _U64_RO, uint64, uint64), cache=True)
def sbitmap_update_digests(bits, fill, thresholds, digests, m, sampler_mask):
    for i in range(digests.size):
        h = digests[i]
        j = ((h >> _S32) * m) >> _S32
        byte = j >> _S3
        mask = np.uint8(_ONE << (j & _M7))
        if bits[byte] & mask == 0:
            if (h & sampler_mask) < thresholds[fill + _ONE]:
                bits[byte] |= mask
                fill += _ONE
    return fill


@njit(
    uint64(uint8[::1], uint64, _U64_RO, uint64, uint64, int64, uint64, uint64),
    cache=True,
)
def sbitmap_consume_counter(
    bits, fill, thresholds, seed, stream_id, count, m, sampler_mask
):
    init = seed + _P5 + _LEN16
    base = _mix(init, stream_id)
    for i in range(count):
        h = _avalanche(_mix(base, uint64(i)))
        j = ((h >> _S32) * m) >> _S32
        byte = j >> _S3
        mask = np.uint8(_ONE << (j & _M7))
        if bits[byte] & mask == 0:
            if (h & sampler_mask) < thresholds[fill + _ONE]:
                bits[byte] |= mask
                fill += _ONE
    return fill


@njit(uint64(uint8[::1], uint64, _U64_RO, uint64), cache=True)
def linear_update_digests(bits, fill, digests, m):
    for i in range(digests.size):
        j = ((digests[i] >> _S32) * m) >> _S32
        byte = j >> _S3
        mask = np.uint8(_ONE << (j & _M7))
        if bits[byte] & mask == 0:
            bits[byte] |= mask
            fill += _ONE
    return fill


@njit(uint64(uint8[::1], uint64, uint64, uint64, int64, uint64), cache=True)
def linear_consume_counter(bits, fill, seed, stream_id, count, m):
    init = seed + _P5 + _LEN16
    base = _mix(init, stream_id)
    for i in range(count):
        h = _avalanche(_mix(base, uint64(i)))
        j = ((h >> _S32) * m) >> _S32
        byte = j >> _S3
        mask = np.uint8(_ONE << (j & _M7))
        if bits[byte] & mask == 0:
            bits[byte] |= mask
            fill += _ONE
    return fill


@njit(uint64(uint64), cache=True)
def _rank30(h):
    w = h & _RANK_MASK
    rank = _ONE
    bit = _RANK_TOP
    while bit != 0 and w & bit == 0:
        rank += _ONE
        bit >>= _ONE
    return rank


@njit(void(uint8[::1], _U64_RO, uint64), cache=True)
def register_update_digests(registers, digests, num_registers):
    for i in range(digests.size):
        h = digests[i]
        j = ((h >> _S32) * num_registers) >> _S32
        rank = _rank30(h)
        if rank > uint64(registers[j]):
            registers[j] = np.uint8(rank)


@njit(void(uint8[::1], uint64, uint64, int64, uint64), cache=True)
def register_consume_counter(registers, seed, stream_id, count, num_registers):
    init = seed + _P5 + _LEN16
    base = _mix(init, stream_id)
    for i in range(count):
        h = _avalanche(_mix(base, uint64(i)))
        j = ((h >> _S32) * num_registers) >> _S32
        rank = _rank30(h)
        if rank > uint64(registers[j]):
            registers[j] = np.uint8(rank)

"""Seeded 64-bit digest and its split into bucket index and sampler value.

The digest is an xxhash-style avalanche mix over 8-byte little-endian
words. It is deliberately written so the same arithmetic can be run in
three forms with bit-identical results: this pure-Python byte path, the
vectorized numpy path below, and the jitted kernels in ``_kernels``.

The split keeps the bucket (top 32 bits, fixed-point scaled so the
bucket count need not be a power of two) and the sampler (low ``d``
bits) on disjoint bit ranges, so the two values are independent under a
uniform digest.
"""

from __future__ import annotations

import struct
from typing import NamedTuple

import numpy as np

from sbitmap.errors import InvalidInput

_MASK64 = (1 << 64) - 1

_P1 = 0x9E3779B185EBCA87
_P2 = 0xC2B2AE3D27D4EB4F
_P3 = 0x165667B19E3779F9
_P4 = 0x85EBCA77C2B2AE63
_P5 = 0x27D4EB2F165667C5


class HashSplit(NamedTuple):
    bucket: int
    sampler: int


def _rotl(x: int, n: int) -> int:
    return ((x << n) | (x >> (64 - n))) & _MASK64


def _mix(h: int, word: int) -> int:
    word = (word * _P2) & _MASK64
    word = (_rotl(word, 31) * _P1) & _MASK64
    h ^= word
    return (_rotl(h, 27) * _P1 + _P4) & _MASK64


def _avalanche(h: int) -> int:
    h ^= h >> 33
    h = (h * _P2) & _MASK64
    h ^= h >> 29
    h = (h * _P3) & _MASK64
    h ^= h >> 32
    return h


def digest(seed: int, item: bytes) -> int:
    """Hash an arbitrary byte string to a 64-bit value under ``seed``.

    Deterministic: identical (seed, item) pairs always produce the same
    digest. Agrees with the reference xxHash64 function whenever the
    item length is a multiple of eight bytes and below 32 (the byte
    layout every internal caller uses), so an independent implementation
    can check it. Other lengths zero-pad the tail word to 8 bytes; this
    is unambiguous because the length is folded into the initial state.
    """
    h = (seed + _P5 + len(item)) & _MASK64
    for off in range(0, len(item) & ~7, 8):
        (word,) = struct.unpack_from("<Q", item, off)
        h = _mix(h, word)
    tail = len(item) & 7
    if tail:
        word = int.from_bytes(item[-tail:], "little")
        h = _mix(h, word)
    return _avalanche(h)


def digest_pairs(seed: int, hi, lo) -> np.ndarray:
    """Vectorized digest of 16-byte items given as two uint64 words.

    Elementwise equal to ``digest(seed, struct.pack('<QQ', hi, lo))``.
    Accepts array-likes; returns a uint64 array of the broadcast shape.
    """
    hi = np.asarray(hi, dtype=np.uint64)
    lo = np.asarray(lo, dtype=np.uint64)
    init = (seed + _P5 + 16) & _MASK64
    h = np.full(np.broadcast_shapes(hi.shape, lo.shape), init, dtype=np.uint64)
    # Wraparound at 64 bits is the point of the arithmetic; silence the
    # overflow warning numpy raises for 0-d operands.
    with np.errstate(over="ignore"):
        for word in (hi, lo):
            k = word * np.uint64(_P2)
            k = ((k << np.uint64(31)) | (k >> np.uint64(33))) * np.uint64(_P1)
            h = h ^ k
            h = ((h << np.uint64(27)) | (h >> np.uint64(37))) * np.uint64(_P1) + np.uint64(_P4)
        h ^= h >> np.uint64(33)
        h *= np.uint64(_P2)
        h ^= h >> np.uint64(29)
        h *= np.uint64(_P3)
        h ^= h >> np.uint64(32)
    return h


def split(value: int, m: int, d: int) -> HashSplit:
    """Split a 64-bit digest into (bucket, sampler).

    bucket = floor(top32(value) * m / 2**32), uniform on [0, m) up to
    fixed-point rounding; sampler = low ``d`` bits, uniform on [0, 2**d).
    Pure function of its arguments.
    """
    if not isinstance(d, int) or not 1 <= d <= 32:
        raise InvalidInput(f"sampler width must be an integer in 1..32, got {d!r}")
    if m < 1:
        raise InvalidInput(f"bucket count must be >= 1, got {m}")
    value &= _MASK64
    bucket = ((value >> 32) * m) >> 32
    sampler = value & ((1 << d) - 1)
    return HashSplit(bucket, sampler)

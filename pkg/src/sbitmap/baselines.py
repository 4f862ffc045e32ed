"""Baseline distinct-count sketches for the comparison harness.

Linear counting (a plain bitmap with an occupancy estimator) and the
log-family register sketches (LogLog and HyperLogLog read-outs over the
same register state). All are duplicate-invariant by construction: a
seen item can only re-set a bit or re-propose a smaller rank.
"""

from __future__ import annotations

import base64
import math

import numpy as np

from sbitmap import _kernels, hashing
from sbitmap.errors import InvalidInput, Saturated

_MASK64 = (1 << 64) - 1

# Rank of the low 30 digest bits: 31 - bit_length, in 1..31, so 5 bits
# of accounting per register always suffice.
_RANK_BITS = 30
_RANK_MASK = (1 << _RANK_BITS) - 1

REGISTER_ACCOUNTING_BITS = 5

_LOGLOG_ALPHA = 0.39701  # asymptotic geometric-mean bias constant
_LOGLOG_RRMSE = 1.30  # asymptotic error constant, 1.30/sqrt(registers)
_HLL_RRMSE = 1.04  # asymptotic error constant, 1.04/sqrt(registers)


def _hll_alpha(num_registers: int) -> float:
    # Finite-size bias corrections for small register counts, then the
    # standard asymptotic formula.
    if num_registers < 32:
        return 0.673
    if num_registers < 64:
        return 0.697
    if num_registers < 128:
        return 0.709
    return 0.7213 / (1.0 + 1.079 / num_registers)


class LinearCounter:
    """Plain bitmap counter: estimate m*ln(m/empty) from occupancy."""

    def __init__(self, m: int, seed: int = 0):
        if m < 1:
            raise InvalidInput(f"bitmap size must be >= 1, got {m}")
        self._m = int(m)
        self._seed = int(seed) & _MASK64
        self._bits = np.zeros((self._m + 7) // 8, dtype=np.uint8)
        self._fill = 0

    @property
    def fill(self) -> int:
        return self._fill

    @property
    def memory_bits(self) -> int:
        return self._m

    @property
    def design_rrmse(self) -> float:
        # Accuracy depends on the load factor; no single design constant.
        return math.nan

    def state_bytes(self) -> bytes:
        return self._bits.tobytes()

    def update(self, item: bytes) -> bool:
        h = hashing.digest(self._seed, item)
        bucket = hashing.split(h, self._m, 1).bucket
        byte, mask = bucket >> 3, 1 << (bucket & 7)
        if self._bits[byte] & mask:
            return False
        self._bits[byte] |= mask
        self._fill += 1
        return True

    def update_batch(self, digests) -> int:
        digests = np.ascontiguousarray(digests, dtype=np.uint64)
        before = self._fill
        self._fill = int(
            _kernels.linear_update_digests(self._bits, self._fill, digests, self._m)
        )
        return self._fill - before

    def consume_stream(self, stream_id: int, count: int) -> int:
        before = self._fill
        self._fill = int(
            _kernels.linear_consume_counter(
                self._bits,
                self._fill,
                self._seed,
                int(stream_id) & _MASK64,
                int(count),
                self._m,
            )
        )
        return self._fill - before

    def estimate(self) -> float:
        """m * ln(m / empty buckets); diverges when the bitmap is full."""
        if self._fill >= self._m:
            raise Saturated(f"all {self._m} buckets set; estimator diverges")
        return self._m * math.log(self._m / (self._m - self._fill))

    def to_envelope(self) -> dict:
        return {
            "kind": "linear",
            "m": self._m,
            "seed": self._seed,
            "fill": self._fill,
            "bits": base64.b64encode(self._bits.tobytes()).decode("ascii"),
        }

    @classmethod
    def from_envelope(cls, env: dict) -> "LinearCounter":
        if env.get("kind") != "linear":
            raise InvalidInput(f"not a linear envelope: kind={env.get('kind')!r}")
        counter = cls(int(env["m"]), seed=int(env["seed"]))
        raw = base64.b64decode(env["bits"])
        if len(raw) != len(counter._bits):
            raise InvalidInput("bit vector length mismatch")
        bits = np.frombuffer(raw, dtype=np.uint8).copy()
        if counter._m % 8:
            pad = (0xFF << (counter._m % 8)) & 0xFF
            if bits[-1] & pad:
                raise InvalidInput("stray bits beyond m in the stored vector")
        fill = int(np.bitwise_count(bits).sum())
        if fill != int(env["fill"]):
            raise InvalidInput(f"stored fill {env['fill']} != popcount {fill}")
        counter._bits = bits
        counter._fill = fill
        return counter


class LogRegisterSketch:
    """Max-rank register sketch with LogLog or HyperLogLog read-out.

    Substreams are selected by the top digest bits (fixed-point scaled,
    so any register count >= 16 works, powers of two not required);
    ranks come from the low 30 bits, disjoint from the selector.
    """

    MODES = ("loglog", "hyperloglog")

    def __init__(self, num_registers: int, seed: int = 0, mode: str = "hyperloglog"):
        if num_registers < 16:
            raise InvalidInput(f"need at least 16 registers, got {num_registers}")
        if mode not in self.MODES:
            raise InvalidInput(f"mode must be one of {self.MODES}, got {mode!r}")
        self._registers = np.zeros(int(num_registers), dtype=np.uint8)
        self._seed = int(seed) & _MASK64
        self._mode = mode

    @classmethod
    def with_memory(
        cls, memory_bits: int, seed: int = 0, mode: str = "hyperloglog"
    ) -> "LogRegisterSketch":
        """Size by bit budget at the 5-bit-per-register accounting."""
        return cls(int(memory_bits) // REGISTER_ACCOUNTING_BITS, seed=seed, mode=mode)

    @property
    def num_registers(self) -> int:
        return self._registers.size

    @property
    def mode(self) -> str:
        return self._mode

    @property
    def memory_bits(self) -> int:
        return REGISTER_ACCOUNTING_BITS * self._registers.size

    @property
    def design_rrmse(self) -> float:
        constant = _HLL_RRMSE if self._mode == "hyperloglog" else _LOGLOG_RRMSE
        return constant / math.sqrt(self._registers.size)

    def state_bytes(self) -> bytes:
        return self._registers.tobytes()

    def update(self, item: bytes) -> bool:
        h = hashing.digest(self._seed, item)
        j = ((h >> 32) * self._registers.size) >> 32
        w = h & _RANK_MASK
        rank = _RANK_BITS + 1 - w.bit_length()
        if rank > self._registers[j]:
            self._registers[j] = rank
            return True
        return False

    def update_batch(self, digests) -> None:
        digests = np.ascontiguousarray(digests, dtype=np.uint64)
        _kernels.register_update_digests(
            self._registers, digests, self._registers.size
        )

    def consume_stream(self, stream_id: int, count: int) -> None:
        _kernels.register_consume_counter(
            self._registers,
            self._seed,
            int(stream_id) & _MASK64,
            int(count),
            self._registers.size,
        )

    def estimate(self) -> float:
        """Mode-selected read-out; 0 when nothing was ever ingested."""
        regs = self._registers
        m = regs.size
        if not regs.any():
            return 0.0
        if self._mode == "loglog":
            return _LOGLOG_ALPHA * m * 2.0 ** float(regs.mean())
        raw = _hll_alpha(m) * m * m / float(np.exp2(-regs.astype(np.float64)).sum())
        if raw <= 2.5 * m:
            zeros = int((regs == 0).sum())
            if zeros:
                return m * math.log(m / zeros)
        return raw

    def to_envelope(self) -> dict:
        return {
            "kind": self._mode,
            "num_registers": self._registers.size,
            "seed": self._seed,
            "registers": base64.b64encode(self._registers.tobytes()).decode("ascii"),
        }

    @classmethod
    def from_envelope(cls, env: dict) -> "LogRegisterSketch":
        if env.get("kind") not in cls.MODES:
            raise InvalidInput(f"not a register envelope: kind={env.get('kind')!r}")
        sketch = cls(int(env["num_registers"]), seed=int(env["seed"]), mode=env["kind"])
        raw = base64.b64decode(env["registers"])
        if len(raw) != sketch._registers.size:
            raise InvalidInput("register vector length mismatch")
        registers = np.frombuffer(raw, dtype=np.uint8).copy()
        if int(registers.max(initial=0)) > _RANK_BITS + 1:
            raise InvalidInput("register value exceeds the rank range")
        sketch._registers = registers
        return sketch

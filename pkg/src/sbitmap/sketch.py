"""The S-bitmap sketch: an adaptive-sampling bitmap for distinct counts.

Each new item hashes to a bucket and a sampler value. An item landing
in an already-set bucket is ignored forever (duplicates are free); an
item landing in an empty bucket sets it only when the sampler clears
the current rate p[fill+1]. Because the rates decrease as the bitmap
fills, the sketch automatically samples at the scale of the count seen
so far, which is what makes one fixed-size bitmap accurate over the
whole range 1..N. The estimate is a lookup: n_hat = t[min(fill, b_max)],
where t is the expected-waiting-time table of the schedule.
"""

from __future__ import annotations

import base64
import warnings
from dataclasses import dataclass

import numpy as np

from sbitmap import _kernels, hashing
from sbitmap.dimensioning import (
    CapacityParams,
    RateTable,
    build_rate_table,
    solve_capacity,
)
from sbitmap.errors import InvalidInput

DEFAULT_SAMPLER_WIDTH = 30

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class Estimate:
    """Read-out of a sketch at one instant.

    n_hat: estimated cardinality (real-valued; t is not integral)
    fill_used: fill level after truncation, min(fill, b_max)
    theoretical_rrmse: the design error (C-1)^(-1/2)
    saturated: True when the raw fill exceeded b_max, i.e. the sketch
        was pushed past its design range and n_hat is clamped at t[b_max]
    """

    n_hat: float
    fill_used: int
    theoretical_rrmse: float
    saturated: bool

    @property
    def rounded(self) -> int:
        return round(self.n_hat)


class SBitmap:
    """One self-learning bitmap instance.

    Construction wires solved params to a shared rate table; the
    per-instance state is the m-bit vector and its fill count. Single
    writer per instance; distinct instances are fully independent.
    """

    def __init__(
        self,
        params: CapacityParams,
        rates: RateTable,
        seed: int = 0,
        d: int = DEFAULT_SAMPLER_WIDTH,
    ):
        if rates.m != params.m:
            raise InvalidInput(
                f"rate table is for m={rates.m}, params say m={params.m}"
            )
        if isinstance(d, bool) or not isinstance(d, int) or not 1 <= d <= 32:
            raise InvalidInput(f"sampler width must be an integer in 1..32, got {d!r}")
        self._params = params
        self._rates = rates
        self._seed = int(seed) & _MASK64
        self._d = d
        self._sampler_mask = (1 << d) - 1
        # Integer compare u < ceil(p * 2^d) realizes u * 2^-d < p with a
        # quantization of at most one lattice step, never rounding a
        # positive rate down to zero.
        thresholds = np.zeros(params.m + 1, dtype=np.uint64)
        thresholds[1:] = np.ceil(rates.p[1:] * float(2**d)).astype(np.uint64)
        thresholds.flags.writeable = False
        self._thresholds = thresholds
        if rates.p[params.b_max] < 2.0**-d:
            warnings.warn(
                f"smallest trusted rate {rates.p[params.b_max]:.3g} is below the "
                f"sampler granularity 2^-{d}; effective rate rounds up to 2^-{d}",
                RuntimeWarning,
                stacklevel=2,
            )
        self._bits = np.zeros((params.m + 7) // 8, dtype=np.uint8)
        self._fill = 0

    @classmethod
    def for_range(
        cls, m: int, N: int, seed: int = 0, d: int = DEFAULT_SAMPLER_WIDTH
    ) -> "SBitmap":
        """Dimension and build in one step (solves the capacity equation)."""
        params = solve_capacity(m, N)
        return cls(params, build_rate_table(params), seed=seed, d=d)

    @property
    def params(self) -> CapacityParams:
        return self._params

    @property
    def rates(self) -> RateTable:
        return self._rates

    @property
    def seed(self) -> int:
        return self._seed

    @property
    def d(self) -> int:
        return self._d

    @property
    def fill(self) -> int:
        return self._fill

    @property
    def memory_bits(self) -> int:
        return self._params.m

    @property
    def design_rrmse(self) -> float:
        return self._params.epsilon

    def state_bytes(self) -> bytes:
        """The packed bit vector; equal states compare equal bytewise."""
        return self._bits.tobytes()

    def update(self, item: bytes) -> bool:
        """Ingest one item; True iff a bit flipped (a new fill)."""
        h = hashing.digest(self._seed, item)
        bucket, sampler = hashing.split(h, self._params.m, self._d)
        byte, offset = bucket >> 3, bucket & 7
        mask = 1 << offset
        if self._bits[byte] & mask:
            return False
        if sampler < int(self._thresholds[self._fill + 1]):
            self._bits[byte] |= mask
            self._fill += 1
            return True
        return False

    def update_batch(self, digests) -> int:
        """Ingest precomputed 64-bit digests; returns the number of new fills."""
        digests = np.ascontiguousarray(digests, dtype=np.uint64)
        before = self._fill
        self._fill = int(
            _kernels.sbitmap_update_digests(
                self._bits,
                self._fill,
                self._thresholds,
                digests,
                self._params.m,
                self._sampler_mask,
            )
        )
        return self._fill - before

    def consume_stream(self, stream_id: int, count: int) -> int:
        """Ingest `count` synthetic counter items; returns new fills.

        Item i is the 16-byte string struct.pack('<QQ', stream_id, i);
        this jitted path is bit-identical to calling update() on those
        byte strings one by one.
        """
        before = self._fill
        self._fill = int(
            _kernels.sbitmap_consume_counter(
                self._bits,
                self._fill,
                self._thresholds,
                self._seed,
                int(stream_id) & _MASK64,
                int(count),
                self._params.m,
                self._sampler_mask,
            )
        )
        return self._fill - before

    def estimate(self) -> Estimate:
        """Current read-out: n_hat = t[min(fill, b_max)]."""
        b = min(self._fill, self._params.b_max)
        return Estimate(
            n_hat=float(self._rates.t[b]),
            fill_used=b,
            theoretical_rrmse=self._params.epsilon,
            saturated=self._fill > self._params.b_max,
        )

    def to_envelope(self) -> dict:
        """Self-describing JSON-ready state."""
        return {
            "kind": "sbitmap",
            "m": self._params.m,
            "N": self._params.N,
            "C": self._params.C,
            "d": self._d,
            "seed": self._seed,
            "fill": self._fill,
            "bits": base64.b64encode(self._bits.tobytes()).decode("ascii"),
        }

    @classmethod
    def from_envelope(cls, env: dict) -> "SBitmap":
        """Rebuild from an envelope, revalidating every invariant."""
        if env.get("kind") != "sbitmap":
            raise InvalidInput(f"not an sbitmap envelope: kind={env.get('kind')!r}")
        params = solve_capacity(int(env["m"]), int(env["N"]))
        if abs(params.C - float(env["C"])) > 1e-6 * params.C:
            raise InvalidInput(
                f"stored C={env['C']} does not solve (m={env['m']}, N={env['N']})"
            )
        sketch = cls(params, build_rate_table(params), seed=int(env["seed"]), d=int(env["d"]))
        raw = base64.b64decode(env["bits"])
        if len(raw) != len(sketch._bits):
            raise InvalidInput(f"bit vector is {len(raw)} bytes, expected {len(sketch._bits)}")
        bits = np.frombuffer(raw, dtype=np.uint8).copy()
        if params.m % 8:
            pad = (0xFF << (params.m % 8)) & 0xFF
            if bits[-1] & pad:
                raise InvalidInput("stray bits beyond m in the stored vector")
        fill = int(np.bitwise_count(bits).sum())
        if fill != int(env["fill"]):
            raise InvalidInput(f"stored fill {env['fill']} != popcount {fill}")
        sketch._bits = bits
        sketch._fill = fill
        return sketch

"""Seeded, splittable random streams built on a counter-based generator.

Every draw is a pure function of ``(seed, stream_id, slot)``: the slot-``i``
output of a stream is ``mix64(stream_key + GAMMA * (i + 1))`` where ``mix64``
is the splitmix64 finalizer. Replaying a stream therefore reproduces the
exact same values, and any (trial, subsample, resample) tuple can get its own
independent stream by deriving child ids, with no shared mutable state.

The block draws route through ``dpboot._kernels`` so the compiled backend and
the numpy fallback consume identical slots.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels

_MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15

# Resolution of the uniform mapping: ((x >> 11) + 0.5) * 2**-53 lies in (0, 1).
_INV53 = 2.0**-53


def mix64(z: int) -> int:
    """splitmix64 finalizer on 64-bit integers (pure-python reference)."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def stream_key(seed: int, stream_id: int) -> int:
    """Hash (seed, stream_id) into the stream's base key."""
    return mix64(mix64((seed + GAMMA) & _MASK64) ^ mix64(stream_id & _MASK64))


def child_id(stream_id: int, key: int) -> int:
    """Derive a child stream id; distinct keys give distinct children."""
    return mix64((stream_id + GAMMA * (key + 1)) & _MASK64)


def raw_u64(seed: int, stream_id: int, slot: int) -> int:
    """Slot-addressed raw 64-bit output (reference for the block kernels)."""
    return mix64((stream_key(seed, stream_id) + GAMMA * (slot + 1)) & _MASK64)


def uniform_from_u64(x):
    """Map raw 64-bit words to doubles in the open interval (0, 1)."""
    x = np.asarray(x, dtype=np.uint64)
    return ((x >> np.uint64(11)).astype(np.float64) + 0.5) * _INV53


@dataclass
class RngStream:
    """A single-owner random stream identified by (seed, stream_id).

    Draws consume consecutive slots starting from 0, so a freshly
    constructed stream with the same ids replays the same sequence
    bit for bit. Streams must not be shared across threads; parallel
    callers derive children with distinct keys instead.
    """

    seed: int
    stream_id: int = 0
    _pos: int = field(default=0, init=False, repr=False, compare=False)

    def __post_init__(self):
        self.seed = int(self.seed) & _MASK64
        self.stream_id = int(self.stream_id) & _MASK64

    def child(self, *keys: int) -> "RngStream":
        """New independent stream; does not disturb this stream's cursor."""
        sid = self.stream_id
        for k in keys:
            sid = child_id(sid, int(k))
        return RngStream(self.seed, sid)

    # -- block draws -------------------------------------------------------

    def u64(self, count: int) -> np.ndarray:
        out = _kernels.u64_block(self.seed, self.stream_id, self._pos, count)
        self._pos += count
        return out

    def uniforms(self, count: int) -> np.ndarray:
        """`count` doubles in (0, 1), one slot each."""
        out = _kernels.uniform_block(self.seed, self.stream_id, self._pos, count)
        self._pos += count
        return out

    def uniform(self) -> float:
        return float(self.uniforms(1)[0])

    def integers(self, upper: int, count: int) -> np.ndarray:
        """`count` integers uniform on {0, ..., upper-1} (one slot each)."""
        if upper <= 0:
            raise ValueError("upper must be positive")
        out = _kernels.index_block(self.seed, self.stream_id, self._pos, count, upper)
        self._pos += count
        return out

    def laplace(self, loc: float, scale: float, count: int | None = None):
        """Laplace draws by inverse CDF; scale 0 degenerates to `loc`."""
        if scale < 0:
            raise ValueError("scale must be nonnegative")
        n = 1 if count is None else count
        x = laplace_from_uniform(self.uniforms(n), loc, scale)
        return float(x[0]) if count is None else x

    def normals(self, count: int, sigma: float = 1.0) -> np.ndarray:
        """N(0, sigma^2) draws via Box-Muller; two slots per value."""
        u = self.uniforms(2 * count).reshape(count, 2)
        z = np.sqrt(-2.0 * np.log(u[:, 0])) * np.cos(2.0 * np.pi * u[:, 1])
        return sigma * z


def laplace_from_uniform(u, loc: float, scale: float):
    """Inverse-CDF Laplace transform of uniforms in (0, 1)."""
    q = np.asarray(u, dtype=np.float64) - 0.5
    return loc - scale * np.sign(q) * np.log1p(-2.0 * np.abs(q))

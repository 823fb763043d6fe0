"""I.i.d. Rayleigh block fading with counter-addressed random streams.

Power gains follow ``|g|^2 ~ Exponential(mean = 2 * sigma2)``, i.e. ``sigma2``
is the per-dimension variance of the underlying complex Gaussian.

Every uniform is addressed by ``(seed, stream_id, chunk, position)`` through a
Philox counter-based generator: the key is ``(seed, stream_id)`` and the chunk
index sits in the high counter word. A slot's draw therefore does not depend
on which other slots were generated or by which worker.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError

# Slots per counter chunk. Changing it changes every simulated number.
CHUNK_SLOTS = 1 << 14

_U64 = (1 << 64) - 1


@dataclass(frozen=True)
class ChannelParams:
    L: int
    sigma_g2: float = 1.0
    sigma_h2: float = 1.0
    n0: float = 1.0

    def __post_init__(self):
        if int(self.L) != self.L or self.L < 1:
            raise ConfigError(f"relay count must be an integer >= 1, got {self.L}", key="L")
        if not self.sigma_g2 > 0:
            raise ConfigError(f"sigma_g2 must be positive, got {self.sigma_g2}", key="sigma_g2")
        if not self.sigma_h2 > 0:
            raise ConfigError(f"sigma_h2 must be positive, got {self.sigma_h2}", key="sigma_h2")
        if self.n0 != 1.0:
            raise ConfigError("noise power is normalised to 1", key="n0")


@dataclass(frozen=True)
class RngStream:
    seed: int
    stream_id: int = 0

    def __post_init__(self):
        if not 0 <= self.seed <= _U64:
            raise ConfigError(f"seed must fit in 64 bits, got {self.seed}", key="seed")
        if not 0 <= self.stream_id <= _U64:
            raise ConfigError(f"invalid stream_id {self.stream_id}", key="stream_id")

    def generator(self, chunk: int) -> np.random.Generator:
        """Generator positioned at the start of ``chunk``."""
        bitgen = np.random.Philox(
            key=np.array([self.seed, self.stream_id], dtype=np.uint64),
            counter=np.array([0, 0, 0, chunk], dtype=np.uint64),
        )
        return np.random.Generator(bitgen)

    def uniforms(self, chunk: int, size) -> np.ndarray:
        """Uniforms on (0, 1]; zero is excluded so ``log`` is always finite."""
        return 1.0 - self.generator(chunk).random(size)


@dataclass(frozen=True)
class SlotRealization:
    g: np.ndarray
    h: np.ndarray
    slot_index: int = 0

    def __post_init__(self):
        g = np.asarray(self.g, dtype=float)
        h = np.asarray(self.h, dtype=float)
        if g.ndim != 1 or g.shape != h.shape or g.size == 0:
            raise ConfigError("g and h must be nonempty 1-D sequences of equal length")
        if (g < 0).any() or (h < 0).any():
            raise DomainError("amplitudes must be nonnegative")
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "h", h)

    @property
    def L(self) -> int:
        return self.g.size


def rayleigh_from_uniform(u, sigma2: float):
    """Inverse transform: amplitude whose square has survival ``exp(-z / (2 sigma2))``."""
    if not sigma2 > 0:
        raise DomainError(f"sigma2 must be positive, got {sigma2}")
    return np.sqrt(-2.0 * sigma2 * np.log(u))


def sample_rayleigh_amplitude(stream: RngStream, sigma2: float, size=None):
    """Rayleigh amplitudes taken from the start of ``stream`` (chunk 0).

    Returns a float when ``size`` is None, otherwise an array of that shape.
    """
    if not sigma2 > 0:
        raise DomainError(f"sigma2 must be positive, got {sigma2}")
    n = 1 if size is None else size
    x = rayleigh_from_uniform(stream.uniforms(0, n), sigma2)
    return float(x[0]) if size is None else x


def chunk_amplitudes(params: ChannelParams, stream: RngStream, chunk: int):
    u = stream.uniforms(chunk, (CHUNK_SLOTS, 2 * params.L))
    g = rayleigh_from_uniform(u[:, : params.L], params.sigma_g2)
    h = rayleigh_from_uniform(u[:, params.L :], params.sigma_h2)
    return g, h


def sample_slots(params: ChannelParams, stream: RngStream, start: int, count: int):
    """Amplitude arrays ``(g, h)`` of shape ``(count, L)`` for slots ``start .. start+count-1``."""
    if start < 0 or count < 0:
        raise ConfigError("slot range must be nonnegative")
    if count == 0:
        empty = np.empty((0, params.L))
        return empty, empty.copy()
    first, last = start // CHUNK_SLOTS, (start + count - 1) // CHUNK_SLOTS
    gs, hs = [], []
    for c in range(first, last + 1):
        g, h = chunk_amplitudes(params, stream, c)
        lo = max(start - c * CHUNK_SLOTS, 0)
        hi = min(start + count - c * CHUNK_SLOTS, CHUNK_SLOTS)
        gs.append(g[lo:hi])
        hs.append(h[lo:hi])
    return np.concatenate(gs), np.concatenate(hs)


def sample_slot(params: ChannelParams, stream: RngStream, slot_index: int) -> SlotRealization:
    g, h = sample_slots(params, stream, slot_index, 1)
    return SlotRealization(g[0], h[0], slot_index)

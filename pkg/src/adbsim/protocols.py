"""Monte Carlo throughput of CRS, SFD-MMRS, DF and ADB.

Per-slot rate kernels are pure functions of a channel draw and the powers.
Estimators stream over counter-addressed chunks, keep first and second
moments of the per-draw rate components, and reduce chunk partials in chunk
order, so results are bit-identical for any worker count.
"""
from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .channel import CHUNK_SLOTS, ChannelParams, RngStream, SlotRealization, chunk_amplitudes
from .errors import ConfigError

# Batches used for the standard error of the (autocorrelated) queue output.
QUEUE_BATCHES = 100


class ProtocolKind(str, enum.Enum):
    CRS = "CRS"
    SFD_MMRS = "SFD_MMRS"
    DF = "DF"
    ADB = "ADB"

    @classmethod
    def parse(cls, name: str) -> "ProtocolKind":
        key = name.strip().upper().replace("-", "_")
        try:
            return cls(key)
        except ValueError:
            raise ConfigError(f"unknown scheme {name!r}", key="schemes") from None


@dataclass(frozen=True)
class SimConfig:
    protocol: ProtocolKind
    channel: ChannelParams
    p_s: float
    p_r: float
    m: int | None = None
    n_slots: int = 10**6
    switch_period: int = 1
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "protocol", ProtocolKind(self.protocol))
        if not (self.p_s >= 0 and self.p_r >= 0):
            raise ConfigError("powers must be nonnegative", key="p_s" if not self.p_s >= 0 else "p_r")
        if int(self.n_slots) != self.n_slots or self.n_slots < 2 or self.n_slots % 2:
            raise ConfigError(f"n_slots must be an even integer >= 2, got {self.n_slots}", key="n_slots")
        if self.switch_period < 1 or (self.n_slots // 2) % self.switch_period:
            raise ConfigError(
                f"switch period {self.switch_period} must divide n_slots/2", key="switch_period"
            )
        if self.workers < 1:
            raise ConfigError("workers must be >= 1", key="workers")
        L = self.channel.L
        if self.protocol is ProtocolKind.ADB:
            if L < 2:
                raise ConfigError("ADB needs at least 2 relays", key="L")
            if self.m is None:
                object.__setattr__(self, "m", L // 2)
            if not 1 <= self.m <= L - 1:
                raise ConfigError(f"group size must satisfy 1 <= m <= L-1, got {self.m}", key="m")
        if self.protocol is ProtocolKind.SFD_MMRS and L < 2:
            raise ConfigError("SFD-MMRS needs at least 2 relays", key="L")

    @property
    def stream(self) -> RngStream:
        return RngStream(self.seed, 0)


@dataclass
class ThroughputEstimate:
    mean: float
    std_error: float
    n_slots: int
    aux: dict = field(default_factory=dict)


@dataclass
class QueueTrace:
    """Buffer contents (bits) of each relay group after every slot.

    All relays of a group hold the same decoded data, so one buffer per group
    describes every relay in it.
    """

    group_queues: np.ndarray
    groups: tuple
    delivered_bits: float
    admitted_bits: float
    slots: int

    def relay_queue(self, relay: int) -> np.ndarray:
        for gi, members in enumerate(self.groups):
            if relay in members:
                return self.group_queues[gi]
        raise IndexError(relay)

    @property
    def mean_queue_length(self) -> float:
        return float(self.group_queues.sum(axis=0).mean())


# -- per-slot kernels, vectorised over a leading axis of draws ---------------

def _log2p(x):
    return np.log2(1.0 + x)


def crs_rates(g, h, p_s, p_r):
    snr = np.minimum(p_s * (g * g), p_r * (h * h)).max(axis=-1)
    return 0.5 * _log2p(snr)


def df_rates(g, h, p_s, p_r):
    s = h.sum(axis=-1)
    snr = np.minimum(p_s * (g * g).min(axis=-1), p_r * (s * s))
    return 0.5 * _log2p(snr)


def sfd_mmrs_indices(g, h, p_s=1.0, p_r=1.0):
    """Reception and transmission relay per draw; ties go to the lowest index."""
    gg = p_s * g * g
    gh = p_r * h * h
    rows = np.arange(gg.shape[0])
    r1 = gg.argmax(axis=1)
    t1 = gh.argmax(axis=1)
    masked = gg.copy()
    masked[rows, r1] = -np.inf
    r2 = masked.argmax(axis=1)
    masked = gh.copy()
    masked[rows, t1] = -np.inf
    t2 = masked.argmax(axis=1)
    # On a collision take (r2, t1) only on strict improvement, else (r1, t2).
    second = np.minimum(gg[rows, r2], gh[rows, t1]) > np.minimum(gg[rows, r1], gh[rows, t2])
    same = r1 == t1
    rx = np.where(same & second, r2, r1)
    tx = np.where(same & ~second, t2, t1)
    return rx, tx


def sfd_mmrs_components(g, h, p_s, p_r):
    rx, tx = sfd_mmrs_indices(g, h, p_s, p_r)
    if (rx == tx).any():
        raise AssertionError("SFD-MMRS selected the same relay for reception and transmission")
    rows = np.arange(g.shape[0])
    c_sr = _log2p(p_s * g[rows, rx] ** 2)
    c_rd = _log2p(p_r * h[rows, tx] ** 2)
    return np.column_stack([c_sr, c_rd])


def adb_components(g, h, p_s, p_r, m):
    """Columns A11, A22, A21, A12: group-1 source link, group-1 beamforming,
    group-2 source link, group-2 beamforming."""
    g2 = g * g
    s1 = h[:, :m].sum(axis=1)
    s2 = h[:, m:].sum(axis=1)
    return np.column_stack([
        _log2p(p_s * g2[:, :m].min(axis=1)),
        _log2p(p_r * s1 * s1),
        _log2p(p_s * g2[:, m:].min(axis=1)),
        _log2p(p_r * s2 * s2),
    ])


def _one(slot: SlotRealization):
    return slot.g[None, :], slot.h[None, :]


def crs_rate(slot: SlotRealization, p_s: float, p_r: float) -> float:
    return float(crs_rates(*_one(slot), p_s, p_r)[0])


def df_rate(slot: SlotRealization, p_s: float, p_r: float) -> float:
    return float(df_rates(*_one(slot), p_s, p_r)[0])


def sfd_mmrs_select(slot: SlotRealization, p_s: float = 1.0, p_r: float = 1.0) -> tuple[int, int]:
    if slot.L < 2:
        raise ConfigError("SFD-MMRS needs at least 2 relays", key="L")
    rx, tx = sfd_mmrs_indices(*_one(slot), p_s, p_r)
    return int(rx[0]), int(tx[0])


# -- chunked moment accumulation ---------------------------------------------

@dataclass
class _Moments:
    n: int
    total: np.ndarray
    cross: np.ndarray

    def __add__(self, other):
        return _Moments(self.n + other.n, self.total + other.total, self.cross + other.cross)

    @property
    def mean(self):
        return self.total / self.n

    def std_error(self, weights) -> float:
        w = np.asarray(weights, dtype=float)
        if self.n < 2:
            return 0.0
        cov = (self.cross - np.outer(self.total, self.total) / self.n) / (self.n - 1)
        var = max(float(w @ cov @ w), 0.0)
        return math.sqrt(var / self.n)


def _accumulate(cfg: SimConfig, n_draws: int, components) -> _Moments:
    stream = cfg.stream
    n_chunks = -(-n_draws // CHUNK_SLOTS)

    def work(c):
        g, h = chunk_amplitudes(cfg.channel, stream, c)
        keep = min(CHUNK_SLOTS, n_draws - c * CHUNK_SLOTS)
        x = components(g[:keep], h[:keep])
        return _Moments(keep, x.sum(axis=0), x.T @ x)

    if cfg.workers > 1 and n_chunks > 1:
        with ThreadPoolExecutor(cfg.workers) as pool:
            parts = list(pool.map(work, range(n_chunks)))
    else:
        parts = [work(c) for c in range(n_chunks)]
    acc = parts[0]
    for p in parts[1:]:
        acc = acc + p
    return acc


def _require(cfg: SimConfig, kind: ProtocolKind):
    if cfg.protocol is not kind:
        raise ConfigError(f"expected protocol {kind.value}, got {cfg.protocol.value}", key="protocol")


def simulate_crs(cfg: SimConfig) -> ThroughputEstimate:
    _require(cfg, ProtocolKind.CRS)
    frames = cfg.n_slots // 2
    mom = _accumulate(cfg, frames, lambda g, h: crs_rates(g, h, cfg.p_s, cfg.p_r)[:, None])
    return ThroughputEstimate(float(mom.mean[0]), mom.std_error([1.0]), cfg.n_slots)


def simulate_df(cfg: SimConfig) -> ThroughputEstimate:
    _require(cfg, ProtocolKind.DF)
    frames = cfg.n_slots // 2
    mom = _accumulate(cfg, frames, lambda g, h: df_rates(g, h, cfg.p_s, cfg.p_r)[:, None])
    return ThroughputEstimate(float(mom.mean[0]), mom.std_error([1.0]), cfg.n_slots)


def simulate_sfd_mmrs(cfg: SimConfig) -> ThroughputEstimate:
    _require(cfg, ProtocolKind.SFD_MMRS)
    mom = _accumulate(cfg, cfg.n_slots, lambda g, h: sfd_mmrs_components(g, h, cfg.p_s, cfg.p_r))
    c_sr, c_rd = (float(v) for v in mom.mean)
    w = [1.0, 0.0] if c_sr <= c_rd else [0.0, 1.0]
    aux = {
        "c_sr": c_sr,
        "c_rd": c_rd,
        "c_sr_se": mom.std_error([1.0, 0.0]),
        "c_rd_se": mom.std_error([0.0, 1.0]),
    }
    return ThroughputEstimate(min(c_sr, c_rd), mom.std_error(w), cfg.n_slots, aux)


def adb_flow_estimate(cfg: SimConfig) -> ThroughputEstimate:
    _require(cfg, ProtocolKind.ADB)
    m = cfg.m
    mom = _accumulate(cfg, cfg.n_slots, lambda g, h: adb_components(g, h, cfg.p_s, cfg.p_r, m))
    a11, a22, a21, a12 = (float(v) for v in mom.mean)
    w = np.zeros(4)
    w[0 if a11 <= a22 else 1] = 0.5
    w[2 if a21 <= a12 else 3] = 0.5
    mean = 0.5 * min(a11, a22) + 0.5 * min(a21, a12)
    aux = {"a11": a11, "a22": a22, "a21": a21, "a12": a12}
    return ThroughputEstimate(mean, mom.std_error(w), cfg.n_slots, aux)


def adb_queue_sim(cfg: SimConfig) -> tuple[ThroughputEstimate, QueueTrace]:
    """Slot-by-slot fluid-buffer simulation of the alternating schedule.

    Blocks of ``switch_period`` slots alternate between mode 1 (group 1
    receives, group 2 transmits) and mode 2 (roles swapped), starting in
    mode 1 with both buffers empty.
    """
    _require(cfg, ProtocolKind.ADB)
    n, M, m = cfg.n_slots, cfg.switch_period, cfg.m
    parts = []
    for c in range(-(-n // CHUNK_SLOTS)):
        g, h = chunk_amplitudes(cfg.channel, cfg.stream, c)
        keep = min(CHUNK_SLOTS, n - c * CHUNK_SLOTS)
        parts.append(adb_components(g[:keep], h[:keep], cfg.p_s, cfg.p_r, m))
    a = np.concatenate(parts)
    mode1 = (np.arange(n) // M) % 2 == 0
    # Arrivals to and service capacity of each group buffer, per slot.
    arrive1 = np.where(mode1, a[:, 0], 0.0).tolist()
    serve1 = np.where(mode1, 0.0, a[:, 1]).tolist()
    arrive2 = np.where(mode1, 0.0, a[:, 2]).tolist()
    serve2 = np.where(mode1, a[:, 3], 0.0).tolist()

    q1 = q2 = 0.0
    qs1 = [0.0] * n
    qs2 = [0.0] * n
    out = [0.0] * n
    for t in range(n):
        d1 = serve1[t] if serve1[t] < q1 else q1
        d2 = serve2[t] if serve2[t] < q2 else q2
        q1 = q1 - d1 + arrive1[t]
        q2 = q2 - d2 + arrive2[t]
        out[t] = d1 + d2
        qs1[t] = q1
        qs2[t] = q2

    delivered = np.asarray(out)
    admitted = math.fsum(arrive1) + math.fsum(arrive2)
    mean = float(delivered.mean())
    nb = min(QUEUE_BATCHES, n)
    batch = delivered[: (n // nb) * nb].reshape(nb, -1).mean(axis=1)
    se = float(batch.std(ddof=1) / math.sqrt(nb)) if nb > 1 else 0.0
    trace = QueueTrace(
        group_queues=np.vstack([qs1, qs2]),
        groups=(tuple(range(m)), tuple(range(m, cfg.channel.L))),
        delivered_bits=float(math.fsum(out)),
        admitted_bits=admitted,
        slots=n,
    )
    aux = {"mean_queue_length": trace.mean_queue_length}
    return ThroughputEstimate(mean, se, n, aux), trace


_DISPATCH = {
    ProtocolKind.CRS: simulate_crs,
    ProtocolKind.DF: simulate_df,
    ProtocolKind.SFD_MMRS: simulate_sfd_mmrs,
    ProtocolKind.ADB: adb_flow_estimate,
}


def simulate(cfg: SimConfig) -> ThroughputEstimate:
    return _DISPATCH[cfg.protocol](cfg)

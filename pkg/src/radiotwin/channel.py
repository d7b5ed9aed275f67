"""Propagation channel models for the link simulator.

Three variants share one interface: a trained-regressor channel with an
empirical fading sampler and a memoizing prediction cache, plus Friis and
log-distance baselines (optionally with Normal fading).  ``total_loss``
always equals the deterministic path loss plus one fading draw, and
``rx_power`` folds in the antenna gains:

    rx = tx_power + g_tx + g_rx - total_loss
"""

from __future__ import annotations

import math
from collections import OrderedDict

from . import rngstream
from .dataset import PositionPair
from .errors import ValidationError
from .fading import FadingCdf, FadingSampler

SPEED_OF_LIGHT = 299792458.0


def free_space_path_loss(distance_m: float, frequency_mhz: float) -> float:
    """FSPL in dB: 20 log10(d) + 20 log10(f_Hz) + 20 log10(4*pi/c)."""
    if distance_m <= 0:
        raise ValidationError("free-space path loss undefined for distance <= 0")
    f_hz = frequency_mhz * 1e6
    return (
        20.0 * math.log10(distance_m)
        + 20.0 * math.log10(f_hz)
        + 20.0 * math.log10(4.0 * math.pi / SPEED_OF_LIGHT)
    )


class NormalFading:
    """Seeded Normal(mu, sigma) fading stream for the baseline channels."""

    def __init__(self, mu_db: float = 0.0, sigma_db: float = 3.0, seed: int = 1, stream_id: int = 0):
        self.mu_db = mu_db
        self.sigma_db = sigma_db
        self._gen = rngstream.make_stream(seed, rngstream.BASELINE_FADING, stream_id)

    def sample(self) -> float:
        return float(self._gen.normal(self.mu_db, self.sigma_db))


class PathLossCache:
    """LRU memo of path-loss evaluations keyed by quantized position pairs.

    Positions are snapped to ``quantum`` meters (default 1 mm) before
    hashing so float jitter far below any channel-relevant displacement
    cannot split keys.  ``capacity == 0`` disables caching entirely.
    """

    def __init__(self, capacity: int = 65536, quantum: float = 1e-3):
        if capacity < 0:
            raise ValidationError("cache capacity must be >= 0")
        if quantum <= 0:
            raise ValidationError("cache quantum must be > 0")
        self.capacity = capacity
        self.quantum = quantum
        self.hits = 0
        self.misses = 0
        self._entries: OrderedDict[tuple, float] = OrderedDict()

    def key(self, pair: PositionPair) -> tuple:
        q = self.quantum
        tx, rx = pair.tx, pair.rx
        return (
            round(tx.x / q),
            round(tx.y / q),
            round(tx.z / q),
            round(rx.x / q),
            round(rx.y / q),
            round(rx.z / q),
        )

    def lookup(self, key: tuple):
        val = self._entries.get(key)
        if val is not None:
            self._entries.move_to_end(key)
            self.hits += 1
        else:
            self.misses += 1
        return val

    def insert(self, key: tuple, value: float) -> None:
        if self.capacity == 0:
            return
        self._entries[key] = value
        self._entries.move_to_end(key)
        while len(self._entries) > self.capacity:
            self._entries.popitem(last=False)

    def clear(self) -> None:
        self._entries.clear()
        self.hits = 0
        self.misses = 0

    def configure(self, capacity: int | None = None, quantum: float | None = None) -> None:
        if quantum is not None:
            if quantum <= 0:
                raise ValidationError("cache quantum must be > 0")
            if quantum != self.quantum:
                self.quantum = quantum
                self._entries.clear()  # keys quantized under the old grid
        if capacity is not None:
            if capacity < 0:
                raise ValidationError("cache capacity must be >= 0")
            self.capacity = capacity
            while len(self._entries) > capacity:
                self._entries.popitem(last=False)

    def stats(self) -> dict:
        return {
            "hits": self.hits,
            "misses": self.misses,
            "evaluations": self.misses,
            "size": len(self._entries),
        }


class _ChannelBase:
    """Interface shared by every channel variant."""

    fading = None

    def path_loss(self, pair: PositionPair) -> float:
        raise NotImplementedError

    def total_loss(self, pair: PositionPair) -> float:
        loss = self.path_loss(pair)
        if self.fading is not None:
            loss += self.fading.sample()
        return loss

    def rx_power(self, tx_power_dbm: float, tx_gain_dbi: float, rx_gain_dbi: float, pair: PositionPair) -> float:
        return tx_power_dbm + tx_gain_dbi + rx_gain_dbi - self.total_loss(pair)

    def cache_stats(self) -> dict:
        return {"hits": 0, "misses": 0, "evaluations": 0, "size": 0}

    def cache_clear(self) -> None:
        pass

    def describe(self) -> str:
        raise NotImplementedError


class FriisChannel(_ChannelBase):
    """Free-space path loss at a fixed carrier frequency."""

    def __init__(self, frequency_mhz: float, fading: NormalFading | None = None):
        if frequency_mhz <= 0:
            raise ValidationError("frequency must be > 0")
        self.frequency_mhz = frequency_mhz
        self.fading = fading

    def path_loss(self, pair: PositionPair) -> float:
        return free_space_path_loss(pair.distance(), self.frequency_mhz)

    def describe(self) -> str:
        return f"friis(f={self.frequency_mhz:g} MHz)"


class LogDistanceChannel(_ChannelBase):
    """Log-distance path loss; reference loss defaults to FSPL at d_ref."""

    def __init__(
        self,
        exponent: float,
        frequency_mhz: float,
        reference_distance_m: float = 1.0,
        reference_loss_db: float | None = None,
        fading: NormalFading | None = None,
    ):
        if reference_distance_m <= 0:
            raise ValidationError("reference distance must be > 0")
        self.exponent = exponent
        self.frequency_mhz = frequency_mhz
        self.reference_distance_m = reference_distance_m
        if reference_loss_db is None:
            reference_loss_db = free_space_path_loss(reference_distance_m, frequency_mhz)
        self.reference_loss_db = reference_loss_db
        self.fading = fading

    def path_loss(self, pair: PositionPair) -> float:
        d = pair.distance()
        if d <= 0:
            raise ValidationError("log-distance path loss undefined for distance <= 0")
        return self.reference_loss_db + 10.0 * self.exponent * math.log10(
            d / self.reference_distance_m
        )

    def describe(self) -> str:
        return f"log-distance(gamma={self.exponent:g}, f={self.frequency_mhz:g} MHz)"


class LearnedChannel(_ChannelBase):
    """Trained path-loss regressor + empirical fading + memoizing cache.

    A path-loss query first checks the cache; only on a miss is the
    regressor evaluated (then memoized).  The fading stream is consumed
    once per ``total_loss`` call regardless of hit/miss pattern, so
    caching never changes simulated outcomes.
    """

    def __init__(
        self,
        path_loss_model,
        fading_sampler: FadingSampler,
        cache_capacity: int = 65536,
        cache_quantum: float = 1e-3,
        label: str = "learned",
    ):
        self.model = path_loss_model
        self.fading = fading_sampler
        self.cache = PathLossCache(cache_capacity, cache_quantum)
        self.label = label
        self._features = None  # scratch row reused across queries

    def path_loss(self, pair: PositionPair) -> float:
        cache = self.cache
        if cache.capacity == 0:
            cache.misses += 1
            return float(self.model.predict(pair.features())[0])
        key = cache.key(pair)
        val = cache.lookup(key)
        if val is None:
            val = float(self.model.predict(pair.features())[0])
            cache.insert(key, val)
        return val

    def cache_stats(self) -> dict:
        return self.cache.stats()

    def cache_clear(self) -> None:
        self.cache.clear()

    def cache_configure(self, capacity: int | None = None, quantum: float | None = None) -> None:
        self.cache.configure(capacity, quantum)

    def describe(self) -> str:
        return f"{self.label}(cache={self.cache.capacity})"


def make_disabled_fading(value: float = 0.0, seed: int = 1, stream_id: int = 0) -> FadingSampler:
    """Degenerate sampler that always returns ``value`` but still consumes draws."""
    return FadingSampler(FadingCdf.degenerate(value), seed=seed, stream_id=stream_id)

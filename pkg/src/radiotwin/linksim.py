"""Deterministic discrete-event replay of a single saturated 802.11a UDP link.

Each position pair is simulated independently: a constant-bitrate source
feeds a FIFO MAC queue, every transmission draws a fresh received power
through the channel model (per-packet fading), frames below the preamble
detection threshold are lost, detected frames succeed with a probability
from a per-rate SNR gate, and a simplified probing/EWMA rate-adaptation
policy picks the data rate.  All randomness comes from named seeded
streams, so a (config, seed) pair maps to exactly one result.

Timing model (microseconds): MPDU = payload + 8 (UDP) + 20 (IP) + 8
(LLC/SNAP) + 28 (MAC+FCS) bytes; data symbols = ceil((16 + 8*MPDU + 6) /
N_DBPS); preamble+header 20 us; 4 us per symbol; ACK is 14 bytes at the
highest mandatory control rate not above the data rate; one attempt costs
DIFS 34 + mean backoff 67.5 (CWmin 15, 9 us slots) + T_data + SIFS 16 +
T_ack.
"""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.stats

from . import rngstream
from .dataset import CSV_COLUMNS, LinkBudget, PositionPair
from .errors import ValidationError

RATE_SET = (6, 9, 12, 18, 24, 36, 48, 54)  # Mbit/s, 802.11a
NDBPS = {6: 24, 9: 36, 12: 48, 18: 72, 24: 96, 36: 144, 48: 192, 54: 216}
MANDATORY_CONTROL_RATES = (24, 12, 6)

# per-rate SNR gate midpoints (dB); success ramps linearly over [T-1, T+1]
SNR_THRESHOLDS = {6: 5.0, 9: 6.0, 12: 8.0, 18: 11.0, 24: 14.0, 36: 18.0, 48: 22.0, 54: 24.0}

DIFS_US = 34.0
SIFS_US = 16.0
MEAN_BACKOFF_US = 67.5  # CWmin 15, 9 us slots, no contention
PREAMBLE_HEADER_US = 20.0
SYMBOL_US = 4.0
ACK_BYTES = 14

EWMA_ALPHA = 0.25
STATS_INTERVAL_US = 100_000.0
PROBE_EVERY = 10

_airtime_cache: dict[tuple[int, int], float] = {}


def _data_symbols(n_bytes: int, rate: int) -> int:
    return math.ceil((16 + 8 * n_bytes + 6) / NDBPS[rate])


def airtime_us(rate: int, payload_bytes: int) -> float:
    """Total medium time of one attempt (DIFS + backoff + data + SIFS + ACK)."""
    key = (rate, payload_bytes)
    cached = _airtime_cache.get(key)
    if cached is not None:
        return cached
    if rate not in NDBPS:
        raise ValidationError(f"unknown 802.11a rate {rate} Mbit/s")
    if payload_bytes < 0:
        raise ValidationError("payload must be >= 0 bytes")
    mpdu = payload_bytes + 8 + 20 + 8 + 28
    t_data = PREAMBLE_HEADER_US + SYMBOL_US * _data_symbols(mpdu, rate)
    ack_rate = next(r for r in MANDATORY_CONTROL_RATES if r <= rate)
    t_ack = PREAMBLE_HEADER_US + SYMBOL_US * _data_symbols(ACK_BYTES, ack_rate)
    total = DIFS_US + MEAN_BACKOFF_US + t_data + SIFS_US + t_ack
    _airtime_cache[key] = total
    return total


def per_success(snr_db: float, rate: int) -> float:
    """Frame success probability at the given SNR for the given rate."""
    t = SNR_THRESHOLDS.get(rate)
    if t is None:
        raise ValidationError(f"unknown 802.11a rate {rate} Mbit/s")
    if snr_db >= t + 1.0:
        return 1.0
    if snr_db <= t - 1.0:
        return 0.0
    return (snr_db - (t - 1.0)) / 2.0


@dataclass
class LinkSimConfig:
    budget: LinkBudget
    offered_load_mbps: float = 54.0
    payload_bytes: int = 1400
    warmup_s: float = 1.0
    measure_s: float = 5.0
    preamble_threshold_dbm: float = -90.0
    noise_floor_dbm: float = -94.0
    rates: tuple = RATE_SET
    rate_adaptation: str = "minstrel"  # "minstrel" or "fixed"
    fixed_rate_mbps: int | None = None
    per_packet_fading: bool = True
    seed: int = 1
    stream_id: int = 0
    trace_stride: int = 0  # record every k-th detected frame; 0 disables


@dataclass
class PairResult:
    pair: PositionPair
    throughput_mbps: float
    delivered: int
    lost: int
    rate_histogram: dict[int, int] = field(default_factory=dict)


@dataclass
class SimResult:
    pair_results: list[PairResult]
    wall_seconds: float
    cache_stats: dict
    trace_rows: list[dict] = field(default_factory=list)

    def throughputs(self) -> np.ndarray:
        return np.array([r.throughput_mbps for r in self.pair_results])


class MinstrelLite:
    """EWMA-scored rate selection with periodic probing.

    Per rate, an EWMA of the per-interval success ratio (alpha = 0.25,
    100 ms intervals) scores expected goodput ``ewma * payload_bits /
    airtime``; every 10th frame probes a uniformly random non-best rate.
    """

    def __init__(self, rates, payload_bytes: int, probe_gen):
        self.rates = tuple(rates)
        self.efficiency = np.array(
            [payload_bytes * 8.0 / airtime_us(r, payload_bytes) for r in self.rates]
        )
        self.ewma = np.ones(len(self.rates))
        self.attempts = np.zeros(len(self.rates), dtype=np.int64)
        self.successes = np.zeros(len(self.rates), dtype=np.int64)
        self.next_fold_us = STATS_INTERVAL_US
        self.frame_no = 0
        self._probe_gen = probe_gen

    def advance_to(self, now_us: float) -> None:
        while now_us >= self.next_fold_us:
            tried = self.attempts > 0
            if tried.any():
                ratio = self.successes[tried] / self.attempts[tried]
                self.ewma[tried] = (1.0 - EWMA_ALPHA) * self.ewma[tried] + EWMA_ALPHA * ratio
                self.attempts[:] = 0
                self.successes[:] = 0
            self.next_fold_us += STATS_INTERVAL_US

    def best_index(self) -> int:
        return int(np.argmax(self.ewma * self.efficiency))

    def choose(self) -> int:
        """Rate index for the next frame (probing every 10th)."""
        self.frame_no += 1
        best = self.best_index()
        if self.frame_no % PROBE_EVERY == 0 and len(self.rates) > 1:
            other = int(self._probe_gen.integers(0, len(self.rates) - 1))
            if other >= best:
                other += 1
            return other
        return best

    def update(self, rate_index: int, success: bool) -> None:
        self.attempts[rate_index] += 1
        if success:
            self.successes[rate_index] += 1


def _validate_config(cfg: LinkSimConfig) -> None:
    if cfg.measure_s <= 0:
        raise ValidationError("measurement window must be > 0 s")
    if cfg.warmup_s < 0:
        raise ValidationError("warmup must be >= 0 s")
    if cfg.offered_load_mbps <= 0:
        raise ValidationError("offered load must be > 0")
    if cfg.payload_bytes <= 0:
        raise ValidationError("payload must be > 0 bytes")
    for r in cfg.rates:
        if r not in NDBPS:
            raise ValidationError(f"unknown 802.11a rate {r} Mbit/s")
    if cfg.rate_adaptation == "fixed":
        if cfg.fixed_rate_mbps not in cfg.rates:
            raise ValidationError("fixed rate adaptation needs fixed_rate_mbps from the rate set")
    elif cfg.rate_adaptation != "minstrel":
        raise ValidationError(f"unknown rate adaptation {cfg.rate_adaptation!r}")


def run_scenario(pairs, model, cfg: LinkSimConfig) -> SimResult:
    """Replay every position pair through the channel model.

    Returns per-pair mean throughput over the measurement window plus
    delivery counters, a rate histogram of in-window attempts, and (when
    ``trace_stride`` > 0) dataset-schema trace rows of detected frames.
    """
    if not pairs:
        raise ValidationError("no position pairs to simulate")
    _validate_config(cfg)

    per_gen = rngstream.make_stream(cfg.seed, rngstream.FRAME_ERROR, cfg.stream_id)
    probe_gen = rngstream.make_stream(cfg.seed, rngstream.RATE_PROBE, cfg.stream_id)

    budget = cfg.budget
    t_arr = cfg.payload_bytes * 8.0 / cfg.offered_load_mbps  # us between arrivals
    warmup_us = cfg.warmup_s * 1e6
    end_us = warmup_us + cfg.measure_s * 1e6
    payload_bits = cfg.payload_bytes * 8

    airtimes = {r: airtime_us(r, cfg.payload_bytes) for r in cfg.rates}
    fixed = cfg.rate_adaptation == "fixed"

    t0 = time.perf_counter()
    results: list[PairResult] = []
    trace_rows: list[dict] = []
    for pair in pairs:
        minstrel = None if fixed else MinstrelLite(cfg.rates, cfg.payload_bytes, probe_gen)
        delivered = 0
        lost = 0
        hist: dict[int, int] = {}
        pair_trace: list[dict] = []

        if not cfg.per_packet_fading:
            static_loss = model.total_loss(pair)

        t_free = 0.0
        k = 0
        frame_no = 0
        while True:
            start = t_free if t_free > k * t_arr else k * t_arr
            if start >= end_us:
                break
            frame_no += 1
            if fixed:
                rate = cfg.fixed_rate_mbps
            else:
                minstrel.advance_to(start)
                rate_idx = minstrel.choose()
                rate = cfg.rates[rate_idx]

            if cfg.per_packet_fading:
                rx = model.rx_power(
                    budget.tx_power_dbm,
                    budget.tx_antenna_gain_dbi,
                    budget.rx_antenna_gain_dbi,
                    pair,
                )
            else:
                rx = (
                    budget.tx_power_dbm
                    + budget.tx_antenna_gain_dbi
                    + budget.rx_antenna_gain_dbi
                    - static_loss
                )

            detected = rx >= cfg.preamble_threshold_dbm
            if detected:
                snr = rx - cfg.noise_floor_dbm
                p = per_success(snr, rate)
                ok = per_gen.random() < p
            else:
                ok = False

            if not fixed:
                minstrel.update(rate_idx, ok)

            done = start + airtimes[rate]
            if warmup_us <= done < end_us:
                hist[rate] = hist.get(rate, 0) + 1
                if ok:
                    delivered += 1
                else:
                    lost += 1

            if cfg.trace_stride > 0 and detected and frame_no % cfg.trace_stride == 0:
                pair_trace.append({"pair": pair, "snr_db": snr})

            t_free = done
            k += 1

        throughput = delivered * payload_bits / (cfg.measure_s * 1e6)
        results.append(
            PairResult(
                pair=pair,
                throughput_mbps=throughput,
                delivered=delivered,
                lost=lost,
                rate_histogram=hist,
            )
        )
        for row in pair_trace:
            row["noise_dbm"] = cfg.noise_floor_dbm
            row["throughput_mbps"] = throughput
        trace_rows.extend(pair_trace)

    wall = time.perf_counter() - t0
    return SimResult(
        pair_results=results,
        wall_seconds=wall,
        cache_stats=model.cache_stats(),
        trace_rows=trace_rows,
    )


def write_results_csv(path, result: SimResult) -> None:
    """Per-pair results: positions, throughput, delivered, lost."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["tx_x", "tx_y", "tx_z", "rx_x", "rx_y", "rx_z", "throughput_mbps", "delivered", "lost"]
        )
        for r in result.pair_results:
            tx, rx = r.pair.tx, r.pair.rx
            writer.writerow(
                [
                    repr(tx.x),
                    repr(tx.y),
                    repr(tx.z),
                    repr(rx.x),
                    repr(rx.y),
                    repr(rx.z),
                    repr(r.throughput_mbps),
                    r.delivered,
                    r.lost,
                ]
            )


def write_trace_csv(path, result: SimResult) -> None:
    """Detected-frame trace in the dataset CSV schema (SNR format)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for row in result.trace_rows:
            pair = row["pair"]
            tx, rx = pair.tx, pair.rx
            writer.writerow(
                [
                    repr(tx.x),
                    repr(tx.y),
                    repr(tx.z),
                    repr(rx.x),
                    repr(rx.y),
                    repr(rx.z),
                    "",
                    repr(row["snr_db"]),
                    repr(row["noise_dbm"]),
                    "",
                    repr(row["throughput_mbps"]),
                ]
            )


def benchmark(pairs, model_factories, cfg: LinkSimConfig, repetitions: int = 10, cache_modes=("on", "off")):
    """Wall-clock comparison across models and cache settings.

    ``model_factories`` is a list of ``(label, uses_cache, factory)`` with
    ``factory(cache_on, seed)`` building a fresh channel model.  Each
    repetition runs with its own seed; rows report mean duration with the
    Student-t 95% confidence interval, and cache transparency (identical
    simulated outcomes across cache settings) is verified per model.
    """
    if repetitions < 2:
        raise ValidationError("need at least 2 repetitions for a confidence interval")
    rows = []
    for label, uses_cache, factory in model_factories:
        modes = cache_modes if uses_cache else ("on",)
        outcomes: dict[tuple[str, int], tuple] = {}
        durations: dict[str, list[float]] = {m: [] for m in modes}
        for mode in modes:
            for rep in range(repetitions):
                seed = cfg.seed + rep
                model = factory(mode == "on", seed)
                run_cfg = replace(cfg, seed=seed)
                res = run_scenario(pairs, model, run_cfg)
                durations[mode].append(res.wall_seconds)
                outcomes[(mode, rep)] = tuple(res.throughputs())
        transparent = True
        if uses_cache and len(modes) == 2:
            transparent = all(
                outcomes[("on", rep)] == outcomes[("off", rep)] for rep in range(repetitions)
            )
        for mode in modes:
            vals = np.array(durations[mode])
            ci = scipy.stats.t.ppf(0.975, repetitions - 1) * vals.std(ddof=1) / math.sqrt(repetitions)
            rows.append(
                {
                    "model": label,
                    "cache": mode if uses_cache else "n/a",
                    "mean_s": float(vals.mean()),
                    "ci95_s": float(ci),
                    "runs": repetitions,
                    "transparent": transparent,
                }
            )
        if uses_cache and len(modes) == 2:
            on = float(np.mean(durations["on"]))
            off = float(np.mean(durations["off"]))
            for row in rows[-2:]:
                row["speedup"] = off / on if on > 0 else float("inf")
    return rows

#!/usr/bin/env python3
"""Regenerate the packaged example dataset and self-test expectations.

The example trace is fully synthetic: a fixed node at the origin and a
mobile node stepping away along the X and Y axes, with both traffic
directions present.  Ground truth is a log-distance channel (exponent 1.7,
5220 MHz) with a +0.8 dB penalty on the reverse direction (so the trace is
direction-asymmetric) and Normal(0 dB, 3 dB) fast fading.  Three +35 dB
spikes are injected so the outlier filter has work to do, and per-pair
throughput comes from a short link-simulator run over the true channel.

Running this script rewrites src/radiotwin/data/example/ in place:
    position_trace.csv, link_budget.json, scenario.json, selftest_expected.json
"""

from __future__ import annotations

import csv
import json
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from radiotwin import dataset, fading, linksim, regress  # noqa: E402
from radiotwin.channel import LogDistanceChannel, NormalFading  # noqa: E402
from radiotwin.dataset import LinkBudget, Position, PositionPair  # noqa: E402
from radiotwin.manifest import write_json  # noqa: E402

OUT_DIR = Path(__file__).resolve().parent.parent / "src" / "radiotwin" / "data" / "example"

SEED = 2026
SAMPLES_PER_PAIR = 40
REVERSE_PENALTY_DB = 0.8
FADING_SIGMA_DB = 3.0
OUTLIER_SPIKE_DB = 35.0

BUDGET = {
    "wifi_standard": "802.11a",
    "tx_power_dbm": 1.0,
    "tx_antenna_gain_dbi": -7.0,
    "rx_antenna_gain_dbi": -7.0,
    "channel_frequency_mhz": 5220.0,
    "channel_bandwidth_mhz": 20.0,
}

SELFTEST_SEED = 42
SELFTEST_SVR = {"C": 10.0, "gamma": 10.0}


def build_pairs() -> list[PositionPair]:
    anchor = Position(0.0, 0.0, 1.0)
    spots = []
    for d in np.arange(1.0, 46.0, 2.5):
        spots.append(Position(float(d), 0.0, 1.0))
    for d in np.arange(1.0, 46.0, 2.5):
        spots.append(Position(0.0, float(d), 1.0))
    pairs = []
    for s in spots:
        pairs.append(PositionPair(anchor, s))  # forward
        pairs.append(PositionPair(s, anchor))  # reverse (penalized)
    return pairs


def true_path_loss(pair: PositionPair, channel: LogDistanceChannel) -> float:
    loss = channel.path_loss(pair)
    if pair.rx.as_tuple() == (0.0, 0.0, 1.0):
        loss += REVERSE_PENALTY_DB
    return loss


def main() -> None:
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(SEED)
    channel = LogDistanceChannel(1.7, BUDGET["channel_frequency_mhz"])
    budget = LinkBudget(**BUDGET)
    pairs = build_pairs()

    # throughput column: short replay of each pair over the true channel
    class _TrueChannel(LogDistanceChannel):
        def path_loss(self, pair):
            return true_path_loss(pair, channel)

    sim_channel = _TrueChannel(
        1.7,
        BUDGET["channel_frequency_mhz"],
        fading=NormalFading(0.0, FADING_SIGMA_DB, seed=SEED, stream_id=9),
    )
    cfg = linksim.LinkSimConfig(budget=budget, warmup_s=0.3, measure_s=1.0, seed=SEED)
    result = linksim.run_scenario(pairs, sim_channel, cfg)
    throughput = {r.pair: r.throughput_mbps for r in result.pair_results}

    rows = []
    for pair in pairs:
        pl = true_path_loss(pair, channel)
        for f in rng.normal(0.0, FADING_SIGMA_DB, SAMPLES_PER_PAIR):
            loss = pl + f
            rx = (
                BUDGET["tx_power_dbm"]
                + BUDGET["tx_antenna_gain_dbi"]
                + BUDGET["rx_antenna_gain_dbi"]
                - loss
            )
            snr = rx - (-94.0)
            rows.append((pair, snr, throughput[pair]))

    # three obvious spikes for the outlier filter (z well above 5)
    spike_pairs = [pairs[0], pairs[7], pairs[20]]
    for pair in spike_pairs:
        pl = true_path_loss(pair, channel) + OUTLIER_SPIKE_DB
        rx = 1.0 - 7.0 - 7.0 - pl
        rows.append((pair, rx + 94.0, throughput[pair]))

    trace_path = OUT_DIR / "position_trace.csv"
    with open(trace_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(dataset.CSV_COLUMNS)
        for pair, snr, tput in rows:
            tx, rx_ = pair.tx, pair.rx
            writer.writerow(
                [
                    repr(tx.x), repr(tx.y), repr(tx.z),
                    repr(rx_.x), repr(rx_.y), repr(rx_.z),
                    "", repr(float(snr)), repr(-94.0), "", repr(float(tput)),
                ]
            )

    write_json(OUT_DIR / "link_budget.json", BUDGET)
    write_json(
        OUT_DIR / "scenario.json",
        {
            "budget": BUDGET,
            "offered_load_mbps": 54.0,
            "payload_bytes": 1400,
            "warmup_s": 1.0,
            "measure_s": 5.0,
            "preamble_threshold_dbm": -90.0,
            "noise_floor_dbm": -94.0,
            "rate_adaptation": "minstrel",
            "per_packet_fading": True,
            "pairs_from": "position_trace.csv",
        },
    )

    # ---- frozen self-test expectations (reference pipeline run) ----
    samples, loaded_budget = dataset.load_dataset(trace_path, OUT_DIR / "link_budget.json")
    ds, summary = dataset.preprocess(samples, loaded_budget, seed=SELFTEST_SEED)
    tr = ds.train_indices()
    model = regress.train_svr(
        ds.features(tr),
        ds.path_loss_targets(tr),
        regress.SvrParams(C=SELFTEST_SVR["C"], gamma=SELFTEST_SVR["gamma"]),
    )
    cdf = fading.fit_cdf(ds.fading_residuals)
    sampler = fading.FadingSampler(cdf, seed=SELFTEST_SEED, stream_id=0)
    pinned_draws = [sampler.sample() for _ in range(8)]

    known = []
    pair_list = list(ds.path_loss_table)
    for idx in np.linspace(0, len(pair_list) - 1, 8).astype(int):
        pair = pair_list[int(idx)]
        known.append(
            {
                "features": list(pair.features()),
                "path_loss_db": ds.path_loss_table[pair],
            }
        )

    write_json(
        OUT_DIR / "selftest_expected.json",
        {
            "seed": SELFTEST_SEED,
            "svr": SELFTEST_SVR,
            "tolerance_db": 0.5,
            "outliers_removed": summary["outliers_removed"],
            "unique_pairs": summary["unique_pairs"],
            "residual_std_db": summary["residual_std_db"],
            "pinned_draws": pinned_draws,
            "known_pairs": known,
        },
    )
    print(f"wrote {len(rows)} trace rows and expectations to {OUT_DIR}")


if __name__ == "__main__":
    main()

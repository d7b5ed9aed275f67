"""Trace ingestion: CSV + link-budget loading, loss derivation, outlier
removal, decomposition into path loss + fading residuals, train/test split.

Dataset CSV schema (UTF-8, header mandatory)::

    tx_x,tx_y,tx_z,rx_x,rx_y,rx_z,loss_db,snr_db,noise_dbm,rx_power_dbm,throughput_mbps

Empty cells mean "absent" for the optional columns.  Loss can be given
directly (``loss_db``) or derived from ``rx_power_dbm`` or from
``snr_db`` + ``noise_dbm`` together with the link budget.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from . import rngstream
from .errors import DataFormatError, ValidationError

CSV_COLUMNS = [
    "tx_x",
    "tx_y",
    "tx_z",
    "rx_x",
    "rx_y",
    "rx_z",
    "loss_db",
    "snr_db",
    "noise_dbm",
    "rx_power_dbm",
    "throughput_mbps",
]

PREPROCESSED_EXTRA = ["path_loss_db", "fading_db", "split"]

BUDGET_KEYS = [
    "wifi_standard",
    "tx_power_dbm",
    "tx_antenna_gain_dbi",
    "rx_antenna_gain_dbi",
    "channel_frequency_mhz",
    "channel_bandwidth_mhz",
]

DEFAULT_NOISE_FLOOR_DBM = -94.0  # thermal noise for 20 MHz (-101 dBm) + 7 dB noise figure


@dataclass(frozen=True)
class Position:
    """Cartesian coordinates in meters, relative to the scenario origin."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        for v in (self.x, self.y, self.z):
            if not math.isfinite(v):
                raise ValidationError(f"position coordinates must be finite, got {self}")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.z)


@dataclass(frozen=True)
class PositionPair:
    """Ordered transmitter/receiver positions; direction matters."""

    tx: Position
    rx: Position

    def features(self) -> np.ndarray:
        return np.array(
            [self.tx.x, self.tx.y, self.tx.z, self.rx.x, self.rx.y, self.rx.z]
        )

    def swapped(self) -> "PositionPair":
        return PositionPair(tx=self.rx, rx=self.tx)

    def distance(self) -> float:
        return math.dist(self.tx.as_tuple(), self.rx.as_tuple())


def pair_from_features(v: Sequence[float]) -> PositionPair:
    return PositionPair(Position(v[0], v[1], v[2]), Position(v[3], v[4], v[5]))


@dataclass(frozen=True)
class LinkBudget:
    wifi_standard: str
    tx_power_dbm: float
    tx_antenna_gain_dbi: float
    rx_antenna_gain_dbi: float
    channel_frequency_mhz: float
    channel_bandwidth_mhz: float

    def __post_init__(self):
        if self.channel_frequency_mhz <= 0:
            raise ValidationError("channel_frequency_mhz must be > 0")
        if self.channel_bandwidth_mhz <= 0:
            raise ValidationError("channel_bandwidth_mhz must be > 0")


@dataclass(frozen=True)
class RawSample:
    pair: PositionPair
    loss: float | None = None
    snr: float | None = None
    noise_floor: float | None = None
    rx_power: float | None = None
    throughput: float | None = None  # pass-through metadata, Mbit/s


def load_link_budget(path) -> LinkBudget:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"link budget {path}: invalid JSON ({exc})") from exc
    missing = [k for k in BUDGET_KEYS if k not in data]
    if missing:
        raise DataFormatError(f"link budget {path}: missing keys {missing}")
    return LinkBudget(
        wifi_standard=str(data["wifi_standard"]),
        tx_power_dbm=float(data["tx_power_dbm"]),
        tx_antenna_gain_dbi=float(data["tx_antenna_gain_dbi"]),
        rx_antenna_gain_dbi=float(data["rx_antenna_gain_dbi"]),
        channel_frequency_mhz=float(data["channel_frequency_mhz"]),
        channel_bandwidth_mhz=float(data["channel_bandwidth_mhz"]),
    )


def _parse_float(cell: str, row_no: int, col: str) -> float | None:
    cell = cell.strip()
    if cell == "":
        return None
    try:
        return float(cell)
    except ValueError:
        raise DataFormatError(
            f"row {row_no}: column {col!r} is not a number: {cell!r}"
        ) from None


def load_dataset(csv_path, link_budget_path=None):
    """Read a trace CSV (and optional link-budget JSON).

    Returns ``(samples, budget)``; ``budget`` is None when no JSON is given.
    Row numbers in error messages are 1-based including the header.
    """
    budget = load_link_budget(link_budget_path) if link_budget_path else None
    samples: list[RawSample] = []
    with open(csv_path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataFormatError(f"{csv_path}: empty file, header expected") from None
        header = [h.strip() for h in header]
        if header != CSV_COLUMNS:
            raise DataFormatError(
                f"{csv_path}: header mismatch; expected {','.join(CSV_COLUMNS)}"
            )
        for row_no, row in enumerate(reader, start=2):
            if not row or all(c.strip() == "" for c in row):
                continue
            if len(row) != len(CSV_COLUMNS):
                raise DataFormatError(
                    f"row {row_no}: expected {len(CSV_COLUMNS)} cells, got {len(row)}"
                )
            vals = {
                col: _parse_float(cell, row_no, col)
                for col, cell in zip(CSV_COLUMNS, row)
            }
            for col in CSV_COLUMNS[:6]:
                if vals[col] is None:
                    raise ValidationError(f"row {row_no}: position column {col!r} is empty")
            pair = PositionPair(
                Position(vals["tx_x"], vals["tx_y"], vals["tx_z"]),
                Position(vals["rx_x"], vals["rx_y"], vals["rx_z"]),
            )
            sample = RawSample(
                pair=pair,
                loss=vals["loss_db"],
                snr=vals["snr_db"],
                noise_floor=vals["noise_dbm"],
                rx_power=vals["rx_power_dbm"],
                throughput=vals["throughput_mbps"],
            )
            if sample.loss is None and sample.rx_power is None and sample.snr is None:
                raise ValidationError(
                    f"row {row_no}: no loss_db, rx_power_dbm or snr_db; loss is underivable"
                )
            samples.append(sample)
    return samples, budget


def derive_loss(
    sample: RawSample,
    budget: LinkBudget | None,
    default_noise_floor: float | None = None,
) -> float:
    """Propagation loss in dB for one sample.

    Direct ``loss`` wins; otherwise rx_power (measured or noise+SNR) is
    inverted through the link budget:  loss = tx + g_tx + g_rx - rx.
    The result excludes antenna gains, which the channel model re-applies.
    """
    if sample.loss is not None:
        return sample.loss
    rx = sample.rx_power
    if rx is None:
        noise = sample.noise_floor
        if noise is None:
            noise = default_noise_floor
        if sample.snr is None or noise is None:
            raise ValidationError(
                "loss underivable: need loss_db, rx_power_dbm, or snr_db with a noise floor"
            )
        rx = noise + sample.snr
    if budget is None:
        raise ValidationError("link budget required to derive loss from received power")
    return budget.tx_power_dbm + budget.tx_antenna_gain_dbi + budget.rx_antenna_gain_dbi - rx


def _group_indices(pairs: Sequence[PositionPair]) -> dict[PositionPair, list[int]]:
    groups: dict[PositionPair, list[int]] = {}
    for i, p in enumerate(pairs):
        groups.setdefault(p, []).append(i)
    return groups


def remove_outliers(
    samples: Sequence[tuple[PositionPair, float]], z_threshold: float = 5.0
) -> tuple[list[tuple[PositionPair, float]], int]:
    """Drop samples whose per-position-group |z| exceeds the threshold.

    z uses the population mean and standard deviation of the group; groups
    with zero deviation are kept whole.  Input order is preserved.
    """
    keep = outlier_mask(samples, z_threshold)
    kept = [s for s, k in zip(samples, keep) if k]
    return kept, int(len(samples) - len(kept))


def outlier_mask(
    samples: Sequence[tuple[PositionPair, float]], z_threshold: float = 5.0
) -> np.ndarray:
    """Boolean keep-mask for :func:`remove_outliers` (aligned with input)."""
    losses = np.array([s[1] for s in samples], dtype=float)
    keep = np.ones(len(samples), dtype=bool)
    for idx in _group_indices([s[0] for s in samples]).values():
        vals = losses[idx]
        mu = vals.mean()
        sigma = vals.std()
        if sigma == 0.0:
            continue
        z = np.abs(vals - mu) / sigma
        for local, bad in zip(idx, z > z_threshold):
            if bad:
                keep[local] = False
    return keep


@dataclass
class DecomposedDataset:
    """Per-sample total loss split into a per-pair mean and a residual."""

    samples: list[tuple[PositionPair, float]]
    path_loss_table: dict[PositionPair, float]
    fading_residuals: np.ndarray
    split: np.ndarray | None = None  # uint8 per sample, 1 = train, 0 = test
    raw: list[RawSample] | None = None  # optional aligned pass-through rows

    def features(self, indices=None) -> np.ndarray:
        idx = range(len(self.samples)) if indices is None else indices
        return np.array([self.samples[i][0].features() for i in idx])

    def path_loss_targets(self, indices=None) -> np.ndarray:
        idx = range(len(self.samples)) if indices is None else indices
        return np.array([self.path_loss_table[self.samples[i][0]] for i in idx])

    def total_losses(self, indices=None) -> np.ndarray:
        idx = range(len(self.samples)) if indices is None else indices
        return np.array([self.samples[i][1] for i in idx])

    def train_indices(self) -> np.ndarray:
        if self.split is None:
            raise ValidationError("dataset has no train/test split")
        return np.nonzero(self.split == 1)[0]

    def test_indices(self) -> np.ndarray:
        if self.split is None:
            raise ValidationError("dataset has no train/test split")
        return np.nonzero(self.split == 0)[0]


def decompose(
    samples: Sequence[tuple[PositionPair, float]],
    raw: Sequence[RawSample] | None = None,
) -> DecomposedDataset:
    """Split total loss into per-pair mean path loss plus zero-mean residuals."""
    losses = np.array([s[1] for s in samples], dtype=float)
    table: dict[PositionPair, float] = {}
    residuals = np.empty(len(samples))
    for pair, idx in _group_indices([s[0] for s in samples]).items():
        mean = float(np.mean(losses[idx]))
        table[pair] = mean
        residuals[idx] = losses[idx] - mean
    return DecomposedDataset(
        samples=list(samples),
        path_loss_table=table,
        fading_residuals=residuals,
        raw=list(raw) if raw is not None else None,
    )


def split_samples(
    dataset: DecomposedDataset, train_fraction: float, seed: int
) -> DecomposedDataset:
    """Assign sample-level train/test labels, deterministic in (seed, N, fraction)."""
    if not 0.0 < train_fraction < 1.0:
        raise ValidationError(f"train_fraction must be in (0, 1), got {train_fraction}")
    n = len(dataset.samples)
    if n < 2:
        raise ValidationError("need at least 2 samples to split")
    n_train = int(train_fraction * n + 0.5)
    n_train = min(max(n_train, 1), n - 1)
    gen = rngstream.make_stream(seed, rngstream.DATASET_SPLIT)
    perm = gen.permutation(n)
    split = np.zeros(n, dtype=np.uint8)
    split[perm[:n_train]] = 1
    return replace(dataset, split=split)


def _fmt(value) -> str:
    return "" if value is None else repr(float(value))


def write_preprocessed(path, dataset: DecomposedDataset) -> None:
    """Write the post-pipeline CSV (input schema + path_loss_db, fading_db, split)."""
    if dataset.split is None:
        raise ValidationError("split labels required before writing a preprocessed CSV")
    raw = dataset.raw or [RawSample(pair=p) for p, _ in dataset.samples]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS + PREPROCESSED_EXTRA)
        for i, ((pair, loss), r) in enumerate(zip(dataset.samples, raw)):
            residual = dataset.fading_residuals[i]
            writer.writerow(
                [
                    _fmt(pair.tx.x),
                    _fmt(pair.tx.y),
                    _fmt(pair.tx.z),
                    _fmt(pair.rx.x),
                    _fmt(pair.rx.y),
                    _fmt(pair.rx.z),
                    _fmt(loss),
                    _fmt(r.snr),
                    _fmt(r.noise_floor),
                    _fmt(r.rx_power),
                    _fmt(r.throughput),
                    _fmt(dataset.path_loss_table[pair]),
                    _fmt(residual),
                    "train" if dataset.split[i] else "test",
                ]
            )


def load_preprocessed(path) -> DecomposedDataset:
    """Read back a preprocessed CSV written by :func:`write_preprocessed`."""
    samples: list[tuple[PositionPair, float]] = []
    raw: list[RawSample] = []
    table: dict[PositionPair, float] = {}
    residuals: list[float] = []
    split: list[int] = []
    expected = CSV_COLUMNS + PREPROCESSED_EXTRA
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataFormatError(f"{path}: empty file, header expected") from None
        if [h.strip() for h in header] != expected:
            raise DataFormatError(f"{path}: header mismatch; expected {','.join(expected)}")
        for row_no, row in enumerate(reader, start=2):
            if not row or all(c.strip() == "" for c in row):
                continue
            if len(row) != len(expected):
                raise DataFormatError(
                    f"row {row_no}: expected {len(expected)} cells, got {len(row)}"
                )
            vals = {col: _parse_float(cell, row_no, col) for col, cell in zip(expected[:-1], row)}
            label = row[-1].strip()
            if label not in ("train", "test"):
                raise DataFormatError(f"row {row_no}: split must be train or test, got {label!r}")
            pair = PositionPair(
                Position(vals["tx_x"], vals["tx_y"], vals["tx_z"]),
                Position(vals["rx_x"], vals["rx_y"], vals["rx_z"]),
            )
            if vals["loss_db"] is None or vals["path_loss_db"] is None or vals["fading_db"] is None:
                raise ValidationError(f"row {row_no}: preprocessed rows need loss, path loss and fading")
            samples.append((pair, vals["loss_db"]))
            raw.append(
                RawSample(
                    pair=pair,
                    loss=vals["loss_db"],
                    snr=vals["snr_db"],
                    noise_floor=vals["noise_dbm"],
                    rx_power=vals["rx_power_dbm"],
                    throughput=vals["throughput_mbps"],
                )
            )
            table[pair] = vals["path_loss_db"]
            residuals.append(vals["fading_db"])
            split.append(1 if label == "train" else 0)
    return DecomposedDataset(
        samples=samples,
        path_loss_table=table,
        fading_residuals=np.array(residuals),
        split=np.array(split, dtype=np.uint8),
        raw=raw,
    )


def preprocess(
    samples: Sequence[RawSample],
    budget: LinkBudget | None,
    z_threshold: float = 5.0,
    train_fraction: float = 0.8,
    seed: int = 1,
    default_noise_floor: float | None = DEFAULT_NOISE_FLOOR_DBM,
) -> tuple[DecomposedDataset, dict]:
    """Full pipeline: derive loss, filter outliers, decompose, split.

    Returns the dataset plus a summary dict for reporting.
    """
    with_loss = [
        (s.pair, derive_loss(s, budget, default_noise_floor)) for s in samples
    ]
    keep = outlier_mask(with_loss, z_threshold)
    kept = [s for s, k in zip(with_loss, keep) if k]
    kept_raw = [s for s, k in zip(samples, keep) if k]
    if len(kept) < 2:
        raise ValidationError("fewer than 2 samples remain after outlier removal")
    ds = decompose(kept, raw=kept_raw)
    ds = split_samples(ds, train_fraction, seed)
    residual_std = float(ds.fading_residuals.std())
    summary = {
        "total_rows": len(samples),
        "outliers_removed": int(len(samples) - len(kept)),
        "kept_rows": len(kept),
        "unique_pairs": len(ds.path_loss_table),
        "train_rows": int(ds.split.sum()),
        "test_rows": int(len(kept) - ds.split.sum()),
        "residual_std_db": residual_std,
        "loss_mean_db": float(np.mean([l for _, l in kept])),
    }
    return ds, summary

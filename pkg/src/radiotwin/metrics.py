"""Precision analytics: signed/absolute error series, empirical error CDFs
and percentile extraction for loss predictions and throughput comparisons.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .dataset import PositionPair
from .errors import ValidationError


@dataclass
class ErrorSeries:
    """Signed errors (predicted minus reference) for one model."""

    values: np.ndarray
    kind: str  # "loss" or "throughput"
    label: str

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.size and not np.all(np.isfinite(vals)):
            raise ValidationError("error series must contain finite values only")
        self.values = vals

    def absolute(self) -> np.ndarray:
        return np.abs(self.values)


def loss_errors(model, test_pairs, test_losses, label: str | None = None) -> ErrorSeries:
    """Per-sample loss prediction errors, one fading draw per prediction."""
    test_losses = np.asarray(test_losses, dtype=float)
    if len(test_pairs) == 0:
        raise ValidationError("test set is empty")
    if len(test_pairs) != test_losses.shape[0]:
        raise ValidationError("pair/loss counts differ")
    preds = np.array([model.total_loss(p) for p in test_pairs])
    return ErrorSeries(
        values=preds - test_losses,
        kind="loss",
        label=label or model.describe(),
    )


def error_cdf(series: ErrorSeries, absolute: bool = False) -> np.ndarray:
    """Empirical CDF points (value, percentile), percentile rank 100*k/(N-1)."""
    vals = series.absolute() if absolute else series.values
    if vals.size == 0:
        raise ValidationError("error series is empty")
    vals = np.sort(vals)
    if vals.size == 1:
        return np.array([[vals[0], 0.0], [vals[0], 100.0]])
    ranks = 100.0 * np.arange(vals.size) / (vals.size - 1)
    return np.column_stack([vals, ranks])


def percentile(values, q: float) -> float:
    """Percentile under the 100*k/(N-1) rank convention (numpy 'linear')."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise ValidationError("cannot take a percentile of an empty series")
    return float(np.percentile(values, q))


def throughput_errors(sim_result, reference, label: str = "sim") -> ErrorSeries:
    """Per-pair throughput errors against reference (pair, Mbit/s) values.

    Every simulated pair must have a reference entry; missing pairs are
    reported together in the raised error.
    """
    ref_map: dict[PositionPair, float] = dict(reference)
    errors = []
    missing = []
    for r in sim_result.pair_results:
        ref = ref_map.get(r.pair)
        if ref is None:
            missing.append(r.pair)
            continue
        errors.append(r.throughput_mbps - ref)
    if missing:
        listing = "; ".join(
            f"tx{p.tx.as_tuple()}->rx{p.rx.as_tuple()}" for p in missing[:5]
        )
        raise ValidationError(
            f"{len(missing)} simulated pair(s) lack a reference throughput: {listing}"
        )
    return ErrorSeries(values=np.array(errors), kind="throughput", label=label)


def write_cdf_csv(path, points: np.ndarray, label: str, kind: str, seed) -> None:
    """CDF points as ``value,percentile`` with a metadata comment line."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# model={label} kind={kind} seed={seed}\n")
        writer = csv.writer(fh)
        writer.writerow(["value", "percentile"])
        for v, p in points:
            writer.writerow([repr(float(v)), repr(float(p))])

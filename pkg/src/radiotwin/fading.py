"""Empirical fast-fading distribution: CDF fit, CSV round-trip, seedable
inverse-transform sampling, and the binned fit-quality score.

The CDF is a list of (loss dB, percentile) knots with linear interpolation
between them; percentiles span exactly [0, 100].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels, rngstream
from .errors import DataFormatError, ValidationError

CDF_HEADER = "fading_db,percentile"


@dataclass(frozen=True)
class FadingCdf:
    """Piecewise-linear empirical CDF of fading residuals."""

    xs: np.ndarray  # loss values, dB, non-decreasing
    ys: np.ndarray  # percentiles in [0, 100], non-decreasing

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        ys = np.asarray(self.ys, dtype=float)
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)
        if xs.ndim != 1 or xs.shape != ys.shape or xs.shape[0] < 2:
            raise ValidationError("CDF needs at least 2 aligned (x, y) points")
        if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(ys))):
            raise ValidationError("CDF points must be finite")
        if np.any(np.diff(xs) < 0):
            raise ValidationError("CDF x values must be non-decreasing")
        if np.any(np.diff(ys) < 0):
            raise ValidationError("CDF percentiles must be non-decreasing")
        if ys[0] != 0.0 or ys[-1] != 100.0:
            raise ValidationError(
                "CDF percentiles must span [0, 100] "
                f"(got first={ys[0]}, last={ys[-1]}; a [0, 1] scale is not accepted)"
            )

    def eval_percent(self, x) -> np.ndarray:
        """CDF value in percent at each query point, P(X <= x) convention."""
        return kernels.cdf_eval(np.atleast_1d(np.asarray(x, dtype=float)), self.xs, self.ys)

    def inverse(self, u) -> np.ndarray:
        """Inverse transform of percentile draws ``u`` in [0, 100)."""
        return kernels.inverse_cdf(np.atleast_1d(np.asarray(u, dtype=float)), self.xs, self.ys)

    @staticmethod
    def degenerate(value: float = 0.0) -> "FadingCdf":
        """Point-mass CDF; sampling always returns ``value`` (fading off)."""
        return FadingCdf(np.array([value, value]), np.array([0.0, 100.0]))


def fit_cdf(residuals, max_points: int = 1024) -> FadingCdf:
    """Fit the empirical CDF of residuals.

    The k-th of N sorted values gets percentile rank 100*k/(N-1), so the
    sample minimum maps to 0% and the maximum to 100%.  Sets larger than
    ``max_points`` are thinned to evenly spaced quantiles, always keeping
    both extremes.
    """
    vals = np.sort(np.asarray(residuals, dtype=float))
    n = vals.shape[0]
    if n < 2:
        raise ValidationError("need at least 2 residuals to fit a CDF")
    if max_points < 2:
        raise ValidationError("max_points must be >= 2")
    if n > max_points:
        idx = np.round(np.linspace(0, n - 1, max_points)).astype(np.int64)
    else:
        idx = np.arange(n)
    ys = 100.0 * idx / (n - 1)
    return FadingCdf(vals[idx], ys)


def cdf_fit_mse(cdf: FadingCdf, residuals, n_bins: int = 30) -> float:
    """Mean squared difference between fitted and empirical CDF fractions.

    The residual range is cut into ``n_bins`` equal-width bins and the CDFs
    are compared (as fractions in [0, 1]) at each bin's right edge.
    """
    vals = np.sort(np.asarray(residuals, dtype=float))
    if vals.shape[0] == 0:
        raise ValidationError("need at least 1 residual to score a CDF fit")
    lo, hi = vals[0], vals[-1]
    if hi == lo:
        return 0.0
    edges = lo + (hi - lo) * np.arange(1, n_bins + 1) / n_bins
    fitted = cdf.eval_percent(edges) / 100.0
    empirical = np.searchsorted(vals, edges, side="right") / vals.shape[0]
    return float(np.mean((fitted - empirical) ** 2))


class FadingSampler:
    """Seedable inverse-transform sampler over a fitted CDF.

    Identical (seed, stream_id) reproduce the same draw sequence; distinct
    stream ids are statistically independent.  Scalar and batch draws
    consume the same underlying uniform stream.
    """

    def __init__(self, cdf: FadingCdf, seed: int = 1, stream_id: int = 0):
        self.cdf = cdf
        self.seed = seed
        self.stream_id = stream_id
        self._gen = rngstream.make_stream(seed, rngstream.FADING, stream_id)

    def sample(self) -> float:
        u = 100.0 * self._gen.random()
        return float(self.cdf.inverse(u)[0])

    def sample_batch(self, n: int) -> np.ndarray:
        us = 100.0 * self._gen.random(n)
        return self.cdf.inverse(us)


def export_cdf(cdf: FadingCdf, path) -> None:
    """Write the CDF as ``fading_db,percentile`` rows, 17 significant digits."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(CDF_HEADER + "\n")
        for x, y in zip(cdf.xs, cdf.ys):
            fh.write(f"{x:.17g},{y:.17g}\n")


def import_cdf(path) -> FadingCdf:
    """Read a CDF CSV back; validates monotonicity and the [0, 100] span."""
    xs: list[float] = []
    ys: list[float] = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != CDF_HEADER:
            raise DataFormatError(f"{path}: expected header {CDF_HEADER!r}, got {header!r}")
        for row_no, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise DataFormatError(f"row {row_no}: expected 2 cells, got {len(parts)}")
            try:
                xs.append(float(parts[0]))
                ys.append(float(parts[1]))
            except ValueError:
                raise DataFormatError(f"row {row_no}: non-numeric CDF point {line!r}") from None
    return FadingCdf(np.array(xs), np.array(ys))

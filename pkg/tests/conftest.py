import numpy as np
import pytest

from radiotwin.channel import LogDistanceChannel
from radiotwin.dataset import Position, PositionPair, decompose, split_samples


def synthetic_pairs(n_pairs: int, rng, d_min: float = 1.0, d_max: float = 100.0):
    """Fixed transmitter, receivers spread over [d_min, d_max] meters."""
    tx = Position(0.0, 0.0, 1.5)
    pairs = []
    while len(pairs) < n_pairs:
        v = rng.uniform(-d_max * 0.7, d_max * 0.7, 3)
        v[2] = rng.uniform(0.5, 3.0)
        d = np.linalg.norm([v[0], v[1], v[2] - 1.5])
        if d_min <= d <= d_max:
            pairs.append(PositionPair(tx, Position(*v)))
    return pairs


def synthetic_loss_dataset(
    n_pairs: int,
    samples_per_pair: int,
    seed: int,
    exponent: float = 1.7,
    frequency_mhz: float = 5220.0,
    sigma_db: float = 3.0,
    train_fraction: float = 0.8,
):
    """Log-distance ground truth + Normal fading, decomposed and split.

    Returns (dataset, channel, true_path_loss dict).
    """
    rng = np.random.default_rng(seed)
    pairs = synthetic_pairs(n_pairs, rng)
    channel = LogDistanceChannel(exponent, frequency_mhz)
    true_pl = {p: channel.path_loss(p) for p in pairs}
    samples = []
    for p in pairs:
        for f in rng.normal(0.0, sigma_db, samples_per_pair):
            samples.append((p, true_pl[p] + f))
    ds = split_samples(decompose(samples), train_fraction, seed=seed + 1)
    return ds, channel, true_pl


@pytest.fixture(scope="session")
def small_synth():
    """120 pairs x 10 samples; enough for fast regression checks."""
    return synthetic_loss_dataset(120, 10, seed=77)

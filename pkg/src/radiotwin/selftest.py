"""End-to-end self-test over the packaged example dataset.

Rebuilds the whole chain (load -> preprocess -> train -> fit CDF ->
composite channel) and checks a frozen set of (position pair, loss)
expectations with the fading stream pinned to recorded draws, plus the
serialization and cache contracts.  Expectations live in
``data/example/selftest_expected.json`` and are regenerated by
``scripts/generate_example_data.py``.
"""

from __future__ import annotations

import json
import os
import tempfile
from importlib import resources

import numpy as np

from . import dataset, fading, regress
from .channel import LearnedChannel
from .dataset import pair_from_features
from .errors import ModelFileError


def example_data_dir():
    return resources.files("radiotwin") / "data" / "example"


class _Report:
    def __init__(self, verbose: bool):
        self.verbose = verbose
        self.failures: list[str] = []

    def check(self, name: str, ok: bool, detail: str = "") -> None:
        status = "ok" if ok else "FAIL"
        if not ok:
            self.failures.append(name)
        if self.verbose or not ok:
            suffix = f" ({detail})" if detail else ""
            print(f"[{status}] {name}{suffix}")


def run_selftest(verbose: bool = True) -> bool:
    data = example_data_dir()
    expected = json.loads((data / "selftest_expected.json").read_text())
    rep = _Report(verbose)
    tol = expected["tolerance_db"]
    seed = expected["seed"]

    with resources.as_file(data / "position_trace.csv") as trace_path, resources.as_file(
        data / "link_budget.json"
    ) as budget_path:
        samples, budget = dataset.load_dataset(trace_path, budget_path)
    ds, summary = dataset.preprocess(samples, budget, seed=seed)

    rep.check(
        "outlier-filter",
        summary["outliers_removed"] == expected["outliers_removed"],
        f"removed {summary['outliers_removed']}, expected {expected['outliers_removed']}",
    )
    rep.check(
        "pair-count",
        summary["unique_pairs"] == expected["unique_pairs"],
        f"{summary['unique_pairs']} pairs",
    )
    rep.check(
        "residual-std",
        abs(summary["residual_std_db"] - expected["residual_std_db"]) < 0.2,
        f"{summary['residual_std_db']:.2f} dB",
    )

    tr, te = ds.train_indices(), ds.test_indices()
    model = regress.train_svr(
        ds.features(tr),
        ds.path_loss_targets(tr),
        regress.SvrParams(C=expected["svr"]["C"], gamma=expected["svr"]["gamma"]),
    )
    test_mse = regress.evaluate_mse(model, ds.features(te), ds.path_loss_targets(te))
    rep.check("path-loss-fit", test_mse <= 1.0, f"test MSE {test_mse:.3f} dB^2")

    cdf = fading.fit_cdf(ds.fading_residuals)
    fit_mse = fading.cdf_fit_mse(cdf, ds.fading_residuals)
    rep.check("fading-fit", fit_mse <= 1e-3, f"30-bin MSE {fit_mse:.2e}")

    # pinned fading stream reproduces the recorded draws exactly
    sampler = fading.FadingSampler(cdf, seed=seed, stream_id=0)
    draws = [sampler.sample() for _ in range(len(expected["pinned_draws"]))]
    rng_ok = np.allclose(draws, expected["pinned_draws"], atol=1e-9)
    rep.check("pinned-fading-stream", rng_ok)

    # known (positions, loss) pairs through the full composite chain
    channel = LearnedChannel(model, fading.FadingSampler(cdf, seed=seed, stream_id=0))
    worst = 0.0
    for entry, draw in zip(expected["known_pairs"], expected["pinned_draws"]):
        pair = pair_from_features(entry["features"])
        total = channel.total_loss(pair)
        recorded = entry["path_loss_db"] + draw
        worst = max(worst, abs(total - recorded))
    rep.check("known-pairs-total-loss", worst <= tol, f"worst |err| {worst:.3f} dB (tol {tol})")

    stats = channel.cache_stats()
    rep.check(
        "cache-memoizes",
        stats["evaluations"] == len(expected["known_pairs"]),
        f"{stats['evaluations']} evaluations for {len(expected['known_pairs'])} unique pairs",
    )

    # serialization round-trip is prediction-exact; corrupt files are rejected
    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "model.bin")
        regress.save_model(model, path)
        reloaded = regress.load_model(path)
        probe = ds.features(te[:64])
        rep.check(
            "model-roundtrip",
            bool(np.array_equal(reloaded.predict(probe), model.predict(probe))),
        )
        with open(path, "rb") as fh:
            blob = bytearray(fh.read())
        blob[4] ^= 0xFF  # flip a version byte
        corrupt = os.path.join(tmp, "corrupt.bin")
        with open(corrupt, "wb") as fh:
            fh.write(blob)
        try:
            regress.load_model(corrupt)
            rep.check("corrupt-model-rejected", False, "no error raised")
        except ModelFileError as exc:
            rep.check("corrupt-model-rejected", True, str(exc)[:60])
        try:
            regress.load_model(path, expect="gbrt")
            rep.check("model-kind-enforced", False, "no error raised")
        except ModelFileError:
            rep.check("model-kind-enforced", True)

        cdf_path = os.path.join(tmp, "cdf.csv")
        fading.export_cdf(cdf, cdf_path)
        back = fading.import_cdf(cdf_path)
        rep.check(
            "cdf-roundtrip",
            bool(np.array_equal(back.xs, cdf.xs) and np.array_equal(back.ys, cdf.ys)),
        )

    ok = not rep.failures
    print("self-test:", "all checks passed" if ok else f"FAILED ({', '.join(rep.failures)})")
    return ok

"""Command-line front end: preprocess -> train -> fit-fading -> eval ->
simulate -> bench, plus a packaged self-test.

Every command writes a ``manifest.json`` (inputs, parameters, seed, output
hashes) into its output directory so runs can be reproduced exactly.
Exit codes: 0 success, 1 validation error, 2 I/O error, 3 self-test failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__, dataset, fading, linksim, metrics, regress
from .backend import active_backend
from .channel import FriisChannel, LearnedChannel, LogDistanceChannel, NormalFading
from .dataset import pair_from_features
from .errors import ValidationError
from .manifest import write_json, write_manifest

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2
EXIT_SELFTEST = 3


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems as validation errors (exit 1)."""

    def error(self, message):
        raise ValidationError(message)


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_preprocess(args) -> int:
    out = _out_dir(args)
    samples, budget = dataset.load_dataset(args.dataset, args.budget)
    ds, summary = dataset.preprocess(
        samples,
        budget,
        z_threshold=args.z_threshold,
        train_fraction=args.train_fraction,
        seed=args.seed,
        default_noise_floor=args.default_noise_floor,
    )
    out_csv = out / "preprocessed.csv"
    dataset.write_preprocessed(out_csv, ds)
    write_json(out / "summary.json", summary)
    write_manifest(
        out,
        "preprocess",
        {
            "z_threshold": args.z_threshold,
            "train_fraction": args.train_fraction,
            "default_noise_floor": args.default_noise_floor,
        },
        [args.dataset] + ([args.budget] if args.budget else []),
        [out_csv, out / "summary.json"],
        args.seed,
    )
    print(
        f"preprocessed {summary['kept_rows']} rows "
        f"({summary['outliers_removed']} outliers removed, "
        f"{summary['unique_pairs']} pairs, residual std "
        f"{summary['residual_std_db']:.2f} dB) -> {out_csv}"
    )
    return EXIT_OK


_ALGO_ALIASES = {"gbrt": "gbrt", "xgboost": "gbrt", "svr": "svr"}


def cmd_train(args) -> int:
    out = _out_dir(args)
    algo = _ALGO_ALIASES.get(args.algo.lower())
    if algo is None:
        raise ValidationError(f"unknown algorithm {args.algo!r} (use gbrt, xgboost or svr)")
    ds = dataset.load_preprocessed(args.preprocessed)
    tr, te = ds.train_indices(), ds.test_indices()
    Xtr, ytr = ds.features(tr), ds.path_loss_targets(tr)
    Xte, yte = ds.features(te), ds.path_loss_targets(te)

    t0 = time.perf_counter()
    if algo == "gbrt":
        params = regress.GbrtParams(
            n_trees=args.n_trees,
            max_depth=args.max_depth,
            learning_rate=args.learning_rate,
            min_samples_leaf=args.min_samples_leaf,
            seed=args.seed,
        )
        model = regress.train_gbrt(Xtr, ytr, params)
        param_info = vars(params).copy()
    else:
        gamma = "scale" if args.gamma == "scale" else float(args.gamma)
        params = regress.SvrParams(
            C=args.svr_c,
            epsilon=args.epsilon,
            gamma=gamma,
            tolerance=args.tolerance,
            max_iterations=args.max_iterations,
            seed=args.seed,
        )
        model = regress.train_svr(Xtr, ytr, params)
        param_info = {k: v for k, v in vars(params).items()}
    elapsed = time.perf_counter() - t0

    test_mse = regress.evaluate_mse(model, Xte, yte) if len(te) else float("nan")
    model_path = out / args.model_out
    regress.save_model(model, model_path)
    info = {
        "algorithm": algo,
        "params": param_info,
        "train_rows": int(len(tr)),
        "test_rows": int(len(te)),
        "test_mse_db2": test_mse,
        "train_seconds": elapsed,
        "backend": active_backend(),
    }
    if algo == "svr":
        info["converged"] = model.converged
        info["iterations"] = model.iterations
        info["support_vectors"] = int(model.dual_coefficients.shape[0])
    write_json(out / "train_summary.json", info)
    write_manifest(out, "train", info["params"] | {"algo": algo}, [args.preprocessed], [model_path], args.seed)
    print(f"{algo} trained in {elapsed:.1f}s, test MSE {test_mse:.3f} dB^2 -> {model_path}")
    return EXIT_OK


def cmd_fit_fading(args) -> int:
    out = _out_dir(args)
    ds = dataset.load_preprocessed(args.preprocessed)
    if args.split == "train":
        residuals = ds.fading_residuals[ds.train_indices()]
    else:
        residuals = ds.fading_residuals
    if residuals.size == 0:
        raise ValidationError("no fading residuals in the selected split")
    if args.max_points == 2:
        print("warning: max_points=2 gives a degenerate two-point CDF", file=sys.stderr)
    cdf = fading.fit_cdf(residuals, max_points=args.max_points)
    mse = fading.cdf_fit_mse(cdf, residuals)
    out_csv = out / "fading_cdf.csv"
    fading.export_cdf(cdf, out_csv)
    write_json(
        out / "fading_summary.json",
        {
            "residuals": int(residuals.size),
            "cdf_points": int(cdf.xs.shape[0]),
            "fit_mse_30bin": mse,
            "split": args.split,
        },
    )
    write_manifest(
        out,
        "fit-fading",
        {"max_points": args.max_points, "split": args.split},
        [args.preprocessed],
        [out_csv],
        args.seed,
    )
    print(f"fading CDF with {cdf.xs.shape[0]} points, 30-bin fit MSE {mse:.3g} -> {out_csv}")
    return EXIT_OK


def _baseline_fading(args, seed, stream_id):
    if args.no_baseline_fading:
        return None
    return NormalFading(0.0, args.baseline_fading_sigma, seed=seed, stream_id=stream_id)


def cmd_eval(args) -> int:
    out = _out_dir(args)
    ds = dataset.load_preprocessed(args.preprocessed)
    te = ds.test_indices()
    if len(te) == 0:
        raise ValidationError("preprocessed dataset has no test rows")
    pairs = [ds.samples[i][0] for i in te]

    model = regress.load_model(args.model)
    if args.no_fading:
        cdf = fading.FadingCdf.degenerate(0.0)
        targets = ds.path_loss_targets(te)
    else:
        cdf = fading.import_cdf(args.cdf)
        targets = ds.total_losses(te)

    channels = [
        LearnedChannel(
            model,
            fading.FadingSampler(cdf, seed=args.seed, stream_id=args.stream),
            cache_capacity=args.cache_capacity,
        )
    ]
    freq = args.frequency
    if args.friis:
        channels.append(FriisChannel(freq, fading=_baseline_fading(args, args.seed, args.stream)))
    if args.log_distance is not None:
        channels.append(
            LogDistanceChannel(
                args.log_distance, freq, fading=_baseline_fading(args, args.seed, args.stream + 1)
            )
        )

    summary = {"test_rows": int(len(te)), "fading": not args.no_fading, "models": {}}
    outputs = []
    for ch in channels:
        series = metrics.loss_errors(ch, pairs, targets)
        label = ch.describe().split("(")[0]
        for absolute in (False, True):
            points = metrics.error_cdf(series, absolute=absolute)
            name = f"loss-{'abs-' if absolute else ''}error-cdf-{label}.csv"
            metrics.write_cdf_csv(out / name, points, label, "loss", args.seed)
            outputs.append(out / name)
        summary["models"][label] = {
            "median_abs_error_db": metrics.percentile(series.absolute(), 50.0),
            "mean_squared_error_db2": float(np.mean(series.values**2)),
            "negative_fraction": float(np.mean(series.values < 0)),
        }
    write_json(out / "eval_summary.json", summary)
    write_manifest(
        out,
        "eval",
        {
            "model": str(args.model),
            "cdf": str(args.cdf) if args.cdf else None,
            "no_fading": args.no_fading,
            "friis": args.friis,
            "log_distance": args.log_distance,
        },
        [args.preprocessed, args.model] + ([args.cdf] if args.cdf else []),
        outputs + [out / "eval_summary.json"],
        args.seed,
    )
    for label, stats in summary["models"].items():
        print(
            f"{label}: median |E| {stats['median_abs_error_db']:.2f} dB, "
            f"MSE {stats['mean_squared_error_db2']:.2f} dB^2"
        )
    return EXIT_OK


def _load_scenario(path):
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if "budget" not in data:
        raise ValidationError(f"scenario {path}: missing 'budget'")
    b = data["budget"]
    missing = [k for k in dataset.BUDGET_KEYS if k not in b]
    if missing:
        raise ValidationError(f"scenario {path}: budget missing {missing}")
    budget = dataset.LinkBudget(
        wifi_standard=str(b["wifi_standard"]),
        tx_power_dbm=float(b["tx_power_dbm"]),
        tx_antenna_gain_dbi=float(b["tx_antenna_gain_dbi"]),
        rx_antenna_gain_dbi=float(b["rx_antenna_gain_dbi"]),
        channel_frequency_mhz=float(b["channel_frequency_mhz"]),
        channel_bandwidth_mhz=float(b["channel_bandwidth_mhz"]),
    )
    cfg = linksim.LinkSimConfig(
        budget=budget,
        offered_load_mbps=float(data.get("offered_load_mbps", 54.0)),
        payload_bytes=int(data.get("payload_bytes", 1400)),
        warmup_s=float(data.get("warmup_s", 1.0)),
        measure_s=float(data.get("measure_s", 5.0)),
        preamble_threshold_dbm=float(data.get("preamble_threshold_dbm", -90.0)),
        noise_floor_dbm=float(data.get("noise_floor_dbm", -94.0)),
        rate_adaptation=str(data.get("rate_adaptation", "minstrel")),
        fixed_rate_mbps=data.get("fixed_rate_mbps"),
        per_packet_fading=bool(data.get("per_packet_fading", True)),
    )
    if "pairs" in data:
        pairs = [pair_from_features([float(v) for v in row]) for row in data["pairs"]]
    elif "pairs_from" in data:
        ref = Path(path).parent / data["pairs_from"]
        pairs = _unique_pairs_from_csv(ref)
    else:
        raise ValidationError(f"scenario {path}: needs 'pairs' or 'pairs_from'")
    if not pairs:
        raise ValidationError(f"scenario {path}: empty pair list")
    return cfg, pairs


def _unique_pairs_from_csv(path):
    try:
        ds = dataset.load_preprocessed(path)
        rows = [s[0] for s in ds.samples]
    except ValidationError:
        samples, _ = dataset.load_dataset(path)
        rows = [s.pair for s in samples]
    seen = {}
    for p in rows:
        seen.setdefault(p, None)
    return list(seen.keys())


def _build_channel(args, cache_on: bool, seed: int):
    kind = args.model_kind
    if kind == "learned":
        if not args.model or not args.cdf:
            raise ValidationError("learned channel needs --model and --cdf")
        model = regress.load_model(args.model)
        cdf = fading.import_cdf(args.cdf)
        sampler = fading.FadingSampler(cdf, seed=seed, stream_id=args.stream)
        capacity = args.cache_capacity if cache_on else 0
        return LearnedChannel(
            model, sampler, cache_capacity=capacity, cache_quantum=args.cache_quantum
        )
    if kind == "friis":
        return FriisChannel(args.frequency, fading=_baseline_fading(args, seed, args.stream))
    if kind == "log-distance":
        gamma = args.gamma_exponent
        return LogDistanceChannel(
            gamma, args.frequency, fading=_baseline_fading(args, seed, args.stream)
        )
    raise ValidationError(f"unknown model kind {kind!r}")


def cmd_simulate(args) -> int:
    out = _out_dir(args)
    cfg, pairs = _load_scenario(args.scenario)
    cfg = replace(cfg, seed=args.seed, stream_id=args.stream, trace_stride=args.trace_stride)
    channel = _build_channel(args, not args.no_cache, args.seed)
    result = linksim.run_scenario(pairs, channel, cfg)

    out_csv = out / "results.csv"
    linksim.write_results_csv(out_csv, result)
    outputs = [out_csv]
    if args.trace_stride > 0:
        trace_csv = out / "trace.csv"
        linksim.write_trace_csv(trace_csv, result)
        outputs.append(trace_csv)
    run_info = {
        "model": channel.describe(),
        "pairs": len(pairs),
        "wall_seconds": result.wall_seconds,
        "cache_stats": result.cache_stats,
        "seed": args.seed,
        "stream": args.stream,
        "backend": active_backend(),
        "mean_throughput_mbps": float(result.throughputs().mean()),
    }
    write_json(out / "run.json", run_info)
    write_manifest(
        out,
        "simulate",
        {
            "scenario": str(args.scenario),
            "model_kind": args.model_kind,
            "no_cache": args.no_cache,
            "trace_stride": args.trace_stride,
        },
        [args.scenario] + [p for p in (args.model, args.cdf) if p],
        outputs,
        args.seed,
    )
    print(
        f"{len(pairs)} pairs simulated in {result.wall_seconds:.2f}s, "
        f"mean throughput {run_info['mean_throughput_mbps']:.2f} Mbit/s -> {out_csv}"
    )
    return EXIT_OK


def cmd_bench(args) -> int:
    out = _out_dir(args)
    cfg, pairs = _load_scenario(args.scenario)
    cfg = replace(cfg, seed=args.seed, stream_id=args.stream)

    factories = []
    for spec_str in args.learned or []:
        label, _, rest = spec_str.partition("=")
        if not rest:
            raise ValidationError(f"--learned needs LABEL=MODEL:CDF, got {spec_str!r}")
        model_path, _, cdf_path = rest.partition(":")
        if not cdf_path:
            raise ValidationError(f"--learned needs LABEL=MODEL:CDF, got {spec_str!r}")
        model = regress.load_model(model_path)
        cdf = fading.import_cdf(cdf_path)

        def factory(cache_on, seed, _m=model, _c=cdf):
            sampler = fading.FadingSampler(_c, seed=seed, stream_id=args.stream)
            return LearnedChannel(
                _m,
                sampler,
                cache_capacity=args.cache_capacity if cache_on else 0,
                cache_quantum=args.cache_quantum,
            )

        factories.append((label, True, factory))
    if args.friis:
        factories.append(
            (
                "friis",
                False,
                lambda cache_on, seed: FriisChannel(
                    args.frequency, fading=_baseline_fading(args, seed, args.stream)
                ),
            )
        )
    if args.log_distance is not None:
        factories.append(
            (
                "log-distance",
                False,
                lambda cache_on, seed: LogDistanceChannel(
                    args.log_distance,
                    args.frequency,
                    fading=_baseline_fading(args, seed, args.stream),
                ),
            )
        )
    if not factories:
        raise ValidationError("no models to benchmark (use --learned/--friis/--log-distance)")

    modes = {"both": ("on", "off"), "on": ("on",), "off": ("off",)}[args.cache]
    rows = linksim.benchmark(pairs, factories, cfg, repetitions=args.repetitions, cache_modes=modes)

    out_csv = out / "bench.csv"
    with open(out_csv, "w", encoding="utf-8", newline="") as fh:
        fh.write("model,cache,mean_s,ci95_s,runs,speedup,transparent\n")
        for r in rows:
            fh.write(
                f"{r['model']},{r['cache']},{r['mean_s']:.6f},{r['ci95_s']:.6f},"
                f"{r['runs']},{r.get('speedup', '')},{r['transparent']}\n"
            )
    write_manifest(
        out,
        "bench",
        {"repetitions": args.repetitions, "cache": args.cache},
        [args.scenario],
        [out_csv],
        args.seed,
    )
    for r in rows:
        extra = f" speedup {r['speedup']:.1f}x" if "speedup" in r else ""
        print(
            f"{r['model']:<12} cache={r['cache']:<3} {r['mean_s']:.3f}s "
            f"+/- {r['ci95_s']:.3f}s{extra}"
        )
    return EXIT_OK


def cmd_selftest(args) -> int:
    from .selftest import run_selftest

    ok = run_selftest(verbose=True)
    return EXIT_OK if ok else EXIT_SELFTEST


def _add_common(p, stream=False):
    p.add_argument("--seed", type=int, default=1, help="global RNG seed")
    p.add_argument("--out-dir", default=".", help="output directory")
    if stream:
        p.add_argument("--stream", type=int, default=0, help="RNG stream id")


def _add_channel_flags(p):
    p.add_argument("--model", help="trained regressor model file")
    p.add_argument("--cdf", help="fading CDF CSV file")
    p.add_argument("--frequency", type=float, default=5220.0, help="carrier MHz for baselines")
    p.add_argument("--baseline-fading-sigma", type=float, default=3.0)
    p.add_argument("--no-baseline-fading", action="store_true")
    p.add_argument("--cache-capacity", type=int, default=65536)
    p.add_argument("--cache-quantum", type=float, default=1e-3)


def build_parser() -> _Parser:
    parser = _Parser(prog="radiotwin", description=__doc__)
    parser.add_argument("--version", action="version", version=f"radiotwin {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("preprocess", help="derive loss, drop outliers, decompose, split")
    p.add_argument("dataset", help="trace CSV")
    p.add_argument("--budget", help="link budget JSON (required for SNR/rx-power traces)")
    p.add_argument("--z-threshold", type=float, default=5.0)
    p.add_argument("--train-fraction", type=float, default=0.8)
    p.add_argument("--default-noise-floor", type=float, default=dataset.DEFAULT_NOISE_FLOOR_DBM)
    _add_common(p)
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("train", help="train a path-loss regressor")
    p.add_argument("preprocessed", help="preprocessed CSV")
    p.add_argument("--algo", default="svr", help="gbrt | xgboost (alias) | svr")
    p.add_argument("--model-out", default="model.bin")
    p.add_argument("--n-trees", type=int, default=100)
    p.add_argument("--max-depth", type=int, default=6)
    p.add_argument("--learning-rate", type=float, default=0.3)
    p.add_argument("--min-samples-leaf", type=int, default=1)
    p.add_argument("--svr-c", type=float, default=1.0)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--gamma", default="scale")
    p.add_argument("--tolerance", type=float, default=1e-3)
    p.add_argument("--max-iterations", type=int, default=None)
    _add_common(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("fit-fading", help="fit the fast-fading empirical CDF")
    p.add_argument("preprocessed", help="preprocessed CSV")
    p.add_argument("--max-points", type=int, default=1024)
    p.add_argument("--split", choices=("all", "train"), default="all")
    _add_common(p)
    p.set_defaults(func=cmd_fit_fading)

    p = sub.add_parser("eval", help="loss prediction error CDFs vs baselines")
    p.add_argument("preprocessed", help="preprocessed CSV (test split is used)")
    p.add_argument("--no-fading", action="store_true", help="score path loss only")
    p.add_argument("--friis", action="store_true", help="include the Friis baseline")
    p.add_argument("--log-distance", type=float, default=None, metavar="GAMMA")
    _add_channel_flags(p)
    _add_common(p, stream=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("simulate", help="replay a scenario through a channel model")
    p.add_argument("scenario", help="scenario JSON")
    p.add_argument("--model-kind", choices=("learned", "friis", "log-distance"), default="learned")
    p.add_argument("--gamma-exponent", type=float, default=1.7)
    p.add_argument("--no-cache", action="store_true")
    p.add_argument("--trace-stride", type=int, default=0)
    _add_channel_flags(p)
    _add_common(p, stream=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bench", help="wall-clock benchmark across models and cache modes")
    p.add_argument("scenario", help="scenario JSON")
    p.add_argument("--learned", action="append", metavar="LABEL=MODEL:CDF")
    p.add_argument("--friis", action="store_true")
    p.add_argument("--log-distance", type=float, default=None, metavar="GAMMA")
    p.add_argument("--repetitions", type=int, default=10)
    p.add_argument("--cache", choices=("both", "on", "off"), default="both")
    _add_channel_flags(p)
    _add_common(p, stream=True)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("selftest", help="validate the packaged pipeline end to end")
    _add_common(p)
    p.set_defaults(func=cmd_selftest)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except FileNotFoundError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

"""Command-line pipeline: synth, ingest, cluster, train, compare, predict.

Each stage reads and writes files so every step is independently
runnable and cacheable; `pipeline` chains them from one JSON config.
Progress lines go to stderr, data to files or stdout. Exit codes:
0 success, 2 validation or usage error, 1 runtime failure. All
randomness derives from a single seed.
"""

from __future__ import annotations

import argparse
import datetime
import json
import os
import re
import sys
from dataclasses import dataclass

from . import clustering, ingest, recurrent, stats, synth, training
from .errors import ConfigError, ValidationError

MS_PER_DAY = 86_400_000


def _log(msg: str) -> None:
    print(msg, file=sys.stderr)


def parse_span(text: str, utc_offset_hours: float) -> tuple[int, int]:
    """'YYYY-MM-DD..YYYY-MM-DD' (end exclusive, local dates) to UTC ms."""
    m = re.fullmatch(r"(\d{4}-\d{2}-\d{2})\.\.(\d{4}-\d{2}-\d{2})", text.strip())
    if not m:
        raise ConfigError(f"span must look like 2013-11-01..2014-01-02, got {text!r}")
    offset_ms = round(utc_offset_hours * ingest.MS_PER_HOUR)

    def to_ms(datestr: str) -> int:
        d = datetime.date.fromisoformat(datestr)
        return (d - datetime.date(1970, 1, 1)).days * MS_PER_DAY - offset_ms

    start, end = to_ms(m.group(1)), to_ms(m.group(2))
    if end <= start:
        raise ConfigError(f"span end must be after start: {text!r}")
    return start, end


def _require_keys(payload: dict, allowed: set[str], where: str) -> None:
    unknown = sorted(set(payload) - allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(unknown)}")


def parse_synth_spec(payload: dict, default_seed: int) -> synth.SynthSpec:
    _require_keys(payload, {"archetypes", "cells_per_archetype", "days", "seed",
                            "span_start", "start_weekday", "country_code"}, "synth")
    if not isinstance(payload.get("archetypes"), list):
        raise ConfigError("synth needs an archetypes list")
    archetypes = []
    for i, raw in enumerate(payload["archetypes"]):
        _require_keys(raw, {"id", "base_level", "period_weights",
                            "weekend_factor", "noise_sd"}, f"synth.archetypes[{i}]")
        archetypes.append(synth.Archetype(
            id=int(raw.get("id", i)),
            base_level=float(raw["base_level"]),
            period_weights=tuple(float(w) for w in raw["period_weights"]),
            weekend_factor=float(raw.get("weekend_factor", 1.0)),
            noise_sd=float(raw.get("noise_sd", 0.0)),
        ))
    spec = synth.SynthSpec(
        archetypes=archetypes,
        cells_per_archetype=int(payload.get("cells_per_archetype", 1)),
        days=int(payload.get("days", 62)),
        seed=int(payload.get("seed", default_seed)),
        span_start=int(payload.get("span_start", synth.DEFAULT_SPAN_START)),
        start_weekday=int(payload.get("start_weekday", synth.FRIDAY)),
        country_code=int(payload.get("country_code", 39)),
    )
    synth.validate_spec(spec)
    return spec


@dataclass
class PipelineConfig:
    out_dir: str
    synth_spec: synth.SynthSpec | None
    input_paths: list[str] | None
    span: tuple[int, int] | None
    utc_offset_hours: float
    k: object  # int or "auto"
    kmax: int
    restarts: int
    grid: training.GridSpec
    train: training.TrainConfig
    seed: int
    workers: int


def parse_pipeline_config(payload: dict) -> PipelineConfig:
    _require_keys(payload, {"out_dir", "synth", "input", "span", "utc_offset_hours",
                            "k", "kmax", "restarts", "grid", "train", "seed",
                            "workers"}, "config")
    if "out_dir" not in payload:
        raise ConfigError("config needs out_dir")
    seed = int(payload.get("seed", 0))
    utc_offset = float(payload.get("utc_offset_hours", clustering.DEFAULT_UTC_OFFSET_HOURS))

    has_synth = "synth" in payload
    has_input = "input" in payload
    if has_synth == has_input:
        raise ConfigError("config needs exactly one of synth or input")

    synth_spec = parse_synth_spec(payload["synth"], seed) if has_synth else None
    input_paths = [str(p) for p in payload["input"]] if has_input else None
    if has_input and not input_paths:
        raise ConfigError("input list is empty")

    span = None
    if "span" in payload:
        span = parse_span(str(payload["span"]), utc_offset)
    elif has_synth:
        span = (synth_spec.span_start, synth_spec.span_end)
    else:
        raise ConfigError("config needs a span when input paths are given")

    k = payload.get("k", "auto")
    if k != "auto":
        k = int(k)
        if k < 1:
            raise ConfigError(f"k must be >= 1 or 'auto', got {k}")

    grid_payload = payload.get("grid", {})
    _require_keys(grid_payload, {"hidden_layers", "units", "cell_kinds"}, "grid")
    grid = training.GridSpec(
        hidden_layers=tuple(int(h) for h in grid_payload.get("hidden_layers", (1, 2, 3, 4))),
        units=tuple(int(u) for u in grid_payload.get("units", (50, 100, 150, 200, 250))),
        cell_kinds=tuple(str(c).lower() for c in grid_payload.get("cell_kinds", ("lstm", "gru"))),
    )
    training.validate_grid(grid)

    train_payload = payload.get("train", {})
    _require_keys(train_payload, {"epochs", "batch_size", "runs", "base_seed",
                                  "shuffle_each_epoch"}, "train")
    cfg = training.TrainConfig(
        epochs=int(train_payload.get("epochs", 50)),
        batch_size=int(train_payload.get("batch_size", 32)),
        runs=int(train_payload.get("runs", 30)),
        shuffle_each_epoch=bool(train_payload.get("shuffle_each_epoch", True)),
        base_seed=int(train_payload.get("base_seed", seed)),
    )
    training.validate_train_config(cfg)

    return PipelineConfig(
        out_dir=str(payload["out_dir"]),
        synth_spec=synth_spec,
        input_paths=input_paths,
        span=span,
        utc_offset_hours=utc_offset,
        k=k,
        kmax=int(payload.get("kmax", 50)),
        restarts=int(payload.get("restarts", 10)),
        grid=grid,
        train=cfg,
        seed=seed,
        workers=int(payload.get("workers", 1)),
    )


# ---------------------------------------------------------------------------
# stage helpers shared by subcommands and the pipeline

def _ingest_paths(paths: list[str], span: tuple[int, int]) -> ingest.BinningResult:
    for p in paths:
        if not os.path.exists(p):
            raise FileNotFoundError(f"input path does not exist: {p}")
    records = ingest.iter_cdr_paths(paths)
    result = ingest.bin_series(records, span[0], span[1])
    _log(f"ingest: {len(result.cells)} cells, "
         f"{(span[1] - span[0]) // ingest.BIN_WIDTH_MS} bins each, "
         f"{result.dropped} records outside span dropped")
    return result


def _cluster_stage(cells: dict, k, kmax: int, seed: int, restarts: int,
                   utc_offset_hours: float, truth_path: str | None,
                   print_curve: bool = False):
    profiles = clustering.build_profiles(cells, utc_offset_hours)
    curve = None
    if k == "auto":
        kmax = min(kmax, len(profiles))
        curve = clustering.elbow_scan(profiles, kmax, seed=seed, restarts=restarts)
        if print_curve:
            for entry_k, entry_sse in curve.entries:
                print(f"{entry_k},{entry_sse:.17g}")
        k = clustering.knee_point(curve)
        _log(f"cluster: elbow pick k={k} from curve over 1..{kmax}")
    model = clustering.kmeans(profiles, int(k), seed=seed, restarts=restarts)
    _log(f"cluster: k={model.k} sse={model.sse:.6g} "
         f"({model.iterations_run} lloyd iterations)")
    if truth_path:
        truth = synth.load_truth(truth_path)
        cell_ids = sorted(model.assignment)
        ari = clustering.adjusted_rand_index(
            [model.assignment[c] for c in cell_ids],
            [truth[c] for c in cell_ids])
        _log(f"cluster: adjusted Rand vs truth = {ari:.4f}")
    series = clustering.cluster_mean_series(model, cells)
    return model, curve, series


def _per_kind_best(result: training.GridResult, cluster: int, kind: str) -> str | None:
    """Best label for one cell kind within a cluster, or None if that
    kind was not in the grid."""
    runs = [r for r in result.runs if r.cluster == cluster and r.cell_kind == kind]
    if not runs:
        return None
    sub = training.GridResult(
        runs=runs,
        mean_rmse={label: m for label, m in result.mean_rmse.items()
                   if any(r.label == label for r in runs)},
        best_config={},
    )
    return training.select_best(sub, cluster)[0]


def _parse_label(label: str) -> tuple[str, int, int, int]:
    m = re.fullmatch(r"(LSTM|GRU)-(\d+)-(\d+)L-(\d+)U", label)
    if not m:
        raise ConfigError(f"bad config label {label!r}")
    return m.group(1).lower(), int(m.group(2)), int(m.group(3)), int(m.group(4))


def _best_run_seed(result: training.GridResult, label: str) -> int:
    runs = [r for r in result.runs if r.label == label]
    best = min(runs, key=lambda r: (r.rmse, r.run))
    return best.seed


def _train_stage(series: dict, grid: training.GridSpec, cfg: training.TrainConfig,
                 workers: int, out_dir: str, record_timing: bool = False):
    datasets = [training.prepare_dataset(series[c]) for c in sorted(series)]
    result = training.grid_search(grid, datasets, cfg, workers=workers)
    training.save_results_csv(result, os.path.join(out_dir, "results.csv"),
                              record_timing=record_timing)
    training.save_summary_json(result, os.path.join(out_dir, "summary.json"))
    by_cluster = {d.cluster: d for d in datasets}
    model_paths = {}
    for cluster in sorted(by_cluster):
        for kind in grid.cell_kinds:
            label = _per_kind_best(result, cluster, kind)
            if label is None:
                continue
            _, _, layers, units = _parse_label(label)
            seed = _best_run_seed(result, label)
            net = training.train_best_network(kind, layers, units,
                                              by_cluster[cluster], cfg, seed)
            path = os.path.join(out_dir, f"{kind}_c{cluster}.json")
            recurrent.save_model_json(net, by_cluster[cluster].scaler, path)
            model_paths[(cluster, kind)] = path
            _log(f"train: cluster {cluster} best {kind} = {label} "
                 f"(mean rmse {result.mean_rmse[label]:.6g}), model -> {path}")
    return result, model_paths


def _compare_stage(result: training.GridResult, clusters: list[int]) -> dict:
    report = {}
    for cluster in clusters:
        labels = []
        for kind in ("lstm", "gru"):
            label = _per_kind_best(result, cluster, kind)
            if label is not None:
                labels.append(label)
        if len(labels) < 2:
            _log(f"compare: cluster {cluster} has fewer than two cell kinds, skipped")
            continue
        samples = []
        for label in labels:
            values = tuple(r.rmse for r in result.runs if r.label == label)
            samples.append(stats.MetricSample(label=label, values=values))
        report[str(cluster)] = stats.comparison_report(samples)
        _log(f"compare: cluster {cluster} p={report[str(cluster)]['p_value']:.4g} "
             f"-> {report[str(cluster)]['verdict']}")
    return report


def _write_predictions_csv(table: training.PredictionTable, fh) -> None:
    fh.write("timestamp,truth,prediction\n")
    for ts, truth, pred in zip(table.timestamps, table.truth, table.prediction):
        fh.write(f"{int(ts)},{truth:.17g},{pred:.17g}\n")


# ---------------------------------------------------------------------------
# subcommands

def cmd_synth(args) -> int:
    if args.spec:
        with open(args.spec, "r", encoding="utf-8") as fh:
            spec = parse_synth_spec(json.load(fh), args.seed)
    else:
        spec = synth.well_separated_city(
            n_archetypes=args.archetypes, cells_per_archetype=args.cells,
            days=args.days, seed=args.seed, noise_sd=args.noise)
    paths, truth = synth.generate(spec, args.out)
    _log(f"synth: wrote {len(paths)} day files for {len(truth)} cells to {args.out}")
    return 0


def cmd_ingest(args) -> int:
    span = parse_span(args.span, args.utc_offset)
    result = _ingest_paths(args.input, span)
    ingest.save_bins_json(result.cells, args.out)
    if args.csv:
        ingest.save_bins_csv(result.cells, args.csv)
    _log(f"ingest: wrote {args.out}")
    return 0


def cmd_cluster(args) -> int:
    if args.k != "auto":
        k = int(args.k)
        if k < 1:
            raise ConfigError(f"--k must be >= 1 or auto, got {args.k}")
    else:
        k = "auto"
    cells = ingest.load_bins_json(args.bins)
    model, curve, series = _cluster_stage(
        cells, k, args.kmax, args.seed, args.restarts,
        args.utc_offset, args.truth, print_curve=True)
    clustering.save_cluster_json(model, args.out)
    if curve is not None:
        clustering.save_sse_csv(curve, args.curve)
    ingest.save_bins_json(series, args.series)
    _log(f"cluster: wrote {args.out} and {args.series}")
    return 0


def _load_grid(text: str) -> training.GridSpec:
    if text == "default":
        return training.GridSpec()
    with open(text, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    _require_keys(payload, {"hidden_layers", "units", "cell_kinds"}, "grid file")
    grid = training.GridSpec(
        hidden_layers=tuple(int(h) for h in payload.get("hidden_layers", (1, 2, 3, 4))),
        units=tuple(int(u) for u in payload.get("units", (50, 100, 150, 200, 250))),
        cell_kinds=tuple(str(c).lower() for c in payload.get("cell_kinds", ("lstm", "gru"))),
    )
    training.validate_grid(grid)
    return grid


def cmd_train(args) -> int:
    model = clustering.load_cluster_json(args.clusters)
    cells = ingest.load_bins_json(args.bins)
    series = clustering.cluster_mean_series(model, cells)
    grid = _load_grid(args.grid)
    cfg = training.TrainConfig(epochs=args.epochs, batch_size=args.batch,
                               runs=args.runs, base_seed=args.seed)
    os.makedirs(args.out_dir, exist_ok=True)
    _train_stage(series, grid, cfg, args.workers, args.out_dir,
                 record_timing=args.record_timing)
    _log(f"train: wrote results to {args.out_dir}")
    return 0


def _parse_cluster_range(text: str, available: list[int]) -> list[int]:
    if text == "all":
        return sorted(available)
    m = re.fullmatch(r"(\d+)\.\.(\d+)", text)
    if m:
        lo, hi = int(m.group(1)), int(m.group(2))
        return [c for c in sorted(available) if lo <= c <= hi]
    return [int(part) for part in text.split(",")]


def cmd_compare(args) -> int:
    result = training.load_results_csv(args.results)
    available = sorted({r.cluster for r in result.runs})
    clusters = _parse_cluster_range(args.clusters, available)
    report = _compare_stage(result, clusters)
    stats.save_comparison_json(report, args.out)
    if args.box:
        samples = []
        for cluster in clusters:
            for kind in ("lstm", "gru"):
                label = _per_kind_best(result, cluster, kind)
                if label is not None:
                    values = tuple(r.rmse for r in result.runs if r.label == label)
                    samples.append(stats.MetricSample(label=label, values=values))
        stats.save_box_csv(samples, args.box)
    _log(f"compare: wrote {args.out}")
    return 0


def cmd_predict(args) -> int:
    net, scaler = recurrent.load_model_json(args.model)
    if scaler is None:
        raise ConfigError(f"model {args.model} carries no scaler; cannot de-normalize")
    cells = ingest.load_bins_json(args.bins)
    if args.cluster is not None:
        if args.cluster not in cells:
            raise ConfigError(f"series {args.cluster} not in {args.bins}")
        series = cells[args.cluster]
    elif len(cells) == 1:
        series = next(iter(cells.values()))
    else:
        raise ConfigError(f"{args.bins} holds {len(cells)} series; pass --cluster")
    table = training.predict_test_split(net, scaler, series)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            _write_predictions_csv(table, fh)
        _log(f"predict: wrote {args.out}")
    else:
        _write_predictions_csv(table, sys.stdout)
    return 0


def cmd_pipeline(args) -> int:
    with open(args.config, "r", encoding="utf-8") as fh:
        cfg = parse_pipeline_config(json.load(fh))
    if args.workers is not None:
        cfg.workers = args.workers
    out = cfg.out_dir
    os.makedirs(out, exist_ok=True)

    if cfg.synth_spec is not None:
        data_dir = os.path.join(out, "data")
        paths, _ = synth.generate(cfg.synth_spec, data_dir)
        _log(f"pipeline: synth wrote {len(paths)} day files")
        input_paths = [data_dir]
        truth_path = os.path.join(data_dir, "truth.csv")
    else:
        input_paths = cfg.input_paths
        truth_path = None

    binned = _ingest_paths(input_paths, cfg.span)
    ingest.save_bins_json(binned.cells, os.path.join(out, "bins.json"))

    model, curve, series = _cluster_stage(
        binned.cells, cfg.k, cfg.kmax, cfg.seed, cfg.restarts,
        cfg.utc_offset_hours, truth_path)
    clustering.save_cluster_json(model, os.path.join(out, "clusters.json"))
    if curve is not None:
        clustering.save_sse_csv(curve, os.path.join(out, "sse_curve.csv"))
    ingest.save_bins_json(series, os.path.join(out, "cluster_series.json"))

    result, model_paths = _train_stage(series, cfg.grid, cfg.train, cfg.workers, out)

    report = _compare_stage(result, sorted(series))
    stats.save_comparison_json(report, os.path.join(out, "comparison.json"))

    for cluster in sorted(series):
        best_label = result.best_config[cluster]
        kind = _parse_label(best_label)[0]
        net, scaler = recurrent.load_model_json(model_paths[(cluster, kind)])
        table = training.predict_test_split(net, scaler, series[cluster])
        with open(os.path.join(out, f"predictions_c{cluster}.csv"),
                  "w", encoding="utf-8", newline="") as fh:
            _write_predictions_csv(table, fh)
    _log(f"pipeline: done, outputs in {out}")
    return 0


# ---------------------------------------------------------------------------
# parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cellcast",
        description="Cluster mobile-traffic cells and forecast per-cluster "
                    "activity with from-scratch recurrent networks.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate synthetic CDR data")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--spec", help="synth spec JSON (overrides the preset flags)")
    p.add_argument("--archetypes", type=int, default=12)
    p.add_argument("--cells", type=int, default=50, help="cells per archetype")
    p.add_argument("--days", type=int, default=62)
    p.add_argument("--noise", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("ingest", help="bin raw CDR files into 30-minute series")
    p.add_argument("--input", required=True, nargs="+", help="CDR files or directories")
    p.add_argument("--span", required=True, help="local date range, e.g. 2013-11-01..2014-01-02")
    p.add_argument("--utc-offset", type=float, default=1.0, dest="utc_offset",
                   help="local clock offset in hours (default 1, Milan)")
    p.add_argument("--out", required=True, help="bins JSON output")
    p.add_argument("--csv", help="also write bins as CSV")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("cluster", help="cluster cells on day-period profiles")
    p.add_argument("--bins", required=True)
    p.add_argument("--k", default="auto", help="cluster count, or 'auto' for the elbow pick")
    p.add_argument("--kmax", type=int, default=50)
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--utc-offset", type=float, default=1.0, dest="utc_offset")
    p.add_argument("--truth", help="truth.csv to score the clustering against")
    p.add_argument("--out", default="clusters.json")
    p.add_argument("--curve", default="sse_curve.csv")
    p.add_argument("--series", default="cluster_series.json",
                   help="per-cluster mean series output (bins format)")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("train", help="grid-search networks per cluster")
    p.add_argument("--clusters", required=True, help="clusters.json")
    p.add_argument("--bins", required=True, help="bins.json the clusters came from")
    p.add_argument("--grid", default="default", help="'default' or a grid JSON file")
    p.add_argument("--runs", type=int, default=30)
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--batch", type=int, default=32)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--record-timing", action="store_true", dest="record_timing",
                   help="write wall times into results.csv (breaks rerun byte-identity)")
    p.add_argument("--out-dir", default=".", dest="out_dir")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("compare", help="rank-test best configs per cluster")
    p.add_argument("--results", required=True, help="results.csv from train")
    p.add_argument("--clusters", default="all", help="'all', 'LO..HI', or comma list")
    p.add_argument("--out", default="comparison.json")
    p.add_argument("--box", help="also write box-plot stats CSV")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("predict", help="emit test-span predictions for one series")
    p.add_argument("--model", required=True, help="model JSON from train")
    p.add_argument("--bins", required=True, help="bins-format series file")
    p.add_argument("--cluster", type=int, help="which series to predict (if several)")
    p.add_argument("--out", help="output CSV (default stdout)")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("pipeline", help="run all stages from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--workers", type=int, default=None,
                   help="override the config's training worker count")
    p.set_defaults(func=cmd_pipeline)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValidationError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - the CLI boundary reports, not raises
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

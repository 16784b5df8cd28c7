"""Training protocol and the seeded hyperparameter grid search.

One run = build a seeded network, train mini-batch ADAM for a fixed
epoch count on shuffled batches, score RMSE and MAE on the test windows.
The grid crosses cell kind, depth, and width per cluster, repeats each
configuration over `runs` seeds (base_seed + run index, so extending the
run count never reshuffles earlier results), ranks configurations by
mean RMSE, and breaks near-ties by median, dispersion, then model size.
"""

from __future__ import annotations

import csv
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, UnknownCluster
from .ingest import BIN_WIDTH_MS, BinnedCellSeries
from .prep import (
    WINDOW,
    MinMaxScaler,
    SupervisedWindows,
    fit_scaler,
    make_windows,
    split_train_test,
)
from .recurrent import (
    AdamConfig,
    AdamOptimizer,
    RecurrentNetwork,
    backward,
    build_network,
    forward,
)
from .stats import mae, rmse

# Configurations whose mean RMSE is within this much of the cluster's
# minimum count as tied for best (means are reported to 3 decimals).
TIE_THRESHOLD = 5e-4

RESULTS_HEADER = ["cluster", "cell", "layers", "units", "run", "seed", "rmse", "mae", "seconds"]


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 50
    batch_size: int = 32
    runs: int = 30
    adam: AdamConfig = AdamConfig()
    shuffle_each_epoch: bool = True
    base_seed: int = 0


@dataclass(frozen=True)
class GridSpec:
    hidden_layers: tuple = (1, 2, 3, 4)
    units: tuple = (50, 100, 150, 200, 250)
    cell_kinds: tuple = ("lstm", "gru")


@dataclass(frozen=True)
class ClusterDataset:
    """One cluster's prepared data plus enough span info to timestamp
    test predictions later."""

    cluster: int
    train: SupervisedWindows
    test: SupervisedWindows
    scaler: MinMaxScaler
    split_index: int
    span_start: int = 0
    bin_width_ms: int = BIN_WIDTH_MS


@dataclass
class TrainRunResult:
    label: str
    cluster: int
    cell_kind: str
    hidden_layers: int
    units: int
    run: int
    seed: int
    loss_trace: list[float]
    rmse: float
    mae: float
    seconds: float


@dataclass
class GridResult:
    runs: list[TrainRunResult]  # ordered by (cluster, cell, layers, units, run)
    mean_rmse: dict[str, float]  # config label -> mean over runs
    best_config: dict[int, str]  # cluster -> winning label


def validate_train_config(cfg: TrainConfig) -> None:
    if cfg.epochs < 1:
        raise ConfigError(f"epochs must be >= 1, got {cfg.epochs}")
    if cfg.batch_size < 1:
        raise ConfigError(f"batch_size must be >= 1, got {cfg.batch_size}")
    if cfg.runs < 1:
        raise ConfigError(f"runs must be >= 1, got {cfg.runs}")


def validate_grid(grid: GridSpec) -> None:
    if not grid.hidden_layers or not grid.units or not grid.cell_kinds:
        raise ConfigError("grid axes must be non-empty")
    if any(h < 1 for h in grid.hidden_layers):
        raise ConfigError("hidden_layers must be >= 1")
    if any(u < 1 for u in grid.units):
        raise ConfigError("units must be >= 1")
    for kind in grid.cell_kinds:
        if kind not in ("lstm", "gru"):
            raise ConfigError(f"unknown cell kind {kind!r}")


def config_label(cell_kind: str, cluster: int, hidden_layers: int, units: int) -> str:
    return f"{cell_kind.upper()}-{cluster}-{hidden_layers}L-{units}U"


def prepare_dataset(series: BinnedCellSeries, ratio: float = 0.8,
                    window: int = WINDOW) -> ClusterDataset:
    """Split chronologically, fit the scaler on the training portion
    only, and window each split independently."""
    train_raw, test_raw = split_train_test(series.values, ratio)
    scaler = fit_scaler(train_raw)
    train = make_windows(scaler.transform(train_raw), window)
    test = make_windows(scaler.transform(test_raw), window)
    return ClusterDataset(cluster=series.cell_id, train=train, test=test,
                          scaler=scaler, split_index=train_raw.size,
                          span_start=series.span_start,
                          bin_width_ms=series.bin_width_ms)


def _fit(cell_kind: str, hidden_layers: int, units: int,
         dataset: ClusterDataset, cfg: TrainConfig,
         seed: int) -> tuple[RecurrentNetwork, list[float]]:
    """Seeded network + training loop shared by scoring and replay. The
    loss trace records each epoch's MSE over its batches as they were
    seen (before each update)."""
    validate_train_config(cfg)
    net = build_network(cell_kind, hidden_layers, units, seed=[seed, 0])
    shuffle_rng = np.random.default_rng([seed, 1])
    opt = AdamOptimizer(net, cfg.adam)
    inputs = dataset.train.inputs
    targets = dataset.train.targets
    n = targets.size

    trace = []
    for _ in range(cfg.epochs):
        order = shuffle_rng.permutation(n) if cfg.shuffle_each_epoch else np.arange(n)
        sq_sum = 0.0
        for start in range(0, n, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            y = targets[idx]
            preds, tape = forward(net, inputs[idx])
            sq_sum += float(np.sum((preds - y) ** 2))
            opt.step(net, backward(net, y, tape))
        trace.append(sq_sum / n)
    return net, trace


def train_once(cell_kind: str, hidden_layers: int, units: int,
               dataset: ClusterDataset, cfg: TrainConfig, seed: int,
               run: int = 0) -> TrainRunResult:
    """One seeded training run, scored on the test windows."""
    t0 = time.perf_counter()
    net, trace = _fit(cell_kind, hidden_layers, units, dataset, cfg, seed)
    test_preds, _ = forward(net, dataset.test.inputs)
    return TrainRunResult(
        label=config_label(cell_kind, dataset.cluster, hidden_layers, units),
        cluster=dataset.cluster, cell_kind=cell_kind,
        hidden_layers=hidden_layers, units=units, run=run, seed=seed,
        loss_trace=trace,
        rmse=rmse(test_preds, dataset.test.targets),
        mae=mae(test_preds, dataset.test.targets),
        seconds=time.perf_counter() - t0,
    )


def train_best_network(cell_kind: str, hidden_layers: int, units: int,
                       dataset: ClusterDataset, cfg: TrainConfig,
                       seed: int) -> RecurrentNetwork:
    """Re-train one configuration and hand back the fitted network (the
    grid search keeps only scores, so persisting a model means replaying
    its run: same seed derivation, bit-identical parameters)."""
    return _fit(cell_kind, hidden_layers, units, dataset, cfg, seed)[0]


def _run_task(args) -> TrainRunResult:
    cell_kind, hidden_layers, units, dataset, cfg, seed, run = args
    return train_once(cell_kind, hidden_layers, units, dataset, cfg, seed, run=run)


def grid_search(grid: GridSpec, datasets: list[ClusterDataset], cfg: TrainConfig,
                workers: int = 1) -> GridResult:
    """Every (cluster, cell kind, depth, width) trained cfg.runs times.

    Tasks are independent, so any worker count gives the same results;
    collection re-imposes (cluster, cell, layers, units, run) order
    before aggregation.
    """
    validate_grid(grid)
    validate_train_config(cfg)
    if not datasets:
        raise ConfigError("no cluster datasets given")

    tasks = []
    for ds in sorted(datasets, key=lambda d: d.cluster):
        for kind in grid.cell_kinds:
            for hidden_layers in grid.hidden_layers:
                for units in grid.units:
                    for run in range(cfg.runs):
                        tasks.append((kind, hidden_layers, units, ds, cfg,
                                      cfg.base_seed + run, run))

    if workers <= 1:
        results = [_run_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_task, tasks))

    results.sort(key=lambda r: (r.cluster, r.cell_kind, r.hidden_layers, r.units, r.run))

    by_label: dict[str, list[TrainRunResult]] = {}
    for r in results:
        by_label.setdefault(r.label, []).append(r)
    mean_rmse = {label: float(np.mean([r.rmse for r in rs]))
                 for label, rs in by_label.items()}

    result = GridResult(runs=results, mean_rmse=mean_rmse, best_config={})
    for cluster in sorted({r.cluster for r in results}):
        result.best_config[cluster] = select_best(result, cluster)[0]
    return result


def select_best(result: GridResult, cluster: int) -> list[str]:
    """Labels tied for the cluster's lowest mean RMSE (within
    TIE_THRESHOLD), best first: lower median, then tighter interquartile
    range, then fewer units, then fewer layers."""
    per_config: dict[str, list[TrainRunResult]] = {}
    for r in result.runs:
        if r.cluster == cluster:
            per_config.setdefault(r.label, []).append(r)
    if not per_config:
        raise UnknownCluster(f"no results for cluster {cluster}")

    means = {label: float(np.mean([r.rmse for r in rs]))
             for label, rs in per_config.items()}
    lowest = min(means.values())
    tied = [label for label in per_config if means[label] <= lowest + TIE_THRESHOLD]

    def order_key(label: str):
        values = np.array([r.rmse for r in per_config[label]])
        q1, median, q3 = np.percentile(values, [25.0, 50.0, 75.0])
        any_run = per_config[label][0]
        return (median, q3 - q1, any_run.units, any_run.hidden_layers, label)

    return sorted(tied, key=order_key)


def naive_last_value(windows: SupervisedWindows) -> np.ndarray:
    """Baseline forecast: the next bin equals the last window value."""
    return windows.inputs[:, -1].copy()


def naive_baseline(windows: SupervisedWindows) -> tuple[float, float]:
    preds = naive_last_value(windows)
    return rmse(preds, windows.targets), mae(preds, windows.targets)


@dataclass(frozen=True)
class PredictionTable:
    """Raw-scale test-span predictions ready for CSV emission."""

    timestamps: np.ndarray  # bin start, epoch ms
    truth: np.ndarray
    prediction: np.ndarray
    scaled_targets: np.ndarray
    scaled_preds: np.ndarray


def predict_test_split(net: RecurrentNetwork, scaler: MinMaxScaler,
                     series: BinnedCellSeries, ratio: float = 0.8) -> PredictionTable:
    """Re-derive the test split of a cluster series and predict each
    test window's target, de-normalized with the model's scaler."""
    train_raw, test_raw = split_train_test(series.values, ratio)
    windows = make_windows(scaler.transform(test_raw), net.window)
    preds_scaled, _ = forward(net, windows.inputs)
    abs_bins = train_raw.size + windows.origin_indices
    return PredictionTable(
        timestamps=series.span_start + abs_bins.astype(np.int64) * series.bin_width_ms,
        truth=test_raw[windows.origin_indices],
        prediction=scaler.inverse(preds_scaled),
        scaled_targets=windows.targets,
        scaled_preds=preds_scaled,
    )


# ---------------------------------------------------------------------------
# persistence

def save_results_csv(result: GridResult, path: str, record_timing: bool = False) -> None:
    """One row per run. Wall time is zeroed unless record_timing so that
    identical reruns produce byte-identical files."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RESULTS_HEADER)
        for r in result.runs:
            writer.writerow([
                r.cluster, r.cell_kind, r.hidden_layers, r.units, r.run, r.seed,
                f"{r.rmse:.17g}", f"{r.mae:.17g}",
                f"{r.seconds:.17g}" if record_timing else "0",
            ])


def load_results_csv(path: str) -> GridResult:
    runs = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        for row in reader:
            cluster, cell, layers, units = int(row[0]), row[1], int(row[2]), int(row[3])
            runs.append(TrainRunResult(
                label=config_label(cell, cluster, layers, units),
                cluster=cluster, cell_kind=cell, hidden_layers=layers, units=units,
                run=int(row[4]), seed=int(row[5]), loss_trace=[],
                rmse=float(row[6]), mae=float(row[7]), seconds=float(row[8]),
            ))
    by_label: dict[str, list[TrainRunResult]] = {}
    for r in runs:
        by_label.setdefault(r.label, []).append(r)
    mean_rmse = {label: float(np.mean([r.rmse for r in rs]))
                 for label, rs in by_label.items()}
    result = GridResult(runs=runs, mean_rmse=mean_rmse, best_config={})
    for cluster in sorted({r.cluster for r in runs}):
        result.best_config[cluster] = select_best(result, cluster)[0]
    return result


def save_summary_json(result: GridResult, path: str) -> None:
    """Per-cluster config summaries; `best` marks every label in the
    cluster's tie set."""
    summary: dict[str, dict] = {}
    for cluster in sorted({r.cluster for r in result.runs}):
        best = set(select_best(result, cluster))
        configs: dict[str, dict] = {}
        per_config: dict[str, list[float]] = {}
        for r in result.runs:
            if r.cluster == cluster:
                per_config.setdefault(r.label, []).append(r.rmse)
        for label in sorted(per_config):
            values = np.array(per_config[label])
            q1, median, q3 = np.percentile(values, [25.0, 50.0, 75.0])
            configs[label] = {
                "mean_rmse": float(np.mean(values)),
                "median_rmse": float(median),
                "iqr": float(q3 - q1),
                "best": label in best,
            }
        summary[str(cluster)] = configs
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")


def save_loss_traces_csv(result: GridResult, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["label", "run", "epoch", "loss"])
        for r in result.runs:
            for epoch, loss in enumerate(r.loss_trace):
                writer.writerow([r.label, r.run, epoch, f"{loss:.17g}"])

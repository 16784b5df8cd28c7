"""Single-run training, the seeded grid search, and best-config selection."""

import dataclasses
import json

import numpy as np
import pytest

from cellcast import (
    BinnedCellSeries,
    GridSpec,
    TrainConfig,
    grid_search,
    naive_baseline,
    prepare_dataset,
    train_once,
)
from cellcast.errors import ConfigError, UnknownCluster
from cellcast.training import (
    GridResult,
    TrainRunResult,
    config_label,
    load_results_csv,
    naive_last_value,
    save_loss_traces_csv,
    save_results_csv,
    save_summary_json,
    select_best,
    predict_test_split,
    train_best_network,
    validate_grid,
    validate_train_config,
)

SPAN_START = 1_383_260_400_000
BIN = 1_800_000

FAST = TrainConfig(epochs=2, batch_size=16, runs=2, base_seed=0)


def bumpy_series(n_days=3, cell_id=0):
    t = np.arange(n_days * 48)
    values = 20.0 + 10.0 * np.sin(2.0 * np.pi * t / 48.0)
    return BinnedCellSeries(cell_id=cell_id, span_start=SPAN_START, values=values)


@pytest.fixture
def dataset():
    return prepare_dataset(bumpy_series())


class TestPrepareDataset:
    def test_split_and_window_counts(self, dataset):
        # 144 bins -> 115 train / 29 test, each windowed independently
        assert dataset.split_index == 115
        assert dataset.train.inputs.shape == (111, 4)
        assert dataset.test.inputs.shape == (25, 4)

    def test_scaler_fit_on_train_only(self, dataset):
        assert dataset.train.targets.min() >= 0.0 and dataset.train.targets.max() <= 1.0

    def test_span_metadata_carried(self, dataset):
        assert dataset.span_start == SPAN_START and dataset.bin_width_ms == BIN


class TestConfigValidation:
    def test_defaults_are_valid(self):
        validate_train_config(TrainConfig())
        validate_grid(GridSpec())

    @pytest.mark.parametrize("field,value", [("epochs", 0), ("batch_size", 0), ("runs", 0)])
    def test_bad_train_config(self, field, value):
        with pytest.raises(ConfigError):
            validate_train_config(dataclasses.replace(TrainConfig(), **{field: value}))

    @pytest.mark.parametrize(
        "field,value",
        [
            ("hidden_layers", ()),
            ("units", ()),
            ("cell_kinds", ()),
            ("units", (0,)),
            ("hidden_layers", (0,)),
            ("cell_kinds", ("rnn",)),
        ],
    )
    def test_bad_grid(self, field, value):
        with pytest.raises(ConfigError):
            validate_grid(dataclasses.replace(GridSpec(), **{field: value}))


class TestLabels:
    def test_label_format(self):
        assert config_label("lstm", 3, 1, 200) == "LSTM-3-1L-200U"
        assert config_label("gru", 12, 4, 50) == "GRU-12-4L-50U"


class TestTrainOnce:
    def test_result_shape(self, dataset):
        result = train_once("gru", 1, 4, dataset, FAST, seed=3, run=1)
        assert result.label == "GRU-0-1L-4U"
        assert len(result.loss_trace) == FAST.epochs
        assert result.rmse >= 0.0 and result.mae >= 0.0
        assert result.mae <= result.rmse + 1e-15
        assert result.seconds >= 0.0
        assert result.seed == 3 and result.run == 1

    def test_deterministic_per_seed(self, dataset):
        a = train_once("lstm", 1, 4, dataset, FAST, seed=5)
        b = train_once("lstm", 1, 4, dataset, FAST, seed=5)
        assert a.rmse == b.rmse and a.mae == b.mae
        assert a.loss_trace == b.loss_trace

    def test_seed_changes_outcome(self, dataset):
        a = train_once("lstm", 1, 4, dataset, FAST, seed=5)
        b = train_once("lstm", 1, 4, dataset, FAST, seed=6)
        assert a.rmse != b.rmse

    def test_replayed_network_scores_the_recorded_rmse(self, dataset):
        from cellcast import forward, rmse as rmse_fn

        result = train_once("gru", 1, 4, dataset, FAST, seed=7)
        net = train_best_network("gru", 1, 4, dataset, FAST, seed=7)
        preds, _ = forward(net, dataset.test.inputs)
        assert abs(rmse_fn(preds, dataset.test.targets) - result.rmse) < 1e-12


class TestNaiveBaseline:
    def test_last_value_column(self, dataset):
        np.testing.assert_array_equal(naive_last_value(dataset.test), dataset.test.inputs[:, -1])

    def test_baseline_metrics_match_direct_computation(self, dataset):
        from cellcast import mae as mae_fn, rmse as rmse_fn

        r, m = naive_baseline(dataset.test)
        preds = dataset.test.inputs[:, -1]
        assert r == rmse_fn(preds, dataset.test.targets)
        assert m == mae_fn(preds, dataset.test.targets)


class TestGridSearch:
    @pytest.fixture
    def tiny_grid_result(self, dataset):
        grid = GridSpec(hidden_layers=(1,), units=(3, 4), cell_kinds=("lstm", "gru"))
        return grid_search(grid, [dataset], FAST)

    def test_run_counting(self, tiny_grid_result):
        assert len(tiny_grid_result.runs) == 2 * 2 * FAST.runs
        labels = {r.label for r in tiny_grid_result.runs}
        assert labels == {"LSTM-0-1L-3U", "LSTM-0-1L-4U", "GRU-0-1L-3U", "GRU-0-1L-4U"}
        for label in labels:
            assert sum(r.label == label for r in tiny_grid_result.runs) == FAST.runs

    def test_results_ordered(self, tiny_grid_result):
        keys = [(r.cluster, r.cell_kind, r.hidden_layers, r.units, r.run) for r in tiny_grid_result.runs]
        assert keys == sorted(keys)

    def test_run_seeds_offset_from_base(self, tiny_grid_result):
        for r in tiny_grid_result.runs:
            assert r.seed == FAST.base_seed + r.run

    def test_mean_rmse_consistent(self, tiny_grid_result):
        for label, mean in tiny_grid_result.mean_rmse.items():
            values = [r.rmse for r in tiny_grid_result.runs if r.label == label]
            assert abs(mean - np.mean(values)) < 1e-12

    def test_best_config_recorded_per_cluster(self, tiny_grid_result):
        assert 0 in tiny_grid_result.best_config
        assert tiny_grid_result.best_config[0] in tiny_grid_result.mean_rmse

    def test_reproducible_and_worker_invariant(self, dataset):
        grid = GridSpec(hidden_layers=(1,), units=(3,), cell_kinds=("gru",))
        a = grid_search(grid, [dataset], FAST, workers=1)
        b = grid_search(grid, [dataset], FAST, workers=1)
        c = grid_search(grid, [dataset], FAST, workers=2)
        for other in (b, c):
            assert [r.rmse for r in a.runs] == [r.rmse for r in other.runs]
            assert [r.label for r in a.runs] == [r.label for r in other.runs]


def fake_result(spec):
    """GridResult from {label: [rmse values]} without training anything."""
    runs = []
    for label, values in spec.items():
        kind, cluster, layers, units = label.split("-")
        for i, v in enumerate(values):
            runs.append(TrainRunResult(
                label=label, cluster=int(cluster), cell_kind=kind.lower(),
                hidden_layers=int(layers[:-1]), units=int(units[:-1]), run=i,
                seed=i, loss_trace=(0.0,), rmse=v, mae=v, seconds=0.0,
            ))
    means = {label: float(np.mean(vals)) for label, vals in spec.items()}
    return GridResult(runs=runs, mean_rmse=means, best_config={})


class TestSelectBest:
    def test_clear_winner_by_mean(self):
        result = fake_result({
            "LSTM-0-1L-50U": [0.30, 0.31, 0.32],
            "GRU-0-1L-50U": [0.10, 0.11, 0.12],
        })
        assert select_best(result, 0)[0] == "GRU-0-1L-50U"

    def test_tie_resolved_by_median(self):
        result = fake_result({
            "LSTM-0-1L-50U": [0.1000, 0.2000, 0.3003],  # mean 0.2001, median 0.2
            "GRU-0-1L-50U": [0.1001, 0.1999, 0.3000],   # mean 0.2, median 0.1999
        })
        assert select_best(result, 0) == ["GRU-0-1L-50U", "LSTM-0-1L-50U"]

    def test_tie_resolved_by_iqr_then_size(self):
        result = fake_result({
            "LSTM-0-2L-100U": [0.19, 0.20, 0.21],
            "GRU-0-1L-100U": [0.18, 0.20, 0.22],  # same mean and median, wider IQR
        })
        assert select_best(result, 0)[0] == "LSTM-0-2L-100U"

    def test_identical_distributions_prefer_fewer_units(self):
        result = fake_result({
            "LSTM-0-1L-100U": [0.2, 0.2, 0.2],
            "LSTM-0-1L-50U": [0.2, 0.2, 0.2],
        })
        assert select_best(result, 0)[0] == "LSTM-0-1L-50U"

    def test_identical_distributions_prefer_fewer_layers(self):
        result = fake_result({
            "LSTM-0-2L-50U": [0.2, 0.2, 0.2],
            "LSTM-0-1L-50U": [0.2, 0.2, 0.2],
        })
        assert select_best(result, 0)[0] == "LSTM-0-1L-50U"

    def test_far_configs_excluded_from_tie_set(self):
        result = fake_result({
            "LSTM-0-1L-50U": [0.2, 0.2, 0.2],
            "GRU-0-1L-50U": [0.3, 0.3, 0.3],
        })
        assert select_best(result, 0) == ["LSTM-0-1L-50U"]

    def test_unknown_cluster(self):
        result = fake_result({"LSTM-0-1L-50U": [0.2]})
        with pytest.raises(UnknownCluster):
            select_best(result, 9)


class TestPredictionTable:
    def test_timestamps_and_inverse_scaling(self, dataset):
        net = train_best_network("gru", 1, 4, dataset, FAST, seed=1)
        table = predict_test_split(net, dataset.scaler, bumpy_series())
        n_test = 29 - 4
        assert len(table.timestamps) == len(table.truth) == len(table.prediction) == n_test
        first_target_bin = dataset.split_index + 4
        assert table.timestamps[0] == SPAN_START + first_target_bin * BIN
        assert table.timestamps[-1] == SPAN_START + (144 - 1) * BIN
        # truth is the raw series, prediction mapped back to raw units
        np.testing.assert_allclose(table.truth, bumpy_series().values[first_target_bin:])
        np.testing.assert_allclose(
            table.prediction, dataset.scaler.inverse(np.asarray(table.scaled_preds)), atol=1e-12
        )


class TestPersistence:
    def test_results_csv_round_trip(self, dataset, tmp_path):
        grid = GridSpec(hidden_layers=(1,), units=(3,), cell_kinds=("lstm",))
        result = grid_search(grid, [dataset], FAST)
        path = tmp_path / "results.csv"
        save_results_csv(result, str(path))
        lines = path.read_text().splitlines()
        assert lines[0] == "cluster,cell,layers,units,run,seed,rmse,mae,seconds"
        assert all(line.endswith(",0") for line in lines[1:])  # timing zeroed

        loaded = load_results_csv(str(path))
        assert [r.rmse for r in loaded.runs] == [r.rmse for r in result.runs]
        assert loaded.mean_rmse.keys() == result.mean_rmse.keys()
        assert loaded.best_config == result.best_config

    def test_results_csv_can_record_timing(self, dataset, tmp_path):
        grid = GridSpec(hidden_layers=(1,), units=(3,), cell_kinds=("lstm",))
        result = grid_search(grid, [dataset], FAST)
        path = tmp_path / "timed.csv"
        save_results_csv(result, str(path), record_timing=True)
        seconds = [float(line.rsplit(",", 1)[1]) for line in path.read_text().splitlines()[1:]]
        assert any(s > 0 for s in seconds)

    def test_summary_json_structure(self, dataset, tmp_path):
        grid = GridSpec(hidden_layers=(1,), units=(3, 4), cell_kinds=("gru",))
        result = grid_search(grid, [dataset], FAST)
        path = tmp_path / "summary.json"
        save_summary_json(result, str(path))
        doc = json.loads(path.read_text())
        assert set(doc) == {"0"}
        for label, entry in doc["0"].items():
            assert set(entry) == {"mean_rmse", "median_rmse", "iqr", "best"}
        assert sum(entry["best"] for entry in doc["0"].values()) >= 1
        best_label = result.best_config[0]
        assert doc["0"][best_label]["best"] is True

    def test_loss_traces_csv(self, dataset, tmp_path):
        result = grid_search(GridSpec((1,), (3,), ("gru",)), [dataset], FAST)
        path = tmp_path / "traces.csv"
        save_loss_traces_csv(result, str(path))
        lines = path.read_text().splitlines()
        assert lines[0] == "label,run,epoch,loss"
        assert len(lines) == 1 + FAST.runs * FAST.epochs

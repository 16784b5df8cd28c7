"""Parsing and 30-minute binning of raw activity logs."""

import math

import numpy as np
import pytest

from cellcast import (
    CdrRecord,
    ColumnMap,
    bin_series,
    iter_cdr_file,
    iter_cdr_paths,
    load_bins_json,
    merge_binned,
    parse_cdr_line,
    save_bins_csv,
    save_bins_json,
)
from cellcast.errors import MalformedLine, NegativeActivity, UnalignedSpan

SPAN_START = 1_383_260_400_000
BIN = 30 * 60 * 1000

CANONICAL = "42\t1383260400000\t39\t\t\t\t\t5.25"


class TestParseLine:
    def test_canonical_line(self):
        rec = parse_cdr_line(CANONICAL)
        assert rec == CdrRecord(42, 1383260400000, 5.25)

    def test_trailing_newline_ignored(self):
        assert parse_cdr_line(CANONICAL + "\r\n") == parse_cdr_line(CANONICAL)

    def test_blank_line_skipped(self):
        assert parse_cdr_line("") is None
        assert parse_cdr_line("   \n") is None

    def test_empty_activity_field_skipped(self):
        """An empty internet column means no activity on that channel."""
        assert parse_cdr_line("42\t1383260400000\t39\t1.0\t\t\t\t") is None

    def test_too_few_columns(self):
        with pytest.raises(MalformedLine):
            parse_cdr_line("42\t1383260400000\t39")

    def test_non_numeric_id(self):
        with pytest.raises(MalformedLine):
            parse_cdr_line("abc\t1383260400000\t39\t\t\t\t\t5.25")

    def test_non_numeric_activity(self):
        with pytest.raises(MalformedLine):
            parse_cdr_line("42\t1383260400000\t39\t\t\t\t\tx")

    def test_non_finite_activity(self):
        with pytest.raises(MalformedLine):
            parse_cdr_line("42\t1383260400000\t39\t\t\t\t\tnan")
        with pytest.raises(MalformedLine):
            parse_cdr_line("42\t1383260400000\t39\t\t\t\t\tinf")

    def test_negative_activity(self):
        with pytest.raises(NegativeActivity):
            parse_cdr_line("42\t1383260400000\t39\t\t\t\t\t-0.5")

    def test_cell_id_below_one(self):
        with pytest.raises(MalformedLine):
            parse_cdr_line("0\t1383260400000\t39\t\t\t\t\t5.25")

    def test_custom_column_map(self):
        rec = parse_cdr_line("7.5\t3\t1383260400000", ColumnMap(cell_id=1, timestamp=2, internet=0))
        assert rec == CdrRecord(3, 1383260400000, 7.5)


class TestFileIteration:
    def test_header_line_skipped(self, tmp_path):
        path = tmp_path / "with_header.tsv"
        path.write_text("square_id\ttime\tcountry\ta\tb\tc\td\tinternet\n" + CANONICAL + "\n")
        assert [r.cell_id for r in iter_cdr_file(str(path))] == [42]

    def test_headerless_file_fully_read(self, tmp_path):
        path = tmp_path / "plain.tsv"
        path.write_text(CANONICAL + "\n" + CANONICAL + "\n")
        assert len(list(iter_cdr_file(str(path)))) == 2

    def test_directory_reads_sorted_and_filters_sidecars(self, tmp_path):
        """Directory listings only take CDR-looking extensions, in name order."""
        (tmp_path / "b.tsv").write_text("2\t1383260400000\t39\t\t\t\t\t1\n")
        (tmp_path / "a.tsv").write_text("1\t1383260400000\t39\t\t\t\t\t1\n")
        (tmp_path / "truth.csv").write_text("cell_id,archetype\n1,0\n")
        ids = [r.cell_id for r in iter_cdr_paths([str(tmp_path)])]
        assert ids == [1, 2]

    def test_explicit_file_always_read(self, tmp_path):
        path = tmp_path / "oddname.log"
        path.write_text(CANONICAL + "\n")
        assert len(list(iter_cdr_paths([str(path)]))) == 1


class TestBinning:
    def test_boundary_placement(self):
        """First ms of a bin belongs to it, first ms of the next does not."""
        records = [
            CdrRecord(1, SPAN_START, 1.0),
            CdrRecord(1, SPAN_START + BIN - 1, 2.0),
            CdrRecord(1, SPAN_START + BIN, 4.0),
        ]
        result = bin_series(records, SPAN_START, SPAN_START + 2 * BIN)
        np.testing.assert_allclose(result.cells[1].values, [3.0, 4.0])
        assert result.dropped == 0

    def test_out_of_span_records_dropped_and_counted(self):
        records = [
            CdrRecord(1, SPAN_START - 1, 9.0),
            CdrRecord(1, SPAN_START, 1.0),
            CdrRecord(1, SPAN_START + 2 * BIN, 9.0),
        ]
        result = bin_series(records, SPAN_START, SPAN_START + 2 * BIN)
        assert result.dropped == 2
        np.testing.assert_allclose(result.cells[1].values, [1.0, 0.0])

    def test_empty_bins_are_explicit_zeros(self):
        result = bin_series([CdrRecord(5, SPAN_START, 1.5)], SPAN_START, SPAN_START + 4 * BIN)
        series = result.cells[5]
        assert series.n_bins == 4
        np.testing.assert_array_equal(series.values[1:], 0.0)

    def test_sixty_two_day_span_gives_2976_bins(self):
        end = SPAN_START + 62 * 48 * BIN
        result = bin_series([CdrRecord(1, SPAN_START, 1.0)], SPAN_START, end)
        assert result.cells[1].n_bins == 2976

    def test_unaligned_span_rejected(self):
        with pytest.raises(UnalignedSpan):
            bin_series([], SPAN_START + 1, SPAN_START + BIN + 1)
        with pytest.raises(UnalignedSpan):
            bin_series([], SPAN_START, SPAN_START)

    def test_mass_conservation_many_small_records(self):
        """Compensated accumulation keeps the total at fsum precision."""
        rng = np.random.default_rng(11)
        parts = rng.random(20_000) * 1e-3
        offsets = rng.integers(0, 48 * BIN, size=parts.size)
        records = [CdrRecord(1, SPAN_START + int(o), float(p)) for o, p in zip(offsets, parts)]
        result = bin_series(records, SPAN_START, SPAN_START + 48 * BIN)
        total = math.fsum(result.cells[1].values)
        assert abs(total - math.fsum(parts)) < 1e-9

    def test_bin_start_helper(self):
        result = bin_series([CdrRecord(1, SPAN_START, 1.0)], SPAN_START, SPAN_START + 2 * BIN)
        assert result.cells[1].bin_start(1) == SPAN_START + BIN


class TestMerge:
    def test_merge_adds_elementwise(self):
        a = bin_series([CdrRecord(1, SPAN_START, 1.0)], SPAN_START, SPAN_START + BIN).cells
        b = bin_series(
            [CdrRecord(1, SPAN_START, 2.0), CdrRecord(2, SPAN_START, 5.0)],
            SPAN_START,
            SPAN_START + BIN,
        ).cells
        merged = merge_binned(a, b)
        np.testing.assert_allclose(merged[1].values, [3.0])
        np.testing.assert_allclose(merged[2].values, [5.0])

    def test_merge_leaves_inputs_untouched(self):
        a = bin_series([CdrRecord(1, SPAN_START, 1.0)], SPAN_START, SPAN_START + BIN).cells
        b = bin_series([CdrRecord(1, SPAN_START, 2.0)], SPAN_START, SPAN_START + BIN).cells
        merge_binned(a, b)
        np.testing.assert_allclose(a[1].values, [1.0])
        np.testing.assert_allclose(b[1].values, [2.0])

    def test_merge_rejects_mismatched_spans(self):
        a = bin_series([CdrRecord(1, SPAN_START, 1.0)], SPAN_START, SPAN_START + BIN).cells
        b = bin_series([CdrRecord(1, SPAN_START + BIN, 1.0)], SPAN_START + BIN, SPAN_START + 2 * BIN).cells
        with pytest.raises(UnalignedSpan):
            merge_binned(a, b)

    def test_split_files_merge_to_single_pass(self):
        """Binning record halves separately then merging equals one pass."""
        rng = np.random.default_rng(3)
        records = [
            CdrRecord(int(rng.integers(1, 4)), SPAN_START + int(rng.integers(0, 8 * BIN)), float(rng.random()))
            for _ in range(200)
        ]
        end = SPAN_START + 8 * BIN
        whole = bin_series(records, SPAN_START, end).cells
        merged = merge_binned(
            bin_series(records[:100], SPAN_START, end).cells,
            bin_series(records[100:], SPAN_START, end).cells,
        )
        assert set(merged) == set(whole)
        for cid in whole:
            np.testing.assert_allclose(merged[cid].values, whole[cid].values, rtol=0, atol=1e-12)


class TestPersistence:
    def test_json_round_trip_exact(self, tmp_path):
        cells = bin_series(
            [CdrRecord(1, SPAN_START, 0.1), CdrRecord(2, SPAN_START + BIN, 1 / 3)],
            SPAN_START,
            SPAN_START + 2 * BIN,
        ).cells
        path = tmp_path / "bins.json"
        save_bins_json(cells, str(path))
        loaded = load_bins_json(str(path))
        assert set(loaded) == {1, 2}
        for cid in cells:
            assert loaded[cid].span_start == SPAN_START
            assert loaded[cid].bin_width_ms == BIN
            np.testing.assert_array_equal(loaded[cid].values, cells[cid].values)

    def test_json_file_ends_with_newline(self, tmp_path):
        path = tmp_path / "bins.json"
        save_bins_json({}, str(path))
        assert path.read_bytes().endswith(b"\n")

    def test_csv_rows_sorted_and_reparse_exactly(self, tmp_path):
        cells = bin_series(
            [CdrRecord(2, SPAN_START, math.pi), CdrRecord(1, SPAN_START + BIN, math.e)],
            SPAN_START,
            SPAN_START + 2 * BIN,
        ).cells
        path = tmp_path / "bins.csv"
        save_bins_csv(cells, str(path))
        lines = path.read_text().splitlines()
        assert lines[0] == "cell_id,bin_index,value"
        # every bin of every cell appears, cells in id order, zeros explicit
        assert [ln.rsplit(",", 1)[0] for ln in lines[1:]] == ["1,0", "1,1", "2,0", "2,1"]
        # 17 significant digits round-trip float64 exactly
        assert float(lines[2].split(",")[2]) == math.e
        assert float(lines[3].split(",")[2]) == math.pi

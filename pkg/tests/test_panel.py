import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from icevar import DataError, PanelSeries, read_panel_csv, standardize, write_panel_csv


def test_two_point_column_population_convention():
    raw = PanelSeries(("u",), ("a",), np.array([[[1.0], [3.0]]]))
    out = standardize(raw)
    np.testing.assert_array_equal(out.values[0, :, 0], [-1.0, 1.0])
    assert out.mean[0] == 2.0
    assert out.std[0] == 1.0  # divide by N, not N-1


def test_standardize_is_idempotent():
    gen = np.random.default_rng(0)
    raw = PanelSeries(("u",), ("a", "b"), gen.normal(3.0, 2.5, (1, 200, 2)))
    once = standardize(raw)
    twice = standardize(once)
    assert np.max(np.abs(twice.values - once.values)) < 1e-12


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_standardized_moments_recomputed(seed):
    gen = np.random.default_rng(seed)
    raw = PanelSeries(("u",), ("a",), gen.normal(-2.0, 7.0, (1, 50, 1)))
    out = standardize(raw)
    col = out.values[0, :, 0]
    mean = sum(col) / len(col)
    var = sum((v - mean) ** 2 for v in col) / len(col)
    assert abs(mean) < 1e-12
    assert abs(np.sqrt(var) - 1.0) < 1e-12


def test_constant_column_names_variable():
    raw = PanelSeries(("u",), ("ok", "flat"), np.stack([np.arange(5.0), np.ones(5)], axis=1)[None])
    with pytest.raises(DataError, match="flat"):
        standardize(raw)


def test_csv_round_trip_is_exact(tmp_path):
    gen = np.random.default_rng(4)
    panel = standardize(
        PanelSeries(("a", "b"), ("X", "Y", "Z"), gen.normal(0, 1, (2, 30, 3)))
    )
    path = tmp_path / "panel.csv"
    write_panel_csv(panel, path, meta={"note": "round trip"})
    back = read_panel_csv(path)
    assert back.unit_ids == ("a", "b")
    assert back.var_names == ("X", "Y", "Z")
    assert np.array_equal(back.values, panel.values)
    assert np.array_equal(back.times, panel.times)


def test_read_rejects_bad_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("country,year,X\nu,0,1.0\n")
    with pytest.raises(DataError, match="unit"):
        read_panel_csv(path)


def test_read_rejects_unbalanced_panel(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("unit,time,X\na,0,1.0\na,1,2.0\nb,0,3.0\n")
    with pytest.raises(DataError, match="'b'"):
        read_panel_csv(path)


def test_read_rejects_gaps(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("unit,time,X\na,0,1.0\na,2,2.0\n")
    with pytest.raises(DataError, match="gap"):
        read_panel_csv(path)


def test_read_rejects_missing_values(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("unit,time,X,Y\na,0,1.0,\na,1,2.0,3.0\n")
    with pytest.raises(DataError, match="missing value"):
        read_panel_csv(path)


def test_read_rejects_duplicates(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("unit,time,X\na,0,1.0\na,0,2.0\n")
    with pytest.raises(DataError, match="duplicate"):
        read_panel_csv(path)

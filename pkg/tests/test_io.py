import numpy as np
import pytest

from modcast.exceptions import InvalidInputError
from modcast.io import RESULT_COLUMNS, ParseError, append_results, load_csv, read_results, save_csv


def write(tmp_path, text, name="d.csv"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_three_rows_two_features(tmp_path):
    src = load_csv(write(tmp_path, "a,b\n1,2\n3,4\n5,6\n"))
    assert (src.length, src.channels) == (3, 2)
    assert src.column_names == ("a", "b")
    np.testing.assert_array_equal(src.values, [[1, 2], [3, 4], [5, 6]])
    assert src.name == "d"


def test_date_column_is_excluded(tmp_path):
    src = load_csv(write(tmp_path, "date,x,y,z\n2020-01-01,1,2,3\n2020-01-02,4,5,6\n"))
    assert src.channels == 3 and src.timestamp_column == "date"
    assert src.column_names == ("x", "y", "z")


def test_gap_row_names_the_row(tmp_path):
    path = write(tmp_path, "a,b\n1,2\n3,\n5,6\n")
    with pytest.raises(ParseError, match="row 3") as info:
        load_csv(path)
    assert info.value.row == 3 and info.value.column == "b"


def test_forward_fill(tmp_path):
    src = load_csv(write(tmp_path, "a,b\n1,2\n3,\n5,6\n"), fill="ffill")
    np.testing.assert_array_equal(src.values[:, 1], [2, 2, 6])
    with pytest.raises(ParseError):
        load_csv(write(tmp_path, "a,b\n1,\n3,4\n", "e.csv"), fill="ffill")


def test_non_numeric_and_ragged_rows(tmp_path):
    with pytest.raises(ParseError, match="column 'a'"):
        load_csv(write(tmp_path, "a\n1\nx\n"))
    with pytest.raises(ParseError, match="row 2"):
        load_csv(write(tmp_path, "a,b\n1\n", "r.csv"))
    with pytest.raises(ParseError):
        load_csv(write(tmp_path, "a\n1\ninf\n", "i.csv"))


def test_empty_inputs(tmp_path):
    with pytest.raises(InvalidInputError):
        load_csv(write(tmp_path, ""))
    with pytest.raises(InvalidInputError):
        load_csv(write(tmp_path, "a,b\n", "h.csv"))


def test_target_selection(tmp_path):
    src = load_csv(write(tmp_path, "a,b\n1,2\n3,4\n"), target="a")
    assert src.column_names == ("a",) and src.values.shape == (2, 1)
    with pytest.raises(InvalidInputError):
        src.select("zzz")


def test_save_load_round_trip(tmp_path):
    x = np.random.default_rng(0).standard_normal((20, 3))
    save_csv(tmp_path / "s.csv", x, ["p", "q", "r"], with_date=True)
    src = load_csv(tmp_path / "s.csv")
    np.testing.assert_array_equal(src.values, x)
    assert src.column_names == ("p", "q", "r")


def result_row(seed, mse):
    row = dict(dataset="d", horizon=4, task="multivariate", seed=seed, lookback=8, status="ok")
    row.update({"in": 1, "sd": 0, "fusion": "temporal", "embed": "none", "ff": "mlp", "mse": mse, "mae": 0.5})
    return row


def test_results_append_and_read(tmp_path):
    path = tmp_path / "r.csv"
    assert read_results(path) == []
    assert append_results(path, [result_row(0, 1.25)]) == 1
    append_results(path, [result_row(1, 2.5)])
    lines = path.read_text().splitlines()
    assert lines[0] == ",".join(RESULT_COLUMNS) and len(lines) == 3
    rows = read_results(path)
    assert [r["mse"] for r in rows] == [1.25, 2.5]
    assert rows[0]["smape"] is None and rows[0]["in"] == "1"


def test_results_missing_columns(tmp_path):
    with pytest.raises(InvalidInputError):
        read_results(write(tmp_path, "dataset,mse\nd,1\n"))

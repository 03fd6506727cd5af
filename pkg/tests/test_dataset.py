import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pradequacy.dataset import (DataTable, VariableRoles, add_lags, concat_rows, lag_name,
                                load_csv, split_rows)
from pradequacy.errors import DataError, PreconditionError


def write(tmp_path, text, name="d.csv"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


class TestLoadCsv:
    def test_basic(self, tmp_path):
        t = load_csv(write(tmp_path, "y,x\n1,2\n3,4\n5,6\n"))
        assert t.n == 3 and t.names == ("y", "x")
        np.testing.assert_array_equal(t.column("x"), [2, 4, 6])

    def test_no_rows(self, tmp_path):
        with pytest.raises(DataError, match="no rows"):
            load_csv(write(tmp_path, "y,x\n"))

    def test_bad_cell_names_row_and_column(self, tmp_path):
        with pytest.raises(DataError, match=r"row 2.*'x'"):
            load_csv(write(tmp_path, "y,x\n1,2\n3,abc\n"))

    def test_ragged(self, tmp_path):
        with pytest.raises(DataError, match="row 2"):
            load_csv(write(tmp_path, "y,x\n1,2\n3\n"))

    def test_duplicate_header(self, tmp_path):
        with pytest.raises(DataError, match="duplicate"):
            load_csv(write(tmp_path, "y,y\n1,2\n"))

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError):
            load_csv(tmp_path / "nope.csv")

    def test_round_trip_full_precision(self, tmp_path, rng):
        t = DataTable.from_columns({"a": rng.standard_normal(20) * 1e-7,
                                    "b": rng.standard_normal(20) * 1e9})
        path = tmp_path / "rt.csv"
        t.to_csv(path)
        back = load_csv(path)
        np.testing.assert_array_equal(back.values, t.values)


class TestLags:
    def test_alignment(self):
        t = add_lags(DataTable.from_columns({"y": [1.0, 2, 3, 4]}), "y", 1)
        np.testing.assert_array_equal(t.column("y"), [2, 3, 4])
        np.testing.assert_array_equal(t.column(lag_name("y", 1)), [1, 2, 3])

    def test_lag_zero(self):
        with pytest.raises(PreconditionError, match="max_lag must be >= 1"):
            add_lags(DataTable.from_columns({"y": [1.0, 2, 3, 4]}), "y", 0)

    def test_lag_too_long(self):
        with pytest.raises(PreconditionError):
            add_lags(DataTable.from_columns({"y": [1.0, 2, 3, 4]}), "y", 4)

    def test_needs_time_order(self):
        t = DataTable.from_columns({"y": [1.0, 2, 3, 4]}, time_ordered=False)
        with pytest.raises(PreconditionError):
            add_lags(t, "y", 1)


@settings(max_examples=50, deadline=None)
@given(st.integers(5, 60), st.integers(1, 4))
def test_lags_shift_index(n, p):
    t = DataTable.from_columns({"y": np.arange(n, dtype=float)})
    lagged = add_lags(t, "y", p)
    assert lagged.n == n - p
    for j in range(1, p + 1):
        np.testing.assert_array_equal(lagged.column("y") - lagged.column(lag_name("y", j)), j)


class TestSplit:
    def test_halves(self):
        a, b = split_rows(DataTable.from_columns({"y": np.arange(10.0)}), 0.5)
        assert (a.n, b.n) == (5, 5)

    def test_degenerate(self):
        with pytest.raises(PreconditionError):
            split_rows(DataTable.from_columns({"y": np.arange(10.0)}), 0.05)

    def test_concat_inverse(self, rng):
        t = DataTable.from_columns({"y": rng.standard_normal(13), "x": rng.standard_normal(13)})
        back = concat_rows(*split_rows(t, 0.4))
        np.testing.assert_array_equal(back.values, t.values)
        assert back.names == t.names


def test_roles_validation():
    t = DataTable.from_columns({"y": [1.0, 2], "x": [3.0, 4]})
    VariableRoles("y", ("x",)).validate(t)
    with pytest.raises(DataError):
        VariableRoles("y", ("z",)).validate(t)


def test_nonfinite_rejected():
    with pytest.raises(DataError):
        DataTable.from_columns({"y": [1.0, float("nan")]})


def test_values_read_only():
    t = DataTable.from_columns({"y": [1.0, 2.0]})
    with pytest.raises(ValueError):
        t.values[0, 0] = 5.0

import numpy as np
import pytest

from pcr.data import Dataset, read_dataset_csv, write_dataset_csv
from pcr.errors import DataError


@pytest.mark.unit
class TestDataset:
    def test_shapes(self):
        data = Dataset([1.0, 2.0], [0.0, 1.0], [[1.0, 2.0], [3.0, 4.0]])
        assert data.n == 2
        assert data.q == 2

    def test_empty_z(self):
        data = Dataset([1.0, 2.0, 3.0], [0.0, 1.0, 2.0], np.empty((3, 0)))
        assert data.q == 0

    def test_one_dimensional_z_is_a_column(self):
        data = Dataset([1.0, 2.0], [0.0, 1.0], [5.0, 6.0])
        assert data.z.shape == (2, 1)

    def test_length_mismatch(self):
        with pytest.raises(DataError):
            Dataset([1.0, 2.0], [0.0], np.empty((2, 0)))

    def test_non_finite_reports_row(self):
        with pytest.raises(DataError) as exc:
            Dataset([1.0, np.nan, 3.0], [0.0, 1.0, 2.0], np.empty((3, 0)))
        assert exc.value.sample_index == 1

    def test_needs_a_sample(self):
        with pytest.raises(DataError):
            Dataset([], [], np.empty((0, 0)))

    def test_subset(self):
        data = Dataset([1.0, 2.0, 3.0], [4.0, 5.0, 6.0], [[0.0], [1.0], [2.0]])
        sub = data.subset([2, 0])
        np.testing.assert_array_equal(sub.x, [3.0, 1.0])
        np.testing.assert_array_equal(sub.z[:, 0], [2.0, 0.0])


@pytest.mark.unit
class TestDatasetCsv:
    def test_write_then_read(self, tmp_path, gaussian_null_data):
        data, _ = gaussian_null_data
        path = tmp_path / "d.csv"
        write_dataset_csv(data, path)
        back = read_dataset_csv(path)
        np.testing.assert_array_equal(back.x, data.x)
        np.testing.assert_array_equal(back.z, data.z)

    def test_categorical_y_uses_sorted_codes(self, tmp_path):
        path = tmp_path / "cat.csv"
        path.write_text("x,y\n0.1,Registered\n0.2,Casual\n0.3,Registered\n")
        data = read_dataset_csv(path)
        np.testing.assert_array_equal(data.y, [1.0, 0.0, 1.0])
        assert data.y_categories == {0: "Casual", 1: "Registered"}

    def test_missing_columns(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("x,z1\n1,2\n")
        with pytest.raises(DataError, match="missing columns"):
            read_dataset_csv(path)

    def test_z_columns_must_be_consecutive(self, tmp_path):
        path = tmp_path / "gap.csv"
        path.write_text("x,y,z1,z3\n1,2,3,4\n")
        with pytest.raises(DataError, match="z1..zq"):
            read_dataset_csv(path)

    def test_non_numeric_x(self, tmp_path):
        path = tmp_path / "text.csv"
        path.write_text("x,y\nabc,1\n")
        with pytest.raises(DataError):
            read_dataset_csv(path)

from fractions import Fraction

import pytest
from pydantic import ValidationError

from pcr.schemas import CrtResult, GroupedPcrConfig, GroupedPcrResult, PcrConfig, RobustConfig, TripRecord


@pytest.mark.unit
class TestConfigs:
    def test_counterfeit_count(self):
        assert PcrConfig(num_labels=5, counterfeit_ratio=4, alpha=0.1).num_counterfeits == 19

    @pytest.mark.parametrize("fields", [
        {"num_labels": 1, "counterfeit_ratio": 4, "alpha": 0.1},
        {"num_labels": 5, "counterfeit_ratio": 0, "alpha": 0.1},
        {"num_labels": 5, "counterfeit_ratio": 4, "alpha": 1.0},
        {"num_labels": 5, "counterfeit_ratio": 4, "alpha": 0.1, "threshold_kind": "exact"},
        {"num_labels": 5, "counterfeit_ratio": 4, "alpha": 0.1, "extra": 1},
    ])
    def test_invalid(self, fields):
        with pytest.raises(ValidationError):
            PcrConfig(**fields)

    def test_enum_values_stored_as_strings(self):
        assert PcrConfig(num_labels=5, counterfeit_ratio=4, alpha=0.1, threshold_kind="finite").threshold_kind == "finite"

    def test_robust_delta_bound(self):
        assert RobustConfig(num_labels=2, counterfeit_ratio=1, alpha=0.1, delta=0.5).delta == 0.5
        with pytest.raises(ValidationError):
            RobustConfig(num_labels=2, counterfeit_ratio=1, alpha=0.1, delta=0.51)

    def test_group_size(self):
        assert GroupedPcrConfig(num_labels=10, counterfeit_ratio=200, alpha=0.05).group_size == 4
        with pytest.raises(ValidationError):
            GroupedPcrConfig(num_labels=10, counterfeit_ratio=200, alpha=0.05, group_size=0)


@pytest.mark.unit
class TestResults:
    def test_crt_p_lattice(self):
        result = CrtResult(M=9, p_num=3, p_den=10, reject_one_lower=False, reject_one_upper=False, reject_two=False)
        assert result.p == Fraction(3, 10)
        with pytest.raises(ValidationError):
            CrtResult(M=9, p_num=3, p_den=11, reject_one_lower=False, reject_one_upper=False, reject_two=False)

    def test_grouped_result_serialization(self):
        result = GroupedPcrResult(p_finite=1.0, p_asym=0.5, U=3.0, N_groups=10, L=10, K=200, reject=False, dropped=2)
        assert list(result.to_json_dict()) == ["p_finite", "p_asym", "U", "N_groups", "L", "K"]


@pytest.mark.unit
class TestTripRecord:
    def _row(self, **overrides):
        row = dict(duration_min="12.5", start_loc="A", end_loc="B", hour="8.25", user_type="Casual",
                   date="2011-10-03", weekday="Monday")
        row.update(overrides)
        return row

    def test_valid(self):
        record = TripRecord(**self._row())
        assert record.duration_min == 12.5
        assert record.route == ("A", "B")

    @pytest.mark.parametrize("field, value", [
        ("duration_min", "0"),
        ("duration_min", "abc"),
        ("hour", "24"),
        ("start_loc", ""),
        ("user_type", "  "),
    ])
    def test_invalid(self, field, value):
        with pytest.raises(ValidationError):
            TripRecord(**self._row(**{field: value}))

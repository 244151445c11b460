"""
人口校准的测试
数据加载、合并列拆分、σ 区间和案例预设
"""
import pytest

from src.calibration import (
    DemographicRecord, PoolMapping, SigmaInterval,
    case_presets, load_demographics, load_pool_mapping,
    required_imports, sigma_interval, sigma_table, split_pooled,
)
from src.config import CAPE_CSV_PATH, CAPE_POOL_PATH, LIMA_CSV_PATH, LIMA_POOL_PATH
from src.core.errors import CalibrationError, ParameterDomainError

CAPE_EXPECTED = {
    1670: (0.17, 0.34),
    1690: (0.18, 0.35),
    1711: (0.26, 0.52),
    1730: (0.31, 0.63),
    1750: (0.28, 0.56),
    1770: (0.26, 0.53),
    1798: (0.34, 0.68),
    1820: (0.29, 0.59),
}

LIMA_EXPECTED = {
    1600: (0.23, 0.46),
    1614: (0.25, 0.49),
    1619: (0.28, 0.55),
    1636: (0.28, 0.56),
}


def _write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


# ===== 随附数据 =====

class TestBundledData:
    def test_cape_intervals(self):
        table = sigma_table(load_demographics(CAPE_CSV_PATH), load_pool_mapping(CAPE_POOL_PATH))
        assert list(table["year"]) == sorted(CAPE_EXPECTED)
        for row in table.itertuples(index=False):
            assert (row.low_rounded, row.high_rounded) == CAPE_EXPECTED[row.year]

    def test_lima_intervals(self):
        table = sigma_table(load_demographics(LIMA_CSV_PATH), load_pool_mapping(LIMA_POOL_PATH))
        assert list(table["year"]) == sorted(LIMA_EXPECTED)
        for row in table.itertuples(index=False):
            assert (row.low_rounded, row.high_rounded) == LIMA_EXPECTED[row.year]

    def test_lima_1600_split(self):
        table = sigma_table(load_demographics(LIMA_CSV_PATH), load_pool_mapping(LIMA_POOL_PATH))
        row = table[table["year"] == 1600].iloc[0]
        assert row["total"] == 14252
        assert row["l2_count"] == 6091 + 438

    def test_low_is_half_of_high(self):
        table = sigma_table(load_demographics(CAPE_CSV_PATH), load_pool_mapping(CAPE_POOL_PATH))
        assert (table["sigma_low"] == 0.5 * table["sigma_high"]).all()

    def test_pool_file(self):
        mapping = load_pool_mapping(LIMA_POOL_PATH)
        assert mapping.l2_pool == frozenset({"Black", "Indigenous"})
        assert mapping.pooled == {"Black+MixedAfE": 0.92}


# ===== σ 估计 =====

class TestSplitPooled:
    @pytest.mark.parametrize("count, expected", [(100, (92, 8)), (6621, (6091, 530)), (0, (0, 0))])
    def test_split(self, count, expected):
        assert split_pooled(count) == expected

    def test_custom_ratio(self):
        assert split_pooled(10, 0.25) == (3, 7)

    def test_invalid(self):
        with pytest.raises(ParameterDomainError):
            split_pooled(-1)
        with pytest.raises(ParameterDomainError):
            split_pooled(10, 1.5)


class TestSigmaInterval:
    def test_empty_pool(self):
        record = DemographicRecord(1700, {"Europeans": 100})
        interval = sigma_interval(record, [])
        assert (interval.low, interval.high) == (0.0, 0.0)

    def test_missing_group_counts_as_zero(self):
        record = DemographicRecord(1700, {"Europeans": 60, "Slaves": 40})
        assert sigma_interval(record, ["Slaves", "Khoekhoe"]).high == pytest.approx(0.4)

    def test_scale_invariance(self):
        small = DemographicRecord(1700, {"A": 3, "B": 7})
        large = DemographicRecord(1700, {"A": 300, "B": 700})
        assert sigma_interval(small, ["A"]) == sigma_interval(large, ["A"])

    def test_low_fraction(self):
        record = DemographicRecord(1700, {"A": 1, "B": 1})
        assert sigma_interval(record, ["A"], low_fraction=0.2).low == pytest.approx(0.1)

    def test_zero_total(self):
        with pytest.raises(CalibrationError):
            sigma_interval(DemographicRecord(1700, {"A": 0}), ["A"])

    def test_interval_order(self):
        with pytest.raises(ParameterDomainError):
            SigmaInterval(low=0.6, high=0.5)

    def test_rounded_half_up(self):
        assert SigmaInterval(low=0.125, high=0.345).rounded() == (0.13, 0.35)

    def test_required_imports(self):
        assert required_imports(1.4, -2.7) == pytest.approx(4.1)


class TestRecordSplit:
    def test_split_merges_into_existing_groups(self):
        record = DemographicRecord(1600, {"Black+MixedAfE": 100, "Black": 5},
                                   frozenset({"Black+MixedAfE"}))
        split = record.split("Black+MixedAfE", 0.92)
        assert split.counts == {"Black": 97, "MixedAfE": 8}
        assert split.total == record.total
        assert not split.pooled_flags

    def test_absent_pooled_group(self):
        record = DemographicRecord(1614, {"Black": 5})
        assert record.split("Black+MixedAfE", 0.92) is record


# ===== 加载器错误 =====

class TestLoaderErrors:
    def test_missing_file(self, tmp_path):
        with pytest.raises(CalibrationError):
            load_demographics(tmp_path / "absent.csv")

    def test_missing_columns(self, tmp_path):
        path = _write(tmp_path / "bad.csv", "year,group\n1700,A\n")
        with pytest.raises(CalibrationError):
            load_demographics(path)

    def test_negative_count(self, tmp_path):
        path = _write(tmp_path / "bad.csv", "year,group,count\n1700,A,-5\n")
        with pytest.raises(CalibrationError):
            load_demographics(path)

    def test_duplicate_group(self, tmp_path):
        path = _write(tmp_path / "bad.csv", "year,group,count\n1700,A,5\n1700,A,6\n")
        with pytest.raises(CalibrationError):
            load_demographics(path)

    def test_empty_count(self, tmp_path):
        path = _write(tmp_path / "bad.csv", "year,group,count\n1700,A,\n")
        with pytest.raises(CalibrationError):
            load_demographics(path)

    def test_records_sorted_by_year(self, tmp_path):
        path = _write(tmp_path / "ok.csv", "year,group,count\n1720,A,1\n1700,A,2\n1700,B,3\n")
        records = load_demographics(path)
        assert [r.year for r in records] == [1700, 1720]
        assert records[0].counts == {"A": 2, "B": 3}

    def test_unknown_section(self, tmp_path):
        path = _write(tmp_path / "bad.pool", "[groups]\nA\n")
        with pytest.raises(CalibrationError):
            load_pool_mapping(path)

    def test_line_outside_section(self, tmp_path):
        path = _write(tmp_path / "bad.pool", "A\n")
        with pytest.raises(CalibrationError):
            load_pool_mapping(path)

    @pytest.mark.parametrize("line", ["AB,0.9", "A+B,high", "A+B,1.5"])
    def test_bad_pooled_line(self, tmp_path, line):
        path = _write(tmp_path / "bad.pool", f"[pooled]\n{line}\n")
        with pytest.raises(CalibrationError):
            load_pool_mapping(path)

    def test_unknown_pool_group(self):
        records = [DemographicRecord(1700, {"A": 1, "B": 1})]
        with pytest.raises(CalibrationError):
            sigma_table(records, PoolMapping(l2_pool=frozenset({"C"})))

    def test_no_records(self):
        with pytest.raises(CalibrationError):
            sigma_table([], PoolMapping(l2_pool=frozenset()))


# ===== 案例预设 =====

class TestCasePresets:
    def setup_method(self):
        self.presets = {p.name: p for p in case_presets()}

    def test_afrikaans(self):
        preset = self.presets["afrikaans"]
        assert preset.alpha == 1.0
        assert preset.sigma_crit_lower == 0.0
        assert preset.sigma_crit_upper_d1 == 0.0
        assert len(preset.sigma_intervals) == 8
        assert preset.max_sigma == pytest.approx(0.68, abs=0.005)

    def test_afro_peruvian(self):
        preset = self.presets["afro_peruvian"]
        assert preset.alpha == pytest.approx(14.0)
        assert preset.sigma_crit_lower == pytest.approx(13 / 14)
        assert preset.sigma_crit_upper_d1 == pytest.approx(26 / 14)
        # 最大的 σ 仍低于 σ_crit 的下界，语法得以保留
        assert preset.max_sigma < preset.sigma_crit_lower

    def test_to_row(self):
        row = self.presets["afro_peruvian"].to_row()
        assert row["alpha1"] == 0.7 and row["alpha2"] == 0.05
        assert row["years"] == 4

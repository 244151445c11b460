"""
人口数据
人口记录、L2 群体映射、两个数据文件的加载器，以及 σ 区间估计
"""
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, List, Tuple

import pandas as pd
from dataclasses_json import dataclass_json

from src.config import CALIBRATION_DEFAULTS
from src.core.errors import CalibrationError, require
from src.utils import console
from src.utils.math_utils import round_half_up

# 合并列的组名用 + 连接，例如 Black+MixedAfE
POOLED_SEPARATOR = "+"


@dataclass(frozen=True)
class DemographicRecord:
    """
    某一年的人口记录

    Attributes:
        year: 年份
        counts: 组名 -> 人数
        pooled_flags: 合并了多个群体的组名
    """
    year: int
    counts: Dict[str, int]
    pooled_flags: FrozenSet[str] = field(default_factory=frozenset)

    def __post_init__(self):
        if not self.counts:
            raise CalibrationError(f"{self.year} 年的记录为空")
        for group, count in self.counts.items():
            if count < 0:
                raise CalibrationError(f"{self.year} 年 {group} 人数为负: {count}")

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def split(self, pooled_group: str, ratio: float) -> 'DemographicRecord':
        """把合并列拆回两个群体（前者取 ratio 份）"""
        if pooled_group not in self.counts:
            return self
        major_name, minor_name = pooled_group.split(POOLED_SEPARATOR, 1)
        major, minor = split_pooled(self.counts[pooled_group], ratio)
        counts = {g: c for g, c in self.counts.items() if g != pooled_group}
        counts[major_name] = counts.get(major_name, 0) + major
        counts[minor_name] = counts.get(minor_name, 0) + minor
        return DemographicRecord(self.year, counts, self.pooled_flags - {pooled_group})


@dataclass_json
@dataclass(frozen=True)
class SigmaInterval:
    """
    L2 说话人比例的区间估计

    Attributes:
        low: 保守估计（默认为 high 的一半）
        high: 上限（L2 群体全部算作 L2 说话人）
    """
    low: float
    high: float

    def __post_init__(self):
        require(0.0 <= self.low <= self.high <= 1.0, f"区间无效: [{self.low}, {self.high}]")

    def rounded(self, ndigits: int = 2) -> Tuple[float, float]:
        """两位小数（half-up），用于与已发表的数值比较"""
        return round_half_up(self.low, ndigits), round_half_up(self.high, ndigits)


@dataclass(frozen=True)
class PoolMapping:
    """
    L2 群体映射

    Attributes:
        l2_pool: 计入 L2 群体的组名
        pooled: 合并列 -> 拆分比例
    """
    l2_pool: FrozenSet[str]
    pooled: Dict[str, float] = field(default_factory=dict)


# ===== 加载器 =====

class DemographicsLoader:
    """人口 CSV 加载器（列：year, group, count）"""

    REQUIRED_COLUMNS = ("year", "group", "count")

    @staticmethod
    def load(filepath: Path) -> List[DemographicRecord]:
        """
        加载人口 CSV

        Args:
            filepath: CSV 路径

        Returns:
            按年份排序的 DemographicRecord 列表
        """
        try:
            df = pd.read_csv(filepath, dtype={"group": str})
        except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
            raise CalibrationError(f"无法读取人口数据 {filepath}: {e}") from e

        missing = [c for c in DemographicsLoader.REQUIRED_COLUMNS if c not in df.columns]
        if missing:
            raise CalibrationError(f"{filepath} 缺少列: {missing}")
        if df.empty:
            raise CalibrationError(f"{filepath} 没有数据行")
        if df[["year", "count"]].isna().any().any():
            raise CalibrationError(f"{filepath} 存在空的 year 或 count")

        records = []
        for year, rows in df.groupby("year", sort=True):
            counts = {}
            for group, count in zip(rows["group"], rows["count"]):
                group = str(group).strip()
                if group in counts:
                    raise CalibrationError(f"{year} 年的 {group} 重复出现")
                if float(count) != int(count):
                    raise CalibrationError(f"{year} 年 {group} 人数不是整数: {count}")
                counts[group] = int(count)
            pooled = frozenset(g for g in counts if POOLED_SEPARATOR in g)
            records.append(DemographicRecord(int(year), counts, pooled))

        console.success(f"加载人口数据: {Path(filepath).name}")
        console.info(f"  年份: {len(records)}")
        return records


class PoolMappingLoader:
    """
    L2 群体映射加载器

    格式：
        [l2_pool] 下每行一个组名
        [pooled]  下每行 group_a+group_b,ratio
        # 开头为注释
    """

    @staticmethod
    def load(filepath: Path) -> PoolMapping:
        try:
            lines = Path(filepath).read_text(encoding="utf-8").splitlines()
        except OSError as e:
            raise CalibrationError(f"无法读取群体映射 {filepath}: {e}") from e

        section = None
        pool, pooled = [], {}
        for lineno, raw in enumerate(lines, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if line.startswith("[") and line.endswith("]"):
                section = line[1:-1].strip()
                if section not in ("l2_pool", "pooled"):
                    raise CalibrationError(f"{filepath}:{lineno} 未知小节 [{section}]")
                continue
            if section == "l2_pool":
                pool.append(line)
            elif section == "pooled":
                name, sep, ratio = line.rpartition(",")
                if not sep or POOLED_SEPARATOR not in name:
                    raise CalibrationError(f"{filepath}:{lineno} 格式应为 group_a+group_b,ratio: {line}")
                try:
                    value = float(ratio)
                except ValueError as e:
                    raise CalibrationError(f"{filepath}:{lineno} 比例不是数字: {ratio}") from e
                if not 0.0 <= value <= 1.0:
                    raise CalibrationError(f"{filepath}:{lineno} 比例必须在 [0, 1] 内: {value}")
                pooled[name.strip()] = value
            else:
                raise CalibrationError(f"{filepath}:{lineno} 内容不在任何小节中")

        return PoolMapping(l2_pool=frozenset(pool), pooled=pooled)


def load_demographics(csv_path: Path) -> List[DemographicRecord]:
    return DemographicsLoader.load(csv_path)


def load_pool_mapping(path: Path) -> PoolMapping:
    return PoolMappingLoader.load(path)


# ===== σ 估计 =====

def split_pooled(pooled_count: int, ratio: float = CALIBRATION_DEFAULTS["pooled_ratio"]) -> Tuple[int, int]:
    """
    把合并人数按比例拆成两部分

    Returns:
        (major, minor)，major = round(ratio · pooled)（half-up），两者之和不变
    """
    require(pooled_count >= 0, f"pooled_count 不能为负: {pooled_count}")
    require(0.0 <= ratio <= 1.0, f"ratio 必须在 [0, 1] 内: {ratio}")
    major = int(round_half_up(ratio * pooled_count, 0))
    return major, pooled_count - major


def sigma_interval(record: DemographicRecord, l2_pool: Iterable[str],
                   low_fraction: float = CALIBRATION_DEFAULTS["low_fraction"]) -> SigmaInterval:
    """
    L2 说话人比例的区间

    high = L2 群体人数 / 总人数（分母包含所有群体）；low = low_fraction · high

    Args:
        record: 人口记录
        l2_pool: 计入 L2 群体的组名；记录中没有的组按 0 计
        low_fraction: 保守估计的比例

    Returns:
        SigmaInterval
    """
    require(0.0 <= low_fraction <= 1.0, f"low_fraction 必须在 [0, 1] 内: {low_fraction}")
    total = record.total
    if total == 0:
        raise CalibrationError(f"{record.year} 年总人数为 0")
    pool = sum(record.counts.get(group, 0) for group in set(l2_pool))
    high = pool / total
    return SigmaInterval(low=low_fraction * high, high=high)


def required_imports(net_growth: float, natural_growth: float) -> float:
    """维持净增长所需的年输入量 = 净增长 - 自然增长"""
    return net_growth - natural_growth


def sigma_table(records: List[DemographicRecord], mapping: PoolMapping,
                low_fraction: float = CALIBRATION_DEFAULTS["low_fraction"]) -> pd.DataFrame:
    """
    逐年的 σ 区间表（先拆分合并列）

    Returns:
        DataFrame：year, total, l2_count, sigma_low, sigma_high, low_rounded, high_rounded

    Raises:
        CalibrationError: 记录为空，或 L2 群体中有组从未出现
    """
    if not records:
        raise CalibrationError("人口记录为空")

    expanded = []
    for record in records:
        for pooled_group, ratio in mapping.pooled.items():
            record = record.split(pooled_group, ratio)
        expanded.append(record)

    seen = set().union(*(r.counts for r in expanded))
    unknown = sorted(mapping.l2_pool - seen)
    if unknown:
        raise CalibrationError(f"L2 群体中的组在数据中不存在: {unknown}")

    rows = []
    for record in expanded:
        interval = sigma_interval(record, mapping.l2_pool, low_fraction)
        low_r, high_r = interval.rounded()
        rows.append({
            "year": record.year,
            "total": record.total,
            "l2_count": sum(record.counts.get(g, 0) for g in mapping.l2_pool),
            "sigma_low": interval.low,
            "sigma_high": interval.high,
            "low_rounded": low_r,
            "high_rounded": high_r,
        })
    return pd.DataFrame(rows)

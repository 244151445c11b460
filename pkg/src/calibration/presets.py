"""
案例预设
两个接触情形的语法优势和逐年 σ 区间
"""
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Tuple

from src.config import CAPE_CSV_PATH, CAPE_POOL_PATH, LIMA_CSV_PATH, LIMA_POOL_PATH
from src.core.environment import GrammarAdvantages
from src.calibration.demographics import (
    SigmaInterval, load_demographics, load_pool_mapping, sigma_table,
)
from src.dynamics.stability import sigma_crit_bounds


@dataclass(frozen=True)
class CasePreset:
    """
    案例预设

    Attributes:
        name: 预设名
        advantages: 语法优势
        sigma_intervals: (年份, σ 区间) 列表
        notes: 说明
    """
    name: str
    advantages: GrammarAdvantages
    sigma_intervals: List[Tuple[int, SigmaInterval]] = field(default_factory=list)
    notes: str = ""

    @property
    def alpha(self) -> float:
        return self.advantages.alpha

    @property
    def sigma_crit_lower(self) -> float:
        """D -> ∞ 时 σ_crit 的下界 (α-1)/α，α <= 1 时为 0"""
        return max(sigma_crit_bounds(self.alpha)[0], 0.0)

    @property
    def sigma_crit_upper_d1(self) -> float:
        """D = 1 时的 σ_crit，2(α-1)/α"""
        return max(sigma_crit_bounds(self.alpha)[1], 0.0)

    @property
    def max_sigma(self) -> float:
        """所有年份中 σ 的最大上限"""
        return max((interval.high for _, interval in self.sigma_intervals), default=0.0)

    def to_row(self) -> dict:
        return {
            "name": self.name,
            "alpha1": self.advantages.alpha1,
            "alpha2": self.advantages.alpha2,
            "alpha": self.alpha,
            "sigma_crit_lower": self.sigma_crit_lower,
            "sigma_crit_upper_d1": self.sigma_crit_upper_d1,
            "max_sigma": self.max_sigma,
            "years": len(self.sigma_intervals),
            "notes": self.notes,
        }


def _intervals(csv_path: Path, pool_path: Path) -> List[Tuple[int, SigmaInterval]]:
    table = sigma_table(load_demographics(csv_path), load_pool_mapping(pool_path))
    return [(int(row.year), SigmaInterval(low=row.sigma_low, high=row.sigma_high))
            for row in table.itertuples(index=False)]


def case_presets(cape_csv: Path = CAPE_CSV_PATH, cape_pool: Path = CAPE_POOL_PATH,
                 lima_csv: Path = LIMA_CSV_PATH, lima_pool: Path = LIMA_POOL_PATH) -> List[CasePreset]:
    """
    两个预设：

    afrikaans      α1 = α2 = 1（最简假设 α = 1），σ 取开普殖民地数据
    afro_peruvian  α1 = 0.7，α2 = 0.05（α = 14），σ 取利马数据
    """
    return [
        CasePreset(
            name="afrikaans",
            advantages=GrammarAdvantages(1.0, 1.0),
            sigma_intervals=_intervals(cape_csv, cape_pool),
            notes="动词屈折脱落；α = 1 时 D = d",
        ),
        CasePreset(
            name="afro_peruvian",
            advantages=GrammarAdvantages(0.7, 0.05),
            sigma_intervals=_intervals(lima_csv, lima_pool),
            notes="空主语；σ_crit 至少约 0.93",
        ),
    ]

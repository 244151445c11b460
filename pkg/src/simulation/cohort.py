"""
代际模拟
每代学习者从上一代随机抽两个父母作为输入来源，并与确定性映射的轨迹对照
"""
import math
from dataclasses import dataclass

import numpy as np
import pandas as pd
from dataclasses_json import dataclass_json

from src.config import COHORT_DEFAULTS, DEFAULT_SEED
from src.core.environment import GrammarAdvantages, PopulationState, reduce_params
from src.core.errors import require
from src.dynamics.generational_map import iterate
from src.simulation.engine import (
    assign_kinds, derive_stream, layout_stream, simulate_learners,
)
from src.utils import console

COHORT_COLUMNS = ["generation", "kind", "learner_id", "terminal_prob"]
DETERMINISTIC_COLUMNS = ["generation", "p_det", "q_det"]
SUMMARY_COLUMNS = ["generation", "kind", "median", "q1", "q3"]


@dataclass_json
@dataclass(frozen=True)
class CohortConfig:
    """
    代际模拟配置

    Attributes:
        n_learners: 每代学习者数
        l2_fraction: L2 学习者比例
        tokens_per_learner: 每人处理的句子数
        n_generations: 模拟代数（不含第 0 代）
        parents_per_learner: 父母数，固定为 2
        master_seed: 主种子
        initial_prob: 第 0 代所有人的 prob
    """
    n_learners: int = COHORT_DEFAULTS["n_learners"]
    l2_fraction: float = COHORT_DEFAULTS["l2_fraction"]
    tokens_per_learner: int = COHORT_DEFAULTS["tokens"]
    n_generations: int = COHORT_DEFAULTS["n_generations"]
    parents_per_learner: int = COHORT_DEFAULTS["parents_per_learner"]
    master_seed: int = DEFAULT_SEED
    initial_prob: float = COHORT_DEFAULTS["initial_prob"]

    def __post_init__(self):
        require(self.n_learners >= 1, f"n_learners 至少为 1: {self.n_learners}")
        require(0.0 <= self.l2_fraction <= 1.0, f"l2_fraction 必须在 [0, 1] 内: {self.l2_fraction}")
        require(self.tokens_per_learner >= 0, f"tokens_per_learner 不能为负: {self.tokens_per_learner}")
        require(self.n_generations >= 0, f"n_generations 不能为负: {self.n_generations}")
        require(self.parents_per_learner == 2, f"parents_per_learner 固定为 2: {self.parents_per_learner}")
        require(self.master_seed >= 0, f"master_seed 不能为负: {self.master_seed}")
        require(0.0 <= self.initial_prob <= 1.0, f"initial_prob 必须在 [0, 1] 内: {self.initial_prob}")

    @property
    def realized_sigma(self) -> float:
        """每代实际的 L2 比例 ⌊n·l2_fraction⌋ / n"""
        return math.floor(self.n_learners * self.l2_fraction) / self.n_learners


@dataclass
class CohortResult:
    """
    代际模拟结果

    Attributes:
        learners: generation, kind, learner_id, terminal_prob
        deterministic: generation, p_det, q_det
    """
    learners: pd.DataFrame
    deterministic: pd.DataFrame

    def summary(self) -> pd.DataFrame:
        """每代每类学习者的中位数和四分位数"""
        grouped = self.learners.groupby(["generation", "kind"], sort=True)["terminal_prob"]
        frame = pd.DataFrame({
            "median": grouped.median(),
            "q1": grouped.quantile(0.25),
            "q3": grouped.quantile(0.75),
        }).reset_index()
        return frame[SUMMARY_COLUMNS]


def simulate_cohorts(config: CohortConfig, adv: GrammarAdvantages, d: float,
                     gamma: float) -> CohortResult:
    """
    多代模拟

    第 0 代所有人 prob = initial_prob；之后每代每个学习者
    用 derive_stream(seed, generation, i) 依次抽两个父母（有放回）、
    [0,1] 上均匀的初始 prob、以及全部输入

    Args:
        config: 模拟配置
        adv: 语法优势
        d: L2 难度比
        gamma: 学习率

    Returns:
        CohortResult（含同一 (α, D, σ) 下确定性映射的轨迹）
    """
    n = config.n_learners
    rows = []

    kinds = assign_kinds(n, config.l2_fraction, layout_stream(config.master_seed, 0))
    terminal = np.full(n, config.initial_prob)
    rows.extend(_generation_rows(0, kinds, terminal))

    generations = range(1, config.n_generations + 1)
    for generation in console.progress(generations, desc=f"代际模拟 γ={gamma}", unit="代"):
        kinds = assign_kinds(n, config.l2_fraction, layout_stream(config.master_seed, generation))
        streams = [derive_stream(config.master_seed, generation, i) for i in range(n)]
        parents = np.array([s.integers(0, n, size=config.parents_per_learner) for s in streams])
        initial = [float(s.random()) for s in streams]
        # 上一代的终值冻结后才开始本代
        result = simulate_learners(initial, kinds, terminal[parents], adv, gamma, d,
                                   config.tokens_per_learner, streams,
                                   record_every=max(config.tokens_per_learner, 1))
        terminal = result.terminal.copy()
        rows.extend(_generation_rows(generation, kinds, terminal))
        console.debug(f"第 {generation} 代: 中位数 {np.median(terminal):.4f}")

    learners = pd.DataFrame(rows, columns=COHORT_COLUMNS)
    return CohortResult(learners=learners,
                        deterministic=deterministic_overlay(config, adv, d))


def deterministic_overlay(config: CohortConfig, adv: GrammarAdvantages, d: float) -> pd.DataFrame:
    """同一 (α, D, σ) 下确定性映射从 (initial, initial) 出发的轨迹"""
    params = reduce_params(adv, d, config.realized_sigma)
    start = PopulationState(config.initial_prob, config.initial_prob)
    trajectory = iterate(start, params, config.n_generations)
    return pd.DataFrame({
        "generation": np.arange(len(trajectory)),
        "p_det": [s.p for s in trajectory],
        "q_det": [s.q for s in trajectory],
    }, columns=DETERMINISTIC_COLUMNS)


def _generation_rows(generation: int, kinds, terminal: np.ndarray):
    return [{"generation": generation, "kind": kind.value, "learner_id": i,
             "terminal_prob": float(prob)}
            for i, (kind, prob) in enumerate(zip(kinds, terminal))]

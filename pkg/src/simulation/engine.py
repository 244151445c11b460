"""
批量学习者模拟
多个相互独立的学习者同时处理输入流，每个学习者使用自己的随机数流
"""
import math
from dataclasses import dataclass
from typing import List, Sequence

import numpy as np
import pandas as pd

from src.config import LEARNING_DEFAULTS
from src.core.environment import GrammarAdvantages
from src.core.errors import require
from src.core.learning import LearningRates
from src.simulation.learner import LearnerKind, SourceMix
from src.utils.math_utils import clamp_probabilities

# 每个学习者每次预取的句子数
BLOCK_TOKENS = 4096

# 每句消耗的均匀数：选择、说话人、说话人语法、是否区分性
UNIFORMS_PER_TOKEN = 4

LEARNER_COLUMNS = ["learner_id", "kind", "iteration", "prob"]


def derive_stream(master_seed: int, generation: int, learner_index: int) -> np.random.Generator:
    """
    每个学习者独立的随机数流

    熵元组 (master_seed, generation, learner_index) 交给 SeedSequence，
    与执行顺序和并行方式无关
    """
    require(master_seed >= 0 and generation >= 0 and learner_index >= 0,
            f"种子分量不能为负: ({master_seed}, {generation}, {learner_index})")
    return np.random.default_rng(np.random.SeedSequence([master_seed, generation, learner_index]))


def layout_stream(master_seed: int, generation: int) -> np.random.Generator:
    """一代内的公共随机数流（L1/L2 位置洗牌）"""
    return np.random.default_rng(np.random.SeedSequence([master_seed, generation]))


def assign_kinds(n_learners: int, l2_fraction: float, rng: np.random.Generator) -> List[LearnerKind]:
    """恰好 ⌊n·l2_fraction⌋ 个 L2 学习者，位置随机"""
    require(n_learners >= 1, f"n_learners 至少为 1: {n_learners}")
    require(0.0 <= l2_fraction <= 1.0, f"l2_fraction 必须在 [0, 1] 内: {l2_fraction}")
    n_l2 = math.floor(n_learners * l2_fraction)
    kinds = np.array([LearnerKind.L2] * n_l2 + [LearnerKind.L1] * (n_learners - n_l2), dtype=object)
    rng.shuffle(kinds)
    return list(kinds)


@dataclass
class LearnerBatchResult:
    """
    批量模拟结果

    Attributes:
        kinds: 每个学习者的类型
        iterations: 记录点（第 0 句、每 record_every 句、最后一句）
        trajectories: (n_learners, len(iterations)) 的 prob 记录
        choice_counts: (n_learners, 2) 选择 G1 / G2 的次数
        penalty_counts: (n_learners, 2) 选择 G1 / G2 后受罚的次数
    """
    kinds: List[LearnerKind]
    iterations: np.ndarray
    trajectories: np.ndarray
    choice_counts: np.ndarray
    penalty_counts: np.ndarray

    @property
    def terminal(self) -> np.ndarray:
        return self.trajectories[:, -1]

    def terminal_of(self, kind: LearnerKind) -> np.ndarray:
        mask = np.array([k is kind for k in self.kinds], dtype=bool)
        return self.terminal[mask]

    def penalty_rates(self) -> np.ndarray:
        """经验惩罚频率（选 G1 / 选 G2 条件下），未选过的为 nan"""
        with np.errstate(invalid="ignore", divide="ignore"):
            return self.penalty_counts / self.choice_counts

    def to_frame(self) -> pd.DataFrame:
        """长格式表：learner_id, kind, iteration, prob"""
        n, m = self.trajectories.shape
        return pd.DataFrame({
            "learner_id": np.repeat(np.arange(n), m),
            "kind": np.repeat([k.value for k in self.kinds], m),
            "iteration": np.tile(self.iterations, n),
            "prob": self.trajectories.reshape(-1),
        }, columns=LEARNER_COLUMNS)


def record_points(n_tokens: int, record_every: int) -> np.ndarray:
    """记录点：0, k, 2k, ...，以及最后一句"""
    require(record_every >= 1, f"record_every 至少为 1: {record_every}")
    points = np.arange(0, n_tokens + 1, record_every)
    if points[-1] != n_tokens:
        points = np.append(points, n_tokens)
    return points


def simulate_learners(initial_probs: Sequence[float], kinds: Sequence[LearnerKind],
                      source_probs: np.ndarray, adv: GrammarAdvantages,
                      gamma: float, d: float, n_tokens: int,
                      streams: Sequence[np.random.Generator],
                      record_every: int = LEARNING_DEFAULTS["record_every"]) -> LearnerBatchResult:
    """
    批量模拟

    Args:
        initial_probs: 每个学习者的初始 prob
        kinds: 每个学习者的类型（L2 取 δ = dγ）
        source_probs: (n_learners, k) 每个学习者的 k 个说话人的 G1 概率，说话人均匀选取
        adv: 语法优势
        gamma: 学习率
        d: L2 难度比
        n_tokens: 每人处理的句子数
        streams: 每个学习者的随机数流
        record_every: 记录间隔

    Returns:
        LearnerBatchResult
    """
    n = len(kinds)
    require(n >= 1, "至少需要一个学习者")
    require(len(initial_probs) == n and len(streams) == n, "学习者参数长度不一致")
    require(n_tokens >= 0, f"n_tokens 不能为负: {n_tokens}")
    source_probs = np.asarray(source_probs, dtype=np.float64)
    require(source_probs.ndim == 2 and source_probs.shape[0] == n, f"source_probs 形状错误: {source_probs.shape}")
    require(np.all((source_probs >= 0.0) & (source_probs <= 1.0)), "说话人概率必须在 [0, 1] 内")

    rates = {kind: LearningRates.from_ratio(gamma, 0.0 if kind is LearnerKind.L1 else d)
             for kind in LearnerKind}
    slope = np.array([rates[k].slope for k in kinds])
    prob = clamp_probabilities(np.asarray(initial_probs, dtype=np.float64))
    n_speakers = source_probs.shape[1]
    rows = np.arange(n)[:, None]

    points = record_points(n_tokens, record_every)
    trajectories = np.empty((n, points.size))
    trajectories[:, 0] = prob
    next_record = 1
    choice_counts = np.zeros((n, 2), dtype=np.int64)
    penalty_counts = np.zeros((n, 2), dtype=np.int64)

    done = 0
    while done < n_tokens:
        size = min(BLOCK_TOKENS, n_tokens - done)
        # (n, size, 4)，分块预取不改变每条流的序列
        u = np.stack([s.random((size, UNIFORMS_PER_TOKEN)) for s in streams])

        # 与 prob 无关的部分整块计算
        speaker = np.minimum((u[:, :, 1] * n_speakers).astype(np.int64), n_speakers - 1)
        speaker_prob = source_probs[rows, speaker]
        source_g1 = u[:, :, 2] < speaker_prob
        distinctive = u[:, :, 3] < np.where(source_g1, adv.alpha1, adv.alpha2)
        # 选 G1 时遇到 G2 区分句受罚，选 G2 时遇到 G1 区分句受罚
        hits_g1 = (distinctive & ~source_g1).T
        hits_g2 = (distinctive & source_g1).T
        u_choice = u[:, :, 0].T
        chose_g1 = np.empty((size, n), dtype=bool)
        penalized = np.empty((size, n), dtype=bool)

        for t in range(size):
            choose = u_choice[t] < prob
            penalty = np.where(choose, hits_g1[t], hits_g2[t])
            prob = slope * prob + gamma * (choose != penalty)
            chose_g1[t] = choose
            penalized[t] = penalty
            step = done + t + 1
            if next_record < points.size and step == points[next_record]:
                trajectories[:, next_record] = clamp_probabilities(prob)
                next_record += 1

        choice_counts[:, 0] += chose_g1.sum(axis=0)
        choice_counts[:, 1] += size - chose_g1.sum(axis=0)
        penalty_counts[:, 0] += (penalized & chose_g1).sum(axis=0)
        penalty_counts[:, 1] += (penalized & ~chose_g1).sum(axis=0)
        done += size

    return LearnerBatchResult(kinds=list(kinds), iterations=points, trajectories=trajectories,
                              choice_counts=choice_counts, penalty_counts=penalty_counts)


def simulate_learner(env_spec: SourceMix, rates: LearningRates, n_tokens: int, seed: int,
                     adv: GrammarAdvantages, initial_prob: float = 0.5,
                     record_every: int = LEARNING_DEFAULTS["record_every"]) -> np.ndarray:
    """
    单个学习者在固定环境中的轨迹

    Args:
        env_spec: 说话人构成（说话人均匀选取）
        rates: 学习率（δ = 0 即 L1）
        n_tokens: 句子数
        seed: 种子
        adv: 语法优势
        initial_prob: 初始 prob
        record_every: 记录间隔

    Returns:
        每 record_every 句记录一次的 prob
    """
    require(env_spec.weights is None, "批量引擎只支持均匀选取说话人")
    kind = LearnerKind.L1 if rates.is_l1 else LearnerKind.L2
    result = simulate_learners([initial_prob], [kind], np.array([env_spec.speaker_probs]), adv,
                               rates.gamma, rates.d, n_tokens, [derive_stream(seed, 0, 0)],
                               record_every)
    return result.trajectories[0]


def run_fixed_environment(n_learners: int, l2_fraction: float, freq_g1: float,
                          adv: GrammarAdvantages, gamma: float, d: float, n_tokens: int,
                          seed: int, record_every: int = LEARNING_DEFAULTS["record_every"]) -> LearnerBatchResult:
    """
    固定环境下的一组学习者：L1/L2 按比例分配，初始 prob 在 [0,1] 上均匀抽取

    第 i 个学习者用 derive_stream(seed, 0, i)，先抽初始值再抽输入
    """
    require(0.0 <= freq_g1 <= 1.0, f"freq_g1 必须在 [0, 1] 内: {freq_g1}")
    kinds = assign_kinds(n_learners, l2_fraction, layout_stream(seed, 0))
    streams = [derive_stream(seed, 0, i) for i in range(n_learners)]
    initial = [float(s.random()) for s in streams]
    source = np.full((n_learners, 1), freq_g1)
    return simulate_learners(initial, kinds, source, adv, gamma, d, n_tokens, streams, record_every)

"""
学习者与输入
单个学习者、输入句（token）、说话人构成，以及逐句的奖惩更新
"""
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional, Sequence, Tuple

import numpy as np

from src.core.environment import GrammarAdvantages
from src.core.errors import require
from src.core.learning import Grammar, LearningRates, Response, apply_operator


class LearnerKind(str, Enum):
    """学习者类型"""
    L1 = "L1"
    L2 = "L2"


@dataclass(frozen=True)
class Learner:
    """
    学习者

    Attributes:
        kind: L1 或 L2
        prob: 当前选择 G1 的概率
        rates: 学习率；L1 必须 δ = 0，L2 必须 δ > 0
    """
    kind: LearnerKind
    prob: float
    rates: LearningRates

    def __post_init__(self):
        require(0.0 <= self.prob <= 1.0, f"prob 必须在 [0, 1] 内: {self.prob}")
        if self.kind is LearnerKind.L1:
            require(self.rates.delta == 0.0, f"L1 学习者 delta 必须为 0: {self.rates.delta}")
        else:
            require(self.rates.delta > 0.0, f"L2 学习者 delta 必须为正: {self.rates.delta}")

    @classmethod
    def create(cls, kind: LearnerKind, prob: float, gamma: float, d: float) -> 'Learner':
        """按类型构造：L1 取 δ = 0，L2 取 δ = dγ"""
        delta_ratio = 0.0 if kind is LearnerKind.L1 else d
        return cls(kind=kind, prob=prob, rates=LearningRates.from_ratio(gamma, delta_ratio))


@dataclass(frozen=True)
class Token:
    """
    一句输入

    Attributes:
        source_grammar: 说话人用来产出这句话的语法
        distinctive: 是否与另一种语法不兼容
    """
    source_grammar: Grammar
    distinctive: bool


@dataclass(frozen=True)
class SourceMix:
    """
    说话人构成

    Attributes:
        speaker_probs: 每个说话人选择 G1 的概率
        weights: 每个说话人被选中的概率（默认均匀）
    """
    speaker_probs: Tuple[float, ...]
    weights: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        require(len(self.speaker_probs) > 0, "至少需要一个说话人")
        require(all(0.0 <= p <= 1.0 for p in self.speaker_probs), "说话人概率必须在 [0, 1] 内")
        if self.weights is not None:
            require(len(self.weights) == len(self.speaker_probs), "weights 与说话人数量不一致")
            require(all(w >= 0.0 for w in self.weights) and abs(sum(self.weights) - 1.0) <= 1e-12,
                    f"weights 必须是概率分布: {self.weights}")

    @classmethod
    def fixed(cls, freq_g1: float) -> 'SourceMix':
        """单一说话人池，G1 频率固定"""
        return cls(speaker_probs=(freq_g1,))

    @classmethod
    def parents(cls, parent_probs: Sequence[float]) -> 'SourceMix':
        """若干父母，均匀选取"""
        return cls(speaker_probs=tuple(float(p) for p in parent_probs))

    def cumulative(self) -> np.ndarray:
        n = len(self.speaker_probs)
        weights = self.weights if self.weights is not None else (1.0 / n,) * n
        return np.cumsum(weights)


def sample_token(source_mix: SourceMix, adv: GrammarAdvantages,
                 rng: np.random.Generator) -> Token:
    """
    抽一句输入：先选说话人，再按其概率选语法，再按该语法的优势决定是否区分性

    Args:
        source_mix: 说话人构成
        adv: 语法优势
        rng: 随机数生成器（消耗 3 个均匀数）
    """
    u_speaker, u_grammar, u_distinct = rng.random(3)
    cumulative = source_mix.cumulative()
    index = min(int(np.searchsorted(cumulative, u_speaker, side="right")), len(cumulative) - 1)
    grammar = Grammar.G1 if u_grammar < source_mix.speaker_probs[index] else Grammar.G2
    return Token(source_grammar=grammar, distinctive=bool(u_distinct < adv.of(grammar)))


def is_penalized(chosen: Grammar, token: Token) -> bool:
    """所选语法无法解析另一种语法的区分性句子时受罚"""
    return token.distinctive and token.source_grammar != chosen


def learn_step(learner: Learner, token: Token, rng: np.random.Generator) -> Learner:
    """
    处理一句输入

    学习者以 prob 选 G1；能解析则奖励所选语法，否则惩罚（消耗 1 个均匀数）

    Returns:
        更新 prob 后的学习者
    """
    chosen = Grammar.G1 if rng.random() < learner.prob else Grammar.G2
    response = Response.PENALTY if is_penalized(chosen, token) else Response.REWARD
    return replace(learner, prob=apply_operator(learner.prob, chosen, response, learner.rates))

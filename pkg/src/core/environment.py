"""
学习环境
由种群状态和说话人构成求出两种语法的惩罚概率，并完成 (α1, α2, d) -> (α, D) 的约化
"""
from dataclasses import dataclass
from typing import Tuple

from dataclasses_json import dataclass_json

from src.core.errors import DegenerateAdvantageError, require
from src.core.learning import Environment2x2


@dataclass(frozen=True)
class GrammarAdvantages:
    """
    语法优势

    Attributes:
        alpha1: G1 产出中与 G2 不兼容的比例
        alpha2: G2 产出中与 G1 不兼容的比例

    Note:
        允许取 0（此时没有区分性输入），但 α2 = 0 时优势比 α 无定义
    """
    alpha1: float
    alpha2: float

    def __post_init__(self):
        require(0.0 <= self.alpha1 <= 1.0, f"alpha1 必须在 [0, 1] 内: {self.alpha1}")
        require(0.0 <= self.alpha2 <= 1.0, f"alpha2 必须在 [0, 1] 内: {self.alpha2}")

    @property
    def alpha(self) -> float:
        """优势比 α = α1/α2"""
        if self.alpha2 == 0.0:
            raise DegenerateAdvantageError("alpha2 = 0，优势比无定义")
        return self.alpha1 / self.alpha2

    def of(self, grammar_index: int) -> float:
        """按语法编号（1 或 2）取优势"""
        return self.alpha1 if grammar_index == 1 else self.alpha2


@dataclass(frozen=True)
class PopulationState:
    """
    种群状态

    Attributes:
        p: L1 说话人中 G1 的概率
        q: L2 说话人中 G1 的概率
    """
    p: float
    q: float

    def __post_init__(self):
        require(0.0 <= self.p <= 1.0 and 0.0 <= self.q <= 1.0,
                f"状态必须在 [0,1]² 内: ({self.p}, {self.q})")

    def as_tuple(self) -> Tuple[float, float]:
        return self.p, self.q

    def distance(self, other: 'PopulationState') -> float:
        """上确界范数距离"""
        return max(abs(self.p - other.p), abs(self.q - other.q))

    def __repr__(self) -> str:
        return f"PopulationState(p={self.p:.6g}, q={self.q:.6g})"


@dataclass_json
@dataclass(frozen=True)
class ModelParams:
    """
    约化后的模型参数

    Attributes:
        alpha: 优势比 α1/α2
        D: 按 α2 缩放的 L2 难度 d/α2
        sigma: L2 说话人比例
    """
    alpha: float
    D: float
    sigma: float

    def __post_init__(self):
        require(self.alpha > 0.0, f"alpha 必须为正: {self.alpha}")
        require(self.D >= 0.0, f"D 不能为负: {self.D}")
        require(0.0 <= self.sigma <= 1.0, f"sigma 必须在 [0, 1] 内: {self.sigma}")

    def with_sigma(self, sigma: float) -> 'ModelParams':
        return ModelParams(alpha=self.alpha, D=self.D, sigma=sigma)


def penalty_probabilities(state: PopulationState, sigma: float,
                          adv: GrammarAdvantages) -> Tuple[float, float]:
    """
    两种语法的惩罚概率

    π1 = (1-σ) α2 (1-p) + σ α2 (1-q)
    π2 = (1-σ) α1 p + σ α1 q

    Args:
        state: 种群状态 (p, q)
        sigma: L2 说话人比例
        adv: 语法优势

    Returns:
        (pi1, pi2)
    """
    require(0.0 <= sigma <= 1.0, f"sigma 必须在 [0, 1] 内: {sigma}")
    g2_share = (1.0 - sigma) * (1.0 - state.p) + sigma * (1.0 - state.q)
    g1_share = (1.0 - sigma) * state.p + sigma * state.q
    return adv.alpha2 * g2_share, adv.alpha1 * g1_share


def learning_environment(state: PopulationState, sigma: float,
                         adv: GrammarAdvantages) -> Environment2x2:
    """把惩罚概率包装成学习环境"""
    pi1, pi2 = penalty_probabilities(state, sigma, adv)
    return Environment2x2.from_penalties(pi1, pi2)


def reduce_params(adv: GrammarAdvantages, d: float, sigma: float) -> ModelParams:
    """
    (α1, α2, d, σ) -> (α, D, σ)，分子分母同除以 α2

    下游动力学只接受 ModelParams，避免重复缩放

    Raises:
        DegenerateAdvantageError: α2 = 0
    """
    require(d >= 0.0, f"d 不能为负: {d}")
    if adv.alpha2 == 0.0:
        raise DegenerateAdvantageError("alpha2 = 0，无法约化参数")
    return ModelParams(alpha=adv.alpha, D=d / adv.alpha2, sigma=sigma)

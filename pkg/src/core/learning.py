"""
线性奖惩学习
一维 Bush–Mosteller 线性奖惩算法、带 L2 难度偏置的扩展，以及矩的闭式解
"""
import math
from dataclasses import dataclass
from enum import IntEnum
from typing import Sequence, Tuple

from scipy.special import comb

from src.core.errors import (
    ContractionViolationError,
    UnsupportedConfigurationError, require,
)
from src.utils.math_utils import clamp_probability

# 行和允许的浮点误差
_ROW_SUM_TOLERANCE = 1e-12


class Grammar(IntEnum):
    """语法（学习者的两个动作）"""
    G1 = 1
    G2 = 2


class Response(IntEnum):
    """环境反馈"""
    REWARD = 1
    PENALTY = 2


# ===== 参数类型 =====

@dataclass(frozen=True)
class LearningRates:
    """
    学习率

    Attributes:
        gamma: 概率增量 γ，0 < γ < 1
        delta: L2 难度偏置 δ，0 <= δ <= 1 - γ；δ = 0 即 L1 学习者
    """
    gamma: float
    delta: float = 0.0

    def __post_init__(self):
        require(0.0 < self.gamma < 1.0, f"gamma 必须在 (0, 1) 内: {self.gamma}")
        require(0.0 <= self.delta <= 1.0 - self.gamma,
                f"delta 必须在 [0, 1 - gamma] 内: delta={self.delta}, gamma={self.gamma}")

    @classmethod
    def from_ratio(cls, gamma: float, d: float) -> 'LearningRates':
        """由 (γ, d) 构造，δ = dγ"""
        require(d >= 0.0, f"d 不能为负: {d}")
        return cls(gamma=gamma, delta=d * gamma)

    @property
    def d(self) -> float:
        """无量纲难度比 d = δ/γ"""
        return self.delta / self.gamma

    @property
    def slope(self) -> float:
        """四个仿射算子的公共斜率 a = 1 - γ - δ"""
        return 1.0 - self.gamma - self.delta

    @property
    def is_l1(self) -> bool:
        return self.delta == 0.0


@dataclass(frozen=True)
class OperatorSet:
    """
    仿射算子组 f_ij(p) = a_ij p + b_ij

    Attributes:
        slopes: a_ij，行为所选语法 i，列为反馈 j
        intercepts: b_ij
    """
    slopes: Tuple[Tuple[float, float], Tuple[float, float]]
    intercepts: Tuple[Tuple[float, float], Tuple[float, float]]

    @classmethod
    def from_rates(cls, rates: LearningRates) -> 'OperatorSet':
        """
        线性奖惩算子（含 L2 扩展）

        a_ij = 1 - γ - δ；b_11 = b_22 = γ；b_12 = b_21 = 0
        """
        a = rates.slope
        g = rates.gamma
        return cls(slopes=((a, a), (a, a)), intercepts=((g, 0.0), (0.0, g)))

    @property
    def has_equal_slopes(self) -> bool:
        flat = [s for row in self.slopes for s in row]
        return all(s == flat[0] for s in flat)

    @property
    def a(self) -> float:
        """公共斜率；斜率不一致时没有定义"""
        if not self.has_equal_slopes:
            raise UnsupportedConfigurationError(f"算子斜率不一致: {self.slopes}")
        return self.slopes[0][0]

    def b(self, chosen: Grammar, response: Response) -> float:
        return self.intercepts[chosen - 1][response - 1]

    def apply(self, p: float, chosen: Grammar, response: Response) -> float:
        i, j = chosen - 1, response - 1
        return self.slopes[i][j] * p + self.intercepts[i][j]


@dataclass(frozen=True)
class Environment2x2:
    """
    平稳随机环境

    Attributes:
        omega: ω_ij = 动作 i 之后出现反馈 j 的概率；每行和为 1
    """
    omega: Tuple[Tuple[float, float], Tuple[float, float]]

    def __post_init__(self):
        for i, row in enumerate(self.omega, 1):
            require(all(0.0 <= w <= 1.0 for w in row), f"omega 第 {i} 行越界: {row}")
            require(abs(sum(row) - 1.0) <= _ROW_SUM_TOLERANCE, f"omega 第 {i} 行和不为 1: {row}")

    @classmethod
    def from_penalties(cls, pi1: float, pi2: float) -> 'Environment2x2':
        """由两个惩罚概率构造：ω_i1 = 1 - π_i，ω_i2 = π_i"""
        return cls(omega=((1.0 - pi1, pi1), (1.0 - pi2, pi2)))

    @property
    def pi1(self) -> float:
        """G1 的惩罚概率 ω_12"""
        return self.omega[0][1]

    @property
    def pi2(self) -> float:
        """G2 的惩罚概率 ω_22"""
        return self.omega[1][1]

    @property
    def is_interior(self) -> bool:
        """0 < ω_ii < 1，闭式矩结果的前提"""
        return 0.0 < self.omega[0][0] < 1.0 and 0.0 < self.omega[1][1] < 1.0


# ===== 矩常数 =====

@dataclass(frozen=True)
class OperatorAverages:
    """
    按环境概率加权的算子系数平均值（i = 1, 2）

    a_bar[i] = Σ_j a_ij ω_ij，b_bar 同理；aa_bar / bb_bar 为平方的加权平均；
    ab_bar[i] = Σ_j a_ij b_ij ω_ij
    """
    a_bar: Tuple[float, float]
    b_bar: Tuple[float, float]
    aa_bar: Tuple[float, float]
    bb_bar: Tuple[float, float]
    ab_bar: Tuple[float, float]


@dataclass(frozen=True)
class MomentConstants:
    """
    一阶、二阶矩递推常数

    <p>_{n+1}   = C0 + C1 <p>_n
    <p²>_{n+1}  = D0 + D1 <p²>_n + D2 <p>_n
                = E0 + D1 <p²>_n + E1 C1^n
    """
    C0: float
    C1: float
    D0: float
    D1: float
    D2: float
    E0: float
    E1: float

    @property
    def mean_limit(self) -> float:
        return self.C0 / (1.0 - self.C1)

    @property
    def second_moment_limit(self) -> float:
        return self.E0 / (1.0 - self.D1)


def operator_averages(ops: OperatorSet, env: Environment2x2) -> OperatorAverages:
    """计算各动作下算子系数的加权平均"""
    def avg(fn):
        return tuple(
            sum(fn(ops.slopes[i][j], ops.intercepts[i][j]) * env.omega[i][j] for j in range(2))
            for i in range(2)
        )

    return OperatorAverages(
        a_bar=avg(lambda a, b: a),
        b_bar=avg(lambda a, b: b),
        aa_bar=avg(lambda a, b: a * a),
        bb_bar=avg(lambda a, b: b * b),
        ab_bar=avg(lambda a, b: a * b),
    )


def moment_constants(env: Environment2x2, rates: LearningRates, p0: float = 0.0) -> MomentConstants:
    """
    计算矩递推常数

    Args:
        env: 学习环境
        rates: 学习率
        p0: 初始均值 <p>_0，只影响 E1

    Returns:
        MomentConstants
    """
    avg = operator_averages(OperatorSet.from_rates(rates), env)
    C0 = avg.b_bar[1]
    C1 = avg.b_bar[0] - avg.b_bar[1] + avg.a_bar[1]
    D0 = avg.bb_bar[1]
    D1 = 2.0 * avg.ab_bar[0] - 2.0 * avg.ab_bar[1] + avg.aa_bar[1]
    D2 = avg.bb_bar[0] - avg.bb_bar[1] + 2.0 * avg.ab_bar[1]

    # C1 = 1 时均值极限无定义，E0/E1 置为 nan
    if C1 != 1.0:
        mean_limit = C0 / (1.0 - C1)
        E0 = D0 + D2 * mean_limit
        E1 = D2 * (p0 - mean_limit)
    else:
        E0 = E1 = math.nan
    return MomentConstants(C0=C0, C1=C1, D0=D0, D1=D1, D2=D2, E0=E0, E1=E1)


def _checked_constants(env: Environment2x2, rates: LearningRates, p0: float = 0.0) -> MomentConstants:
    if not env.is_interior:
        raise ContractionViolationError(f"环境不满足 0 < ω_ii < 1: {env.omega}")
    constants = moment_constants(env, rates, p0)
    if not abs(constants.C1) < 1.0:
        raise ContractionViolationError(f"|C1| = {abs(constants.C1)} >= 1")
    return constants


# ===== 运算 =====

def apply_operator(p: float, chosen: Grammar, response: Response, rates: LearningRates) -> float:
    """
    对概率 p 施加一次奖惩算子

    Args:
        p: 当前选择 G1 的概率
        chosen: 本次选用的语法
        response: 环境反馈（奖励 / 惩罚）
        rates: 学习率（δ = 0 时即经典 L1 算法）

    Returns:
        f_ij(p) = (1 - γ - δ) p + b_ij
    """
    require(0.0 <= p <= 1.0, f"p 必须在 [0, 1] 内: {p}")
    return clamp_probability(OperatorSet.from_rates(rates).apply(p, chosen, response))


def asymptotic_mean(env: Environment2x2, d: float) -> float:
    """
    无限次学习后 p 的期望值 π2 / (π1 + π2 + d)

    Args:
        env: 学习环境
        d: 难度比 δ/γ（L1 学习者为 0）
    """
    require(d >= 0.0, f"d 不能为负: {d}")
    denominator = env.pi1 + env.pi2 + d
    require(denominator > 0.0, f"π1 + π2 + d 必须为正: {denominator}")
    return env.pi2 / denominator


def mean_trajectory(p0: float, n: int, env: Environment2x2, rates: LearningRates) -> float:
    """
    n 次迭代后 p 的期望值（闭式解）

    <p>_n = C1^n <p>_0 + (1 - C1^n) <p>_∞

    Raises:
        ContractionViolationError: 环境不满足 0 < ω_ii < 1
    """
    require(0.0 <= p0 <= 1.0, f"p0 必须在 [0, 1] 内: {p0}")
    require(n >= 0, f"n 不能为负: {n}")
    constants = _checked_constants(env, rates, p0)
    decay = constants.C1 ** n
    return clamp_probability(decay * p0 + (1.0 - decay) * constants.mean_limit)


def moment_recursion(moments: Sequence[float], m: int, ops: OperatorSet,
                     env: Environment2x2) -> float:
    """
    Bush–Mosteller 矩递推：由第 n 步的各阶原点矩求第 n+1 步的 m 阶矩

    Args:
        moments: [<p^0>, <p^1>, ..., <p^m>]，<p^0> = 1
        m: 阶数
        ops: 算子组（必须斜率相同，递推才不依赖 m+1 阶矩）
        env: 学习环境

    Returns:
        <p^m>_{n+1}
    """
    require(m >= 0, f"m 不能为负: {m}")
    require(len(moments) >= m + 1, f"需要 {m + 1} 个矩，只给了 {len(moments)} 个")
    require(abs(moments[0] - 1.0) <= _ROW_SUM_TOLERANCE, f"零阶矩必须为 1: {moments[0]}")
    require(all(0.0 <= x <= 1.0 for x in moments[:m + 1]), "矩必须在 [0, 1] 内")
    if not ops.has_equal_slopes:
        raise UnsupportedConfigurationError(f"只支持等斜率算子: {ops.slopes}")

    a, b, w = ops.slopes, ops.intercepts, env.omega

    def omega_sum(i: int, k: int) -> float:
        return sum(a[i][j] ** k * b[i][j] ** (m - k) * w[i][j] for j in range(2))

    total = 0.0
    for k in range(m + 1):
        upper = omega_sum(0, k)
        lower = omega_sum(1, k)
        term = lower * moments[k]
        # k = m 时系数恒为零（等斜率）
        if k < m:
            term += (upper - lower) * moments[k + 1]
        total += comb(m, k, exact=True) * term
    return total


def variance_limit(env: Environment2x2, rates: LearningRates) -> float:
    """
    无限次学习后 p 的方差 <p²>_∞ - <p>_∞²

    Raises:
        ContractionViolationError: 一阶或二阶递推不收缩
    """
    constants = _checked_constants(env, rates)
    if not abs(constants.D1) < 1.0:
        raise ContractionViolationError(f"|D1| = {abs(constants.D1)} >= 1")
    return max(constants.second_moment_limit - constants.mean_limit ** 2, 0.0)


def second_moment_trajectory(p0: float, n: int, env: Environment2x2, rates: LearningRates) -> float:
    """
    n 次迭代后 p 的二阶原点矩，初值确定（<p²>_0 = p0²）
    """
    require(0.0 <= p0 <= 1.0, f"p0 必须在 [0, 1] 内: {p0}")
    require(n >= 0, f"n 不能为负: {n}")
    constants = _checked_constants(env, rates, p0)
    mean, second = p0, p0 * p0
    for _ in range(n):
        mean, second = (constants.C0 + constants.C1 * mean,
                        constants.D0 + constants.D1 * second + constants.D2 * mean)
    return second


def variance_trajectory(p0: float, n: int, env: Environment2x2, rates: LearningRates) -> float:
    """n 次迭代后 p 的方差"""
    mean = mean_trajectory(p0, n, env, rates)
    return max(second_moment_trajectory(p0, n, env, rates) - mean * mean, 0.0)


def contraction_factor(env: Environment2x2, rates: LearningRates) -> float:
    """均值递推的收缩系数 C1"""
    return moment_constants(env, rates).C1

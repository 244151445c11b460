"""
原点稳定性与相分类
原点处的 Jacobian、特征值、临界 L2 比例 σ_crit，以及 N_p 零倾线的几何
"""
import math
from dataclasses import dataclass
from enum import Enum
from typing import List, Tuple

import numpy as np
from dataclasses_json import dataclass_json

from src.core.environment import ModelParams, PopulationState
from src.core.errors import DegenerateConicError, require

# σ 与 σ_crit 相差在此之内视为恰好处于分岔点
CRITICAL_TOLERANCE = 1e-12


class PhaseLabel(str, Enum):
    """最终结局"""
    LOST = "Lost"
    RETAINED = "Retained"
    CRITICAL = "Critical"


class CritRegime(str, Enum):
    """σ_crit 所处的参数区域"""
    BIFURCATION = "bifurcation"
    ALWAYS_LOST = "always-lost"
    ALWAYS_RETAINED = "always-retained"
    DEGENERATE_D = "degenerate-D"


@dataclass_json
@dataclass(frozen=True)
class StabilityReport:
    """
    原点的线性稳定性

    Attributes:
        jacobian: 连续时间系统在原点的 2x2 Jacobian
        lambda_plus, lambda_minus: 两个实特征值，lambda_minus <= lambda_plus
        stable: lambda_plus < 0
        discriminant: (α+D)² - 4αDσ，恒不小于 (α-D)²
    """
    jacobian: List[List[float]]
    lambda_plus: float
    lambda_minus: float
    stable: bool
    discriminant: float


@dataclass_json
@dataclass(frozen=True)
class SigmaCrit:
    """临界 L2 比例及其区域标签"""
    value: float
    regime: CritRegime


@dataclass_json
@dataclass(frozen=True)
class NullclineGeometry:
    """
    N_p 零倾线（二次曲线）

    A_pp p² + 2 A_pq pq + A_qq q² + B_p p + B_q q + C = 0

    Attributes:
        delta: 判别式 A_pp A_qq - A_pq²
        p_c, q_c: 双曲线中心
    """
    A_pp: float
    A_pq: float
    A_qq: float
    B_p: float
    B_q: float
    C: float
    delta: float
    p_c: float
    q_c: float

    def evaluate(self, state: PopulationState) -> float:
        """二次型在 state 处的值，零即在 N_p 上"""
        p, q = state.p, state.q
        return (self.A_pp * p * p + 2.0 * self.A_pq * p * q + self.A_qq * q * q
                + self.B_p * p + self.B_q * q + self.C)


# ===== 连续时间系统 =====

def jacobian_and_eigenvalues(params: ModelParams) -> StabilityReport:
    """
    原点处的 Jacobian 和特征值

    J = [[ασ̃ - 1, ασ], [ασ̃, ασ - 1 - D]]
    λ± = (α - (D+2) ± √((α+D)² - 4αDσ)) / 2
    """
    alpha, D, sigma = params.alpha, params.D, params.sigma
    s_tilde = 1.0 - sigma
    jacobian = [[alpha * s_tilde - 1.0, alpha * sigma],
                [alpha * s_tilde, alpha * sigma - 1.0 - D]]

    discriminant = (alpha + D) ** 2 - 4.0 * alpha * D * sigma
    root = math.sqrt(max(discriminant, 0.0))
    lambda_plus = (alpha - (D + 2.0) + root) / 2.0
    lambda_minus = (alpha - (D + 2.0) - root) / 2.0
    return StabilityReport(jacobian=jacobian, lambda_plus=lambda_plus,
                           lambda_minus=lambda_minus, stable=lambda_plus < 0.0,
                           discriminant=discriminant)


def sigma_crit(alpha: float, D: float) -> SigmaCrit:
    """
    临界 L2 比例 σ_crit = (α-1)(D+1) / (αD)

    Args:
        alpha: 优势比，> 0
        D: 缩放后的 L2 难度，>= 0

    Returns:
        SigmaCrit；区域标签：
          α <= 1       -> 0，always-lost
          α >= D+2     -> 1，always-retained
          D = 0 且 1 < α < 2 -> nan，degenerate-D

    Note:
        D+1 < α < D+2 时返回值大于 1（未截断），此时 λ+(σ_crit) = 0 仍成立，
        [0,1] 内的 σ 全部落在 Retained 一侧
    """
    require(alpha > 0.0, f"alpha 必须为正: {alpha}")
    require(D >= 0.0, f"D 不能为负: {D}")
    if alpha <= 1.0:
        return SigmaCrit(0.0, CritRegime.ALWAYS_LOST)
    if alpha >= D + 2.0:
        return SigmaCrit(1.0, CritRegime.ALWAYS_RETAINED)
    if D == 0.0:
        return SigmaCrit(math.nan, CritRegime.DEGENERATE_D)
    return SigmaCrit((alpha - 1.0) * (D + 1.0) / (alpha * D), CritRegime.BIFURCATION)


def sigma_crit_bounds(alpha: float) -> Tuple[float, float]:
    """
    σ_crit 关于 D 的两个界

    Returns:
        (lower, upper)：D -> ∞ 时的下界 (α-1)/α，D = 1 时的 2(α-1)/α
    """
    require(alpha > 0.0, f"alpha 必须为正: {alpha}")
    return (alpha - 1.0) / alpha, 2.0 * (alpha - 1.0) / alpha


def classify_phase(params: ModelParams) -> PhaseLabel:
    """
    按参数判断最终结局

    α <= 1 -> Lost；α >= D+2 -> Retained；其余按 σ 与 σ_crit 比较，
    相等（容差 CRITICAL_TOLERANCE）时标为 Critical

    Note:
        D = 0 且 1 < α < 2 时原点的 λ+ = α - 1 > 0，判为 Retained
    """
    crit = sigma_crit(params.alpha, params.D)
    if crit.regime is CritRegime.ALWAYS_LOST:
        return PhaseLabel.LOST
    if crit.regime in (CritRegime.ALWAYS_RETAINED, CritRegime.DEGENERATE_D):
        return PhaseLabel.RETAINED
    if math.isclose(params.sigma, crit.value, rel_tol=0.0, abs_tol=CRITICAL_TOLERANCE):
        return PhaseLabel.CRITICAL
    return PhaseLabel.LOST if params.sigma > crit.value else PhaseLabel.RETAINED


# ===== 离散映射 =====

def map_jacobian_at_origin(params: ModelParams) -> Tuple[np.ndarray, float]:
    """
    离散映射在原点的线性化

    M = [[ασ̃, ασ], [ασ̃/(1+D), ασ/(1+D)]]，秩为 1，
    谱半径 ρ = α(1 - σD/(1+D))，ρ < 1 当且仅当 σ > σ_crit

    Returns:
        (M, ρ)
    """
    alpha, D, sigma = params.alpha, params.D, params.sigma
    s_tilde = 1.0 - sigma
    matrix = np.array([[alpha * s_tilde, alpha * sigma],
                       [alpha * s_tilde / (1.0 + D), alpha * sigma / (1.0 + D)]])
    radius = float(np.max(np.abs(np.linalg.eigvals(matrix))))
    return matrix, radius


# ===== 零倾线 =====

def nullcline_geometry(params: ModelParams) -> NullclineGeometry:
    """
    N_p（ṗ = 0）的二次曲线系数和中心

    A_pp = (1-α)(1-σ)，2A_pq = (1-α)σ，A_qq = 0，
    B_p = α(1-σ) - 1，B_q = ασ，C = 0

    Raises:
        DegenerateConicError: α = 1 或 σ = 0（Δ = 0，退化为直线）
    """
    alpha, sigma = params.alpha, params.sigma
    A_pp = (1.0 - alpha) * (1.0 - sigma)
    A_pq = (1.0 - alpha) * sigma / 2.0
    A_qq = 0.0
    B_p = alpha * (1.0 - sigma) - 1.0
    B_q = alpha * sigma
    delta = A_pp * A_qq - A_pq * A_pq
    if delta == 0.0:
        raise DegenerateConicError(f"N_p 退化: alpha={alpha}, sigma={sigma}")

    p_c = (B_q * A_pq - B_p * A_qq) / (2.0 * delta)
    q_c = (B_p * A_pq - B_q * A_pp) / (2.0 * delta)
    return NullclineGeometry(A_pp=A_pp, A_pq=A_pq, A_qq=A_qq, B_p=B_p, B_q=B_q, C=0.0,
                             delta=delta, p_c=p_c, q_c=q_c)

"""
平衡点与到达时间
"""
import numpy as np
from scipy.optimize import root

from src.config import DYNAMICS_DEFAULTS
from src.core.environment import ModelParams, PopulationState
from src.core.errors import NonConvergenceError, require
from src.dynamics.generational_map import (
    converge_many, field_components, passage_times, vector_field,
)


def flow_residual_tolerance(params: ModelParams, tol: float) -> float:
    """
    映射不动点（步长 < tol）对应的向量场残差上界

    ṗ = Δp · base，q̇ = Δq · (base + D)，base <= max(1, α)
    """
    return 10.0 * tol * (1.0 + params.alpha + params.D)


def find_equilibrium(params: ModelParams, start: PopulationState,
                     tol: float = DYNAMICS_DEFAULTS["tol"],
                     max_iter: int = DYNAMICS_DEFAULTS["max_iter"]) -> PopulationState:
    """
    迭代离散映射直到步长（上确界范数）小于 tol

    Args:
        params: 约化参数
        start: 起点
        tol: 收敛容差
        max_iter: 最大迭代次数

    Returns:
        满足 ‖step_map(x) - x‖ < tol 的状态 x

    Raises:
        NonConvergenceError: 迭代次数用尽，携带最后状态
    """
    require(tol > 0.0, f"tol 必须为正: {tol}")
    require(max_iter >= 0, f"max_iter 不能为负: {max_iter}")
    states, iterations, converged = converge_many(
        np.array([start.as_tuple()]), params.alpha, params.D, params.sigma, tol, max_iter)
    last = (float(states[0, 0]), float(states[0, 1]))
    if not converged[0]:
        raise NonConvergenceError(
            f"{max_iter} 次迭代后仍未收敛: alpha={params.alpha}, D={params.D}, sigma={params.sigma}",
            last_state=last, iterations=int(iterations[0]))
    return PopulationState(*last)


def polish_equilibrium(params: ModelParams, guess: PopulationState,
                       tol: float = DYNAMICS_DEFAULTS["tol"]) -> PopulationState:
    """
    用 scipy.optimize.root 在向量场上精修平衡点

    Raises:
        NonConvergenceError: 求根失败或结果跑出单位正方形
    """
    def fun(x):
        return field_components(x[0], x[1], params.alpha, params.D, params.sigma)

    result = root(fun, np.array(guess.as_tuple()), method="hybr", tol=tol)
    p, q = (float(v) for v in result.x)
    if not result.success or not (-tol <= p <= 1.0 + tol and -tol <= q <= 1.0 + tol):
        raise NonConvergenceError(f"向量场求根失败: {result.message}", last_state=(p, q),
                                  iterations=int(result.nfev))
    return PopulationState(min(max(p, 0.0), 1.0), min(max(q, 0.0), 1.0))


def is_flow_zero(state: PopulationState, params: ModelParams, tol: float) -> bool:
    """state 是否为向量场的零点（残差按 flow_residual_tolerance 放宽）"""
    pdot, qdot = vector_field(state, params)
    return max(abs(pdot), abs(qdot)) < flow_residual_tolerance(params, tol)


def passage_time_from(state: PopulationState, params: ModelParams,
                      threshold: float = DYNAMICS_DEFAULTS["threshold"],
                      max_gen: int = DYNAMICS_DEFAULTS["max_gen"]) -> int:
    """
    从任意状态出发，p 与 q 都降到 threshold 以下所需的代数

    已经在阈值之下时返回 0

    Raises:
        NonConvergenceError: max_gen 代内未到达（Retained 相的经验判据）
    """
    times, last, generations = passage_times(np.array([state.as_tuple()]), params.alpha,
                                             params.D, params.sigma, threshold, max_gen)
    if times[0] < 0:
        raise NonConvergenceError(
            f"{int(generations[0])} 代后未降到 {threshold} 以下: alpha={params.alpha}, "
            f"D={params.D}, sigma={params.sigma}",
            last_state=(float(last[0, 0]), float(last[0, 1])), iterations=int(generations[0]))
    return int(times[0])


def passage_time(params: ModelParams, q0: float,
                 threshold: float = DYNAMICS_DEFAULTS["threshold"],
                 max_gen: int = DYNAMICS_DEFAULTS["max_gen"]) -> int:
    """
    从 (1, q0) 出发的到达时间

    Args:
        params: 约化参数（只有 Lost 相才会到达原点）
        q0: L2 说话人中 G1 的初始概率
        threshold: 收敛阈值，默认 0.001
        max_gen: 最大代数

    Returns:
        最小的 n，使 p_n < threshold 且 q_n < threshold
    """
    require(0.0 <= q0 <= 1.0, f"q0 必须在 [0, 1] 内: {q0}")
    return passage_time_from(PopulationState(1.0, q0), params, threshold, max_gen)

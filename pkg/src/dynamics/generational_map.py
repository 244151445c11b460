"""
代际映射
L1/L2 混合种群的离散映射 (p, q) -> (p', q')，以及对应的连续时间向量场
"""
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import solve_ivp

from src.core.environment import ModelParams, PopulationState
from src.core.errors import NonConvergenceError, require
from src.utils.math_utils import clamp_probabilities, clamp_probability


# ===== 底层公式（标量与 numpy 数组通用） =====

def map_components(p, q, alpha, D, sigma):
    """
    离散映射的一步

    num  = α((1-σ)p + σq)
    base = (1-σ)(1-p) + σ(1-q) + num
    p' = num / base,  q' = num / (base + D)

    Note:
        base >= min(1, α) > 0，只有退化参数下才可能为 0
    """
    s_tilde = 1.0 - sigma
    num = alpha * (s_tilde * p + sigma * q)
    base = s_tilde * (1.0 - p) + sigma * (1.0 - q) + num
    return num / base, num / (base + D)


def field_components(p, q, alpha, D, sigma):
    """
    连续时间向量场

    ṗ = α(σ̃p + σq)(1-p) - (σ̃(1-p) + σ(1-q)) p
    q̇ = α(σ̃p + σq)(1-q) - (σ̃(1-p) + σ(1-q) + D) q
    """
    s_tilde = 1.0 - sigma
    gain = alpha * (s_tilde * p + sigma * q)
    loss = s_tilde * (1.0 - p) + sigma * (1.0 - q)
    return gain * (1.0 - p) - loss * p, gain * (1.0 - q) - (loss + D) * q


# ===== 单点运算 =====

def step_map(state: PopulationState, params: ModelParams) -> PopulationState:
    """
    下一代的 (p, q)

    Args:
        state: 当前种群状态
        params: 约化参数 (α, D, σ)

    Returns:
        下一代种群状态，保证落在 [0,1]² 内
    """
    p, q = state.p, state.q
    base = (1.0 - params.sigma) * (1.0 - p) + params.sigma * (1.0 - q) \
        + params.alpha * ((1.0 - params.sigma) * p + params.sigma * q)
    if base <= 0.0:
        # 只可能出现在原点，原点是不动点
        return PopulationState(0.0, 0.0)
    p_next, q_next = map_components(p, q, params.alpha, params.D, params.sigma)
    return PopulationState(clamp_probability(p_next), clamp_probability(q_next))


def iterate(state0: PopulationState, params: ModelParams, n: int) -> List[PopulationState]:
    """
    连续迭代 n 代

    Returns:
        长度 n+1 的轨迹，trajectory[0] = state0
    """
    require(n >= 0, f"代数不能为负: {n}")
    trajectory = [state0]
    for _ in range(n):
        trajectory.append(step_map(trajectory[-1], params))
    return trajectory


def vector_field(state: PopulationState, params: ModelParams) -> Tuple[float, float]:
    """连续时间系统在 state 处的 (ṗ, q̇)"""
    pdot, qdot = field_components(state.p, state.q, params.alpha, params.D, params.sigma)
    return float(pdot), float(qdot)


# ===== 批量运算 =====

def _as_cells(states: np.ndarray, alpha, D, sigma):
    states = np.asarray(states, dtype=np.float64)
    require(states.ndim == 2 and states.shape[1] == 2, f"states 形状必须为 (k, 2): {states.shape}")
    k = states.shape[0]
    alpha = np.broadcast_to(np.asarray(alpha, dtype=np.float64), (k,))
    D = np.broadcast_to(np.asarray(D, dtype=np.float64), (k,))
    sigma = np.broadcast_to(np.asarray(sigma, dtype=np.float64), (k,))
    require(np.all(alpha > 0.0) and np.all(D >= 0.0), "alpha 必须为正且 D 不能为负")
    require(np.all((sigma >= 0.0) & (sigma <= 1.0)), "sigma 必须在 [0, 1] 内")
    return states.copy(), alpha, D, sigma


def iterate_many(states: np.ndarray, alpha, D, sigma, n: int) -> np.ndarray:
    """
    多个格点同时迭代 n 代

    Args:
        states: (k, 2) 初始状态
        alpha, D, sigma: 标量或长度 k 的数组
        n: 代数

    Returns:
        (k, 2) 第 n 代的状态
    """
    require(n >= 0, f"代数不能为负: {n}")
    cells, alpha, D, sigma = _as_cells(states, alpha, D, sigma)
    p, q = cells[:, 0], cells[:, 1]
    for _ in range(n):
        p, q = map_components(p, q, alpha, D, sigma)
    return clamp_probabilities(np.column_stack([p, q]))


def converge_many(states: np.ndarray, alpha, D, sigma, tol: float,
                  max_iter: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    多个格点同时迭代到步长（上确界范数）小于 tol

    Returns:
        (states, iterations, converged)
        states 为最后一个步长小于 tol 的起点；未收敛的格点为最后状态
    """
    require(tol > 0.0, f"tol 必须为正: {tol}")
    cells, alpha, D, sigma = _as_cells(states, alpha, D, sigma)
    k = cells.shape[0]
    iterations = np.zeros(k, dtype=np.int64)
    converged = np.zeros(k, dtype=bool)
    active = np.arange(k)

    for _ in range(max_iter + 1):
        if active.size == 0:
            break
        p, q = cells[active, 0], cells[active, 1]
        p_next, q_next = map_components(p, q, alpha[active], D[active], sigma[active])
        step = np.maximum(np.abs(p_next - p), np.abs(q_next - q))
        done = step < tol
        converged[active[done]] = True

        moving = active[~done]
        exhausted = iterations[moving] >= max_iter
        keep = moving[~exhausted]
        cells[keep, 0] = p_next[~done][~exhausted]
        cells[keep, 1] = q_next[~done][~exhausted]
        iterations[keep] += 1
        active = keep

    return clamp_probabilities(cells), iterations, converged


def passage_times(states: np.ndarray, alpha, D, sigma, threshold: float,
                  max_gen: int, tol: float = 1e-12) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    每个格点 p 与 q 都降到 threshold 以下所需的代数

    停在内部不动点（步长 < tol 但仍在阈值之上）的格点提前判为不收敛

    Returns:
        (times, last_states, generations)；未到达的格点 time = -1，
        generations 为每个格点实际迭代的代数
    """
    require(threshold > 0.0, f"threshold 必须为正: {threshold}")
    require(max_gen >= 0, f"max_gen 不能为负: {max_gen}")
    cells, alpha, D, sigma = _as_cells(states, alpha, D, sigma)
    k = cells.shape[0]
    times = np.full(k, -1, dtype=np.int64)
    generations = np.zeros(k, dtype=np.int64)

    below = (cells[:, 0] < threshold) & (cells[:, 1] < threshold)
    times[below] = 0
    active = np.flatnonzero(~below)

    for generation in range(1, max_gen + 1):
        if active.size == 0:
            break
        p, q = cells[active, 0], cells[active, 1]
        p_next, q_next = map_components(p, q, alpha[active], D[active], sigma[active])
        stuck = np.maximum(np.abs(p_next - p), np.abs(q_next - q)) < tol
        cells[active, 0] = p_next
        cells[active, 1] = q_next
        generations[active] = generation

        arrived = (p_next < threshold) & (q_next < threshold)
        times[active[arrived]] = generation
        active = active[~arrived & ~stuck]

    return times, clamp_probabilities(cells), generations


# ===== 连续时间积分 =====

@dataclass
class FlowTrajectory:
    """连续时间轨迹"""
    times: np.ndarray
    p: np.ndarray
    q: np.ndarray

    @property
    def final(self) -> PopulationState:
        # 求解器误差量级为 atol，直接截断
        return PopulationState(float(np.clip(self.p[-1], 0.0, 1.0)), float(np.clip(self.q[-1], 0.0, 1.0)))


def integrate_flow(state0: PopulationState, params: ModelParams, t_end: float,
                   t_eval: Optional[Sequence[float]] = None,
                   rtol: float = 1e-10, atol: float = 1e-12) -> FlowTrajectory:
    """
    积分连续时间系统，用来交叉验证离散映射的平衡点

    Args:
        state0: 初始状态
        params: 约化参数
        t_end: 积分终点
        t_eval: 输出时刻（默认由求解器决定）
        rtol, atol: solve_ivp 容差

    Returns:
        FlowTrajectory
    """
    require(t_end > 0.0, f"t_end 必须为正: {t_end}")

    def rhs(_t, y):
        return field_components(y[0], y[1], params.alpha, params.D, params.sigma)

    solution = solve_ivp(rhs, (0.0, t_end), [state0.p, state0.q], method="LSODA",
                         t_eval=t_eval, rtol=rtol, atol=atol)
    if not solution.success:
        raise NonConvergenceError(f"连续时间积分失败: {solution.message}",
                                  last_state=(float(solution.y[0][-1]), float(solution.y[1][-1])))
    return FlowTrajectory(times=solution.t, p=solution.y[0], q=solution.y[1])

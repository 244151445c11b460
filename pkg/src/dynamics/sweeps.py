"""
参数扫描
轨道图（平衡点随 σ 的变化）和到达时间表，输出长格式 DataFrame
"""
import itertools
from typing import Sequence, Tuple

import numpy as np
import pandas as pd

from src.config import DYNAMICS_DEFAULTS
from src.core.environment import GrammarAdvantages, ModelParams, reduce_params
from src.core.errors import require
from src.dynamics.generational_map import converge_many, passage_times
from src.dynamics.stability import classify_phase, sigma_crit
from src.utils import console

STATUS_OK = "ok"
STATUS_NONCONVERGED = "nonconverged"

ORBIT_COLUMNS = ["alpha", "D", "sigma", "sigma_crit", "regime",
                 "p_star", "q_star", "phase", "iterations", "status"]
PASSAGE_COLUMNS = ["sigma", "d", "D", "q0", "passage_time", "status"]


def _non_empty(name: str, grid: Sequence[float]):
    require(len(grid) > 0, f"{name} 不能为空")


def orbit_diagram(alpha_values: Sequence[float], D_grid: Sequence[float],
                  sigma_grid: Sequence[float],
                  tol: float = DYNAMICS_DEFAULTS["tol"],
                  max_iter: int = DYNAMICS_DEFAULTS["max_iter"],
                  start: Tuple[float, float] = DYNAMICS_DEFAULTS["orbit_start"]) -> pd.DataFrame:
    """
    轨道图：每个 (α, D, σ) 格点从 start 迭代到平衡点

    Args:
        alpha_values: α 取值
        D_grid: D 取值
        sigma_grid: σ 取值
        tol: 收敛容差
        max_iter: 每格最大迭代次数
        start: 起点，默认 (0.5, 0.5)

    Returns:
        DataFrame，列见 ORBIT_COLUMNS；行序固定为 α、D、σ 的网格顺序。
        未收敛的格点 status = nonconverged，p_star/q_star 为最后状态
    """
    for name, grid in (("alpha_values", alpha_values), ("D_grid", D_grid), ("sigma_grid", sigma_grid)):
        _non_empty(name, grid)
    sigmas = np.asarray(sigma_grid, dtype=np.float64)
    starts = np.tile(np.asarray(start, dtype=np.float64), (sigmas.size, 1))

    rows = []
    pairs = list(itertools.product(alpha_values, D_grid))
    for alpha, D in console.progress(pairs, desc="轨道图", total=len(pairs)):
        crit = sigma_crit(alpha, D)
        states, iterations, converged = converge_many(starts, alpha, D, sigmas, tol, max_iter)
        console.debug(f"alpha={alpha}, D={D}: {int(converged.sum())}/{sigmas.size} 格收敛")
        for k, sigma in enumerate(sigmas):
            phase = classify_phase(ModelParams(alpha=alpha, D=D, sigma=float(sigma)))
            rows.append({
                "alpha": alpha, "D": D, "sigma": float(sigma),
                "sigma_crit": crit.value, "regime": crit.regime.value,
                "p_star": float(states[k, 0]), "q_star": float(states[k, 1]),
                "phase": phase.value, "iterations": int(iterations[k]),
                "status": STATUS_OK if converged[k] else STATUS_NONCONVERGED,
            })
    return pd.DataFrame(rows, columns=ORBIT_COLUMNS)


def passage_time_grid(d_grid: Sequence[float], sigma_grid: Sequence[float],
                      q0_grid: Sequence[float],
                      adv: GrammarAdvantages = GrammarAdvantages(1.0, 1.0),
                      threshold: float = DYNAMICS_DEFAULTS["threshold"],
                      max_gen: int = DYNAMICS_DEFAULTS["max_gen"]) -> pd.DataFrame:
    """
    到达时间表：每个 (σ, d, q0) 从 (1, q0) 出发降到 threshold 以下所需代数

    Args:
        d_grid: L2 难度 d
        sigma_grid: L2 说话人比例
        q0_grid: L2 说话人中 G1 的初始概率
        adv: 语法优势，默认 α1 = α2 = 1（D = d）
        threshold: 收敛阈值
        max_gen: 最大代数

    Returns:
        DataFrame，列见 PASSAGE_COLUMNS；未到达的格点 passage_time 为空、
        status = nonconverged
    """
    for name, grid in (("d_grid", d_grid), ("sigma_grid", sigma_grid), ("q0_grid", q0_grid)):
        _non_empty(name, grid)

    rows = []
    for sigma in console.progress(list(sigma_grid), desc="到达时间", unit="σ"):
        cells = list(itertools.product(d_grid, q0_grid))
        params = [reduce_params(adv, d, sigma) for d, _ in cells]
        starts = np.array([(1.0, q0) for _, q0 in cells], dtype=np.float64)
        require(np.all((starts[:, 1] >= 0.0) & (starts[:, 1] <= 1.0)), "q0 必须在 [0, 1] 内")
        times, _, _ = passage_times(starts, params[0].alpha, [pm.D for pm in params],
                                    sigma, threshold, max_gen)
        for (d, q0), pm, n in zip(cells, params, times):
            rows.append({
                "sigma": sigma, "d": d, "D": pm.D, "q0": q0,
                "passage_time": int(n) if n >= 0 else None,
                "status": STATUS_OK if n >= 0 else STATUS_NONCONVERGED,
            })
    frame = pd.DataFrame(rows, columns=PASSAGE_COLUMNS)
    frame["passage_time"] = frame["passage_time"].astype("Int64")
    return frame

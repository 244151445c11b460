"""
数学工具：概率截断、舍入
"""
from decimal import Decimal, ROUND_HALF_UP

import numpy as np

from src.config import ROUNDING_CLAMP_TOLERANCE


def clamp(value: float, min_val: float, max_val: float) -> float:
    """限制范围"""
    return max(min_val, min(max_val, value))


def clamp_probability(value: float, tolerance: float = ROUNDING_CLAMP_TOLERANCE) -> float:
    """
    把浮点误差造成的越界概率拉回 [0, 1]

    Args:
        value: 待截断的概率
        tolerance: 允许的最大越界量

    Returns:
        [0, 1] 内的概率

    Note:
        越界超过 tolerance 说明公式本身有错，直接断言失败
    """
    assert -tolerance <= value <= 1.0 + tolerance, f"概率越界: {value!r}"
    return clamp(float(value), 0.0, 1.0)


def clamp_probabilities(values: np.ndarray,
                        tolerance: float = ROUNDING_CLAMP_TOLERANCE) -> np.ndarray:
    """clamp_probability 的向量版本"""
    values = np.asarray(values, dtype=np.float64)
    assert np.all(values >= -tolerance) and np.all(values <= 1.0 + tolerance), \
        "概率数组越界"
    return np.clip(values, 0.0, 1.0)


def round_half_up(value: float, ndigits: int = 2) -> float:
    """
    四舍五入（half-up），用于和已发表的两位小数比较

    Args:
        value: 原始数值
        ndigits: 保留位数

    Returns:
        舍入后的数值
    """
    quantum = Decimal(1).scaleb(-ndigits)
    return float(Decimal(repr(value)).quantize(quantum, rounding=ROUND_HALF_UP))

"""
异常定义
模型各模块共用的错误类型
"""
from typing import Optional, Tuple


class ModelError(Exception):
    """所有模型错误的基类"""


class ParameterDomainError(ModelError, ValueError):
    """参数超出定义域"""


class ContractionViolationError(ModelError, ArithmeticError):
    """矩递推不收缩（|C1| >= 1 或 |D1| >= 1）"""


class UnsupportedConfigurationError(ModelError, NotImplementedError):
    """算子斜率不一致，矩递推不闭合"""


class DegenerateAdvantageError(ParameterDomainError):
    """α2 = 0，优势比无定义"""


class DegenerateConicError(ModelError, ArithmeticError):
    """零倾线二次曲线退化（α = 1 或 σ = 0）"""


class CalibrationError(ModelError, ValueError):
    """人口数据缺失或格式错误"""


class NonConvergenceError(ModelError, RuntimeError):
    """
    迭代次数用尽仍未收敛

    Attributes:
        last_state: 最后一次迭代的状态 (p, q)
        iterations: 已执行的迭代次数
    """

    def __init__(self, message: str, last_state: Optional[Tuple[float, float]] = None,
                 iterations: int = 0):
        super().__init__(message)
        self.last_state = last_state
        self.iterations = iterations


def require(condition: bool, message: str):
    """条件不成立时抛出 ParameterDomainError"""
    if not condition:
        raise ParameterDomainError(message)

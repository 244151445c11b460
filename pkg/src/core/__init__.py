"""
核心模块
包含学习算法、学习环境和参数类型
"""

from .errors import (
    ModelError, ParameterDomainError, ContractionViolationError,
    UnsupportedConfigurationError, DegenerateAdvantageError,
    DegenerateConicError, NonConvergenceError, CalibrationError,
)
from .learning import (
    Grammar, Response, LearningRates, OperatorSet, Environment2x2,
    OperatorAverages, MomentConstants,
    apply_operator, asymptotic_mean, mean_trajectory, moment_recursion,
    variance_limit, operator_averages, moment_constants,
    second_moment_trajectory, variance_trajectory,
)
from .environment import (
    GrammarAdvantages, PopulationState, ModelParams,
    penalty_probabilities, learning_environment, reduce_params,
)

__all__ = [
    'ModelError',
    'ParameterDomainError',
    'ContractionViolationError',
    'UnsupportedConfigurationError',
    'DegenerateAdvantageError',
    'DegenerateConicError',
    'NonConvergenceError',
    'CalibrationError',
    'Grammar',
    'Response',
    'LearningRates',
    'OperatorSet',
    'Environment2x2',
    'OperatorAverages',
    'MomentConstants',
    'apply_operator',
    'asymptotic_mean',
    'mean_trajectory',
    'moment_recursion',
    'variance_limit',
    'operator_averages',
    'moment_constants',
    'second_moment_trajectory',
    'variance_trajectory',
    'GrammarAdvantages',
    'PopulationState',
    'ModelParams',
    'penalty_probabilities',
    'learning_environment',
    'reduce_params',
]

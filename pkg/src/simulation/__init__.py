"""
有限种群模拟模块
"""

from .learner import (
    LearnerKind, Learner, Token, SourceMix, sample_token, learn_step, is_penalized,
)
from .engine import (
    LearnerBatchResult, derive_stream, layout_stream, assign_kinds,
    simulate_learners, simulate_learner, run_fixed_environment, record_points,
)
from .cohort import CohortConfig, CohortResult, simulate_cohorts, deterministic_overlay

__all__ = [
    'LearnerKind',
    'Learner',
    'Token',
    'SourceMix',
    'sample_token',
    'learn_step',
    'is_penalized',
    'LearnerBatchResult',
    'derive_stream',
    'layout_stream',
    'assign_kinds',
    'simulate_learners',
    'simulate_learner',
    'run_fixed_environment',
    'record_points',
    'CohortConfig',
    'CohortResult',
    'simulate_cohorts',
    'deterministic_overlay',
]

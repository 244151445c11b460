"""
确定性动力学模块
代际映射、原点稳定性、平衡点和参数扫描
"""

from .generational_map import (
    step_map, iterate, vector_field, iterate_many, converge_many,
    passage_times, integrate_flow, FlowTrajectory,
)
from .stability import (
    PhaseLabel, CritRegime, StabilityReport, SigmaCrit, NullclineGeometry,
    jacobian_and_eigenvalues, sigma_crit, sigma_crit_bounds, classify_phase,
    map_jacobian_at_origin, nullcline_geometry,
)
from .equilibrium import (
    find_equilibrium, polish_equilibrium, is_flow_zero, passage_time, passage_time_from,
)
from .sweeps import orbit_diagram, passage_time_grid

__all__ = [
    'step_map',
    'iterate',
    'vector_field',
    'iterate_many',
    'converge_many',
    'passage_times',
    'integrate_flow',
    'FlowTrajectory',
    'PhaseLabel',
    'CritRegime',
    'StabilityReport',
    'SigmaCrit',
    'NullclineGeometry',
    'jacobian_and_eigenvalues',
    'sigma_crit',
    'sigma_crit_bounds',
    'classify_phase',
    'map_jacobian_at_origin',
    'nullcline_geometry',
    'find_equilibrium',
    'polish_equilibrium',
    'is_flow_zero',
    'passage_time',
    'passage_time_from',
    'orbit_diagram',
    'passage_time_grid',
]

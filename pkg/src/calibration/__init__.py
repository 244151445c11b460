"""
人口校准模块
"""

from .demographics import (
    DemographicRecord, SigmaInterval, PoolMapping,
    DemographicsLoader, PoolMappingLoader, load_demographics, load_pool_mapping,
    split_pooled, sigma_interval, required_imports, sigma_table,
)
from .presets import CasePreset, case_presets

__all__ = [
    'DemographicRecord',
    'SigmaInterval',
    'PoolMapping',
    'DemographicsLoader',
    'PoolMappingLoader',
    'load_demographics',
    'load_pool_mapping',
    'split_pooled',
    'sigma_interval',
    'required_imports',
    'sigma_table',
    'CasePreset',
    'case_presets',
]

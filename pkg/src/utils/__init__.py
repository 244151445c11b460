"""
工具模块
包含控制台输出、数值截断与舍入、表格输出等通用功能
"""

from . import console
from .math_utils import clamp, clamp_probability, clamp_probabilities, round_half_up
from .file_io import FORMATS, table_to_text, write_table, write_json, companion_path

__all__ = [
    'console',
    'clamp',
    'clamp_probability',
    'clamp_probabilities',
    'round_half_up',
    'FORMATS',
    'table_to_text',
    'write_table',
    'write_json',
    'companion_path',
]

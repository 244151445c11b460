"""
文件读写工具
长格式表（CSV / JSON）和 JSON 记录的输出
"""
import json
import math
import sys
from pathlib import Path
from typing import Any, Optional

import pandas as pd

from src.utils import console

# CSV 与 JSON 共用的浮点格式
FLOAT_FORMAT = "%.10g"
FORMATS = ("csv", "json")


def _normalize(value: Any) -> Any:
    """JSON 值与 CSV 保持一致：浮点按 FLOAT_FORMAT 取整，NaN/NA 写成 null"""
    if value is None or value is pd.NA:
        return None
    if hasattr(value, "item"):
        value = value.item()
    if isinstance(value, float):
        if math.isnan(value):
            return None
        return float(FLOAT_FORMAT % value)
    return value


def table_to_text(frame: pd.DataFrame, fmt: str = "csv") -> str:
    """
    把 DataFrame 编码为文本

    Args:
        frame: 长格式表
        fmt: csv 或 json（json 为记录数组）
    """
    if fmt not in FORMATS:
        raise ValueError(f"未知输出格式: {fmt}")
    if fmt == "csv":
        return frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    records = [{col: _normalize(v) for col, v in zip(frame.columns, row)}
               for row in frame.itertuples(index=False, name=None)]
    return json.dumps(records, indent=2, sort_keys=False, ensure_ascii=False) + "\n"


def write_table(frame: pd.DataFrame, filepath: Optional[Path] = None, fmt: str = "csv"):
    """
    输出长格式表

    Args:
        frame: 长格式表
        filepath: 输出路径；None 时写到 stdout
        fmt: csv 或 json
    """
    text = table_to_text(frame, fmt)
    if filepath is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    filepath = Path(filepath)
    filepath.parent.mkdir(parents=True, exist_ok=True)
    with open(filepath, 'w', encoding='utf-8', newline='') as f:
        f.write(text)
    console.success(f"已保存到: {filepath}")


def companion_path(filepath: Path, suffix: str) -> Path:
    """同目录下的伴随文件，例如 cohort.csv -> cohort_deterministic.csv"""
    filepath = Path(filepath)
    return filepath.with_name(f"{filepath.stem}_{suffix}{filepath.suffix}")


def write_json(data: Any, filepath: Optional[Path] = None):
    """
    输出一条 JSON 记录

    Args:
        data: 可被 json 序列化的对象（dataclasses-json 的 to_dict 结果）
        filepath: 输出路径；None 时写到 stdout
    """
    text = json.dumps(_normalize_tree(data), indent=2, sort_keys=False, ensure_ascii=False) + "\n"
    if filepath is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    filepath = Path(filepath)
    filepath.parent.mkdir(parents=True, exist_ok=True)
    with open(filepath, 'w', encoding='utf-8') as f:
        f.write(text)
    console.success(f"已保存到: {filepath}")


def _normalize_tree(data: Any) -> Any:
    if isinstance(data, dict):
        return {k: _normalize_tree(v) for k, v in data.items()}
    if isinstance(data, (list, tuple)):
        return [_normalize_tree(v) for v in data]
    return _normalize(data)

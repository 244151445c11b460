"""
控制台输出
状态行和进度条统一写到 stderr，stdout 只留给数据表
"""
import sys
from typing import Iterable, Optional

from tqdm import tqdm

from src.config import DEBUG

_quiet = False


def set_quiet(quiet: bool):
    """--quiet：关闭状态行和进度条"""
    global _quiet
    _quiet = quiet


def info(message: str = ""):
    if not _quiet:
        print(message, file=sys.stderr)


def success(message: str):
    info(f"✓ {message}")


def warn(message: str):
    # 警告不受 --quiet 影响
    print(f"⚠ {message}", file=sys.stderr)


def debug(message: str):
    if DEBUG and not _quiet:
        print(f"  [DEBUG] {message}", file=sys.stderr)


def banner(title: str):
    info("=" * 60)
    info(title)
    info("=" * 60)


def step(index: int, total: int, message: str):
    info(f"\n[{index}/{total}] {message}")


def progress(iterable: Iterable, desc: str, total: Optional[int] = None, unit: str = "格"):
    """tqdm 进度条（stderr），--quiet 时关闭"""
    return tqdm(iterable, desc=desc, total=total, unit=unit, file=sys.stderr,
                disable=_quiet, leave=False)

"""
全局配置文件
"""
import os
from pathlib import Path

# ============ 路径配置 ============
PROJECT_ROOT = Path(__file__).parent.parent
DATA_DIR = PROJECT_ROOT / "data"
OUTPUT_DIR = PROJECT_ROOT / "output"

# 人口数据（表格 + L2 群体映射）
DEMOGRAPHICS_DIR = DATA_DIR / "demographics"
CAPE_CSV_PATH = DEMOGRAPHICS_DIR / "cape_colony.csv"
CAPE_POOL_PATH = DEMOGRAPHICS_DIR / "cape_colony.pool"
LIMA_CSV_PATH = DEMOGRAPHICS_DIR / "lima.csv"
LIMA_POOL_PATH = DEMOGRAPHICS_DIR / "lima.pool"

# ============ 随机数配置 ============
# 只能通过命令行 --seed 覆盖，不读环境变量
DEFAULT_SEED = 20240607

# ============ 数值配置 ============
# 概率截断只吸收这一量级的舍入误差
ROUNDING_CLAMP_TOLERANCE = 1e-12

# ============ 学习者配置 ============
LEARNING_DEFAULTS = {
    "gamma": 0.01,
    "d": 2.0,
    "freq_g1": 0.5,
    "alpha1": 0.25,
    "alpha2": 0.2,
    "n_learners": 10,
    "l2_fraction": 0.5,
    "tokens": 100_000,
    "record_every": 100,
}

# ============ 代际模拟配置 ============
COHORT_DEFAULTS = {
    "n_learners": 100,
    "l2_fraction": 0.5,
    "n_generations": 15,
    "initial_prob": 0.99,
    "parents_per_learner": 2,
    "tokens": 100_000,
    # 学习率网格
    "gamma_grid": (0.1, 0.01, 0.001),
}

# ============ 确定性动力学配置 ============
DYNAMICS_DEFAULTS = {
    "tol": 1e-12,
    "max_iter": 1_000_000,
    "threshold": 0.001,
    "max_gen": 100_000,
    "orbit_start": (0.5, 0.5),
}

# ============ 人口校准配置 ============
CALIBRATION_DEFAULTS = {
    "low_fraction": 0.5,
    "pooled_ratio": 0.92,
}

# ============ 调试配置 ============
DEBUG = os.getenv("DEBUG", "false").lower() == "true"

__version__ = "1.0.0"

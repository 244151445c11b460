"""语言接触模型：学习算法、代际动力学、有限种群模拟与人口校准"""

__version__ = "1.0.0"

"""
语言接触模型 - 命令行主入口

用法: python main.py <命令> [参数]

命令:
  learn       固定环境中的一组学习者轨迹（learner_id,kind,iteration,prob）
  cohort      多代模拟（generation,kind,learner_id,terminal_prob）
              以及确定性映射的伴随表（generation,p_det,q_det），必须给出 --output
  orbit       轨道图：平衡点随 (α, D, σ) 的变化
  passage     到达时间：从 (1, q0) 出发降到阈值以下所需代数
  phase       单点相判断（JSON）
  calibrate   人口数据的 σ 区间表
  presets     列出案例预设

通用参数（每个命令都可用）:
  --output PATH        输出文件（默认 stdout）
  --format csv|json    输出格式（默认 csv）
  --seed N             主种子（默认 20240607）
  --quiet              关闭状态行和进度条

网格参数写成逗号列表（0.2,0.6）或 start:stop:num（0:1:21，含端点）

示例:
  python main.py learn --tokens 100000 --n-learners 10 --l2-fraction 0.5
  python main.py cohort --gamma 0.1 --output output/cohort.csv
  python main.py orbit --alpha 2,5 --D-grid 0.5:10:20 --sigma-grid 0:1:21
  python main.py passage --sigma-grid 0.2,0.6 --d-grid 0.5:10:20 --q0-grid 0.1,0.5,0.9
  python main.py phase --alpha 14 --D 1 --sigma 0.9
  python main.py calibrate --case cape

退出码: 0 成功，2 参数或数据错误，3 单点计算不收敛
"""
import argparse
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd
from dataclasses_json import dataclass_json

# 添加项目根目录到 Python 路径
project_root = Path(__file__).parent
sys.path.insert(0, str(project_root))

from src.config import (
    CALIBRATION_DEFAULTS, CAPE_CSV_PATH, CAPE_POOL_PATH, COHORT_DEFAULTS,
    DEFAULT_SEED, DYNAMICS_DEFAULTS, LEARNING_DEFAULTS, LIMA_CSV_PATH, LIMA_POOL_PATH,
)
from src.core.environment import GrammarAdvantages, ModelParams, PopulationState
from src.core.errors import CalibrationError, NonConvergenceError, ParameterDomainError
from src.calibration import case_presets, load_demographics, load_pool_mapping, sigma_table
from src.dynamics import (
    classify_phase, find_equilibrium, jacobian_and_eigenvalues, orbit_diagram,
    passage_time_grid, sigma_crit,
)
from src.simulation import CohortConfig, run_fixed_environment, simulate_cohorts
from src.utils import console
from src.utils.file_io import FORMATS, companion_path, write_json, write_table

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NONCONVERGED = 3

CASES = {
    "cape": (CAPE_CSV_PATH, CAPE_POOL_PATH),
    "lima": (LIMA_CSV_PATH, LIMA_POOL_PATH),
}

# 这些参数属于输出管道，不算模型参数
_PLUMBING = ("command", "handler", "output", "format", "seed", "quiet")


@dataclass_json
@dataclass
class RunConfig:
    """
    一次运行的有效参数

    Attributes:
        command: 子命令
        seed: 主种子
        output: 输出路径（None 为 stdout）
        format: csv 或 json
        parameters: 模型参数和网格
        tolerances: 容差和迭代上限
    """
    command: str
    seed: int
    output: Optional[str]
    format: str
    parameters: Dict[str, Any] = field(default_factory=dict)
    tolerances: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> 'RunConfig':
        tolerance_keys = ("tol", "max_iter", "threshold", "max_gen")
        values = {k: str(v) if isinstance(v, Path) else v
                  for k, v in vars(args).items() if k not in _PLUMBING}
        return cls(
            command=args.command,
            seed=args.seed,
            output=str(args.output) if args.output else None,
            format=args.format,
            parameters={k: v for k, v in values.items() if k not in tolerance_keys},
            tolerances={k: v for k, v in values.items() if k in tolerance_keys},
        )


# ===== 参数解析 =====

def parse_grid(text: str) -> List[float]:
    """
    网格参数

    "0.2,0.6" -> [0.2, 0.6]；"0:1:21" -> linspace(0, 1, 21)
    """
    try:
        if ":" in text:
            start, stop, num = text.split(":")
            num = int(num)
            if num < 1:
                raise ValueError("点数至少为 1")
            return [float(v) for v in np.linspace(float(start), float(stop), num)]
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"无法解析网格 '{text}': {e}")
    if not values:
        raise argparse.ArgumentTypeError("网格不能为空")
    return values


def non_negative_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"不是整数: {text}")
    if value < 0:
        raise argparse.ArgumentTypeError(f"不能为负: {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", type=Path, default=None, help="输出文件（默认 stdout）")
    common.add_argument("--format", choices=FORMATS, default="csv", help="输出格式")
    common.add_argument("--seed", type=non_negative_int, default=DEFAULT_SEED, help="主种子")
    common.add_argument("--quiet", action="store_true", help="关闭状态行和进度条")

    parser = argparse.ArgumentParser(
        prog="main.py", description="语言接触模型",
        formatter_class=argparse.RawDescriptionHelpFormatter, epilog=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    # learn
    p = sub.add_parser("learn", parents=[common], help="固定环境中的学习者轨迹")
    p.add_argument("--gamma", type=float, default=LEARNING_DEFAULTS["gamma"])
    p.add_argument("--d", type=float, default=LEARNING_DEFAULTS["d"])
    p.add_argument("--freq-g1", type=float, default=LEARNING_DEFAULTS["freq_g1"])
    p.add_argument("--alpha1", type=float, default=LEARNING_DEFAULTS["alpha1"])
    p.add_argument("--alpha2", type=float, default=LEARNING_DEFAULTS["alpha2"])
    p.add_argument("--n-learners", type=int, default=LEARNING_DEFAULTS["n_learners"])
    p.add_argument("--l2-fraction", type=float, default=LEARNING_DEFAULTS["l2_fraction"])
    p.add_argument("--tokens", type=non_negative_int, default=LEARNING_DEFAULTS["tokens"])
    p.add_argument("--record-every", type=int, default=LEARNING_DEFAULTS["record_every"])
    p.set_defaults(handler=cmd_learn)

    # cohort
    p = sub.add_parser("cohort", parents=[common], help="多代模拟")
    p.add_argument("--gamma", type=float, default=LEARNING_DEFAULTS["gamma"])
    p.add_argument("--d", type=float, default=LEARNING_DEFAULTS["d"])
    p.add_argument("--alpha1", type=float, default=LEARNING_DEFAULTS["alpha1"])
    p.add_argument("--alpha2", type=float, default=LEARNING_DEFAULTS["alpha2"])
    p.add_argument("--n-learners", type=int, default=COHORT_DEFAULTS["n_learners"])
    p.add_argument("--l2-fraction", type=float, default=COHORT_DEFAULTS["l2_fraction"])
    p.add_argument("--generations", type=non_negative_int, default=COHORT_DEFAULTS["n_generations"])
    p.add_argument("--tokens", type=non_negative_int, default=COHORT_DEFAULTS["tokens"])
    p.add_argument("--initial-prob", type=float, default=COHORT_DEFAULTS["initial_prob"])
    p.set_defaults(handler=cmd_cohort)

    # orbit
    p = sub.add_parser("orbit", parents=[common], help="轨道图")
    p.add_argument("--alpha", type=parse_grid, default=[0.5, 2.0, 5.0])
    p.add_argument("--D-grid", dest="D_grid", type=parse_grid, default=parse_grid("0.5:10:20"))
    p.add_argument("--sigma-grid", type=parse_grid, default=parse_grid("0:1:21"))
    p.add_argument("--tol", type=float, default=DYNAMICS_DEFAULTS["tol"])
    p.add_argument("--max-iter", type=non_negative_int, default=DYNAMICS_DEFAULTS["max_iter"])
    p.set_defaults(handler=cmd_orbit)

    # passage
    p = sub.add_parser("passage", parents=[common], help="到达时间")
    p.add_argument("--alpha1", type=float, default=1.0)
    p.add_argument("--alpha2", type=float, default=1.0)
    p.add_argument("--d-grid", type=parse_grid, default=parse_grid("0.5:10:20"))
    p.add_argument("--sigma-grid", type=parse_grid, default=[0.2, 0.6])
    p.add_argument("--q0-grid", type=parse_grid, default=[0.1, 0.5, 0.9])
    p.add_argument("--threshold", type=float, default=DYNAMICS_DEFAULTS["threshold"])
    p.add_argument("--max-gen", type=non_negative_int, default=DYNAMICS_DEFAULTS["max_gen"])
    p.set_defaults(handler=cmd_passage)

    # phase
    p = sub.add_parser("phase", parents=[common], help="单点相判断")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--D", type=float, required=True)
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--start", type=parse_grid, default=list(DYNAMICS_DEFAULTS["orbit_start"]),
                   help="平衡点迭代的起点 p,q")
    p.add_argument("--tol", type=float, default=DYNAMICS_DEFAULTS["tol"])
    p.add_argument("--max-iter", type=non_negative_int, default=DYNAMICS_DEFAULTS["max_iter"])
    p.set_defaults(handler=cmd_phase)

    # calibrate
    p = sub.add_parser("calibrate", parents=[common], help="σ 区间表")
    p.add_argument("--case", choices=sorted(CASES), default=None, help="内置数据")
    p.add_argument("--csv", type=Path, default=None, help="人口 CSV（year,group,count）")
    p.add_argument("--pool", type=Path, default=None, help="L2 群体映射文件")
    p.add_argument("--low-fraction", type=float, default=CALIBRATION_DEFAULTS["low_fraction"])
    p.set_defaults(handler=cmd_calibrate)

    # presets
    p = sub.add_parser("presets", parents=[common], help="案例预设")
    p.set_defaults(handler=cmd_presets)

    return parser


# ===== 子命令 =====

def _write_run_config(args: argparse.Namespace):
    """写到文件时在旁边留一份 RunConfig"""
    if args.output is not None:
        write_json(RunConfig.from_args(args).to_dict(),
                   companion_path(args.output, "run").with_suffix(".json"))


def cmd_learn(args: argparse.Namespace) -> int:
    console.banner("学习者轨迹")
    console.step(1, 2, f"模拟 {args.n_learners} 个学习者 × {args.tokens} 句...")
    result = run_fixed_environment(
        n_learners=args.n_learners, l2_fraction=args.l2_fraction, freq_g1=args.freq_g1,
        adv=GrammarAdvantages(args.alpha1, args.alpha2), gamma=args.gamma, d=args.d,
        n_tokens=args.tokens, seed=args.seed, record_every=args.record_every)
    for kind in sorted(set(result.kinds)):
        terminal = result.terminal_of(kind)
        console.info(f"  {kind.value} 终值均值: {terminal.mean():.4f}（{terminal.size} 人）")

    console.step(2, 2, "输出...")
    write_table(result.to_frame(), args.output, args.format)
    _write_run_config(args)
    return EXIT_OK


def cmd_cohort(args: argparse.Namespace) -> int:
    if args.output is None:
        raise ParameterDomainError("cohort 需要 --output（确定性伴随表写到同一目录）")
    config = CohortConfig(
        n_learners=args.n_learners, l2_fraction=args.l2_fraction,
        tokens_per_learner=args.tokens, n_generations=args.generations,
        master_seed=args.seed, initial_prob=args.initial_prob)
    adv = GrammarAdvantages(args.alpha1, args.alpha2)

    console.banner("代际模拟")
    console.step(1, 2, f"{config.n_generations} 代 × {config.n_learners} 人, "
                       f"σ = {config.realized_sigma}, γ = {args.gamma}...")
    result = simulate_cohorts(config, adv, args.d, args.gamma)
    summary = result.summary()
    last = summary[summary["generation"] == config.n_generations]
    for row in last.itertuples(index=False):
        console.info(f"  第 {row.generation} 代 {row.kind} 中位数: {row.median:.4f}")

    console.step(2, 2, "输出...")
    write_table(result.learners, args.output, args.format)
    write_table(result.deterministic, companion_path(args.output, "deterministic"), args.format)
    _write_run_config(args)
    return EXIT_OK


def cmd_orbit(args: argparse.Namespace) -> int:
    console.banner("轨道图")
    frame = orbit_diagram(args.alpha, args.D_grid, args.sigma_grid,
                          tol=args.tol, max_iter=args.max_iter)
    failed = int((frame["status"] != "ok").sum())
    if failed:
        console.warn(f"{failed} 个格点未收敛")
    console.success(f"共 {len(frame)} 个格点")
    write_table(frame, args.output, args.format)
    _write_run_config(args)
    return EXIT_OK


def cmd_passage(args: argparse.Namespace) -> int:
    console.banner("到达时间")
    frame = passage_time_grid(args.d_grid, args.sigma_grid, args.q0_grid,
                              adv=GrammarAdvantages(args.alpha1, args.alpha2),
                              threshold=args.threshold, max_gen=args.max_gen)
    failed = int((frame["status"] != "ok").sum())
    if failed:
        console.warn(f"{failed} 个格点在 {args.max_gen} 代内未到达阈值")
    console.success(f"共 {len(frame)} 个格点")
    write_table(frame, args.output, args.format)
    _write_run_config(args)
    return EXIT_OK


def cmd_phase(args: argparse.Namespace) -> int:
    params = ModelParams(alpha=args.alpha, D=args.D, sigma=args.sigma)
    if len(args.start) != 2:
        raise ParameterDomainError(f"--start 需要两个值 p,q: {args.start}")
    crit = sigma_crit(params.alpha, params.D)
    report = jacobian_and_eigenvalues(params)
    phase = classify_phase(params)
    equilibrium = find_equilibrium(params, PopulationState(*args.start),
                                   tol=args.tol, max_iter=args.max_iter)
    console.success(f"相: {phase.value}（σ_crit = {crit.value}）")

    write_json({
        "alpha": params.alpha,
        "D": params.D,
        "sigma": params.sigma,
        "sigma_crit": crit.value,
        "regime": crit.regime.value,
        "lambda_plus": report.lambda_plus,
        "lambda_minus": report.lambda_minus,
        "phase": phase.value,
        "p_star": equilibrium.p,
        "q_star": equilibrium.q,
        "run_config": RunConfig.from_args(args).to_dict(),
    }, args.output)
    return EXIT_OK


def cmd_calibrate(args: argparse.Namespace) -> int:
    if args.case is not None:
        if args.csv is not None or args.pool is not None:
            raise ParameterDomainError("--case 与 --csv/--pool 不能同时使用")
        csv_path, pool_path = CASES[args.case]
    elif args.csv is not None and args.pool is not None:
        csv_path, pool_path = args.csv, args.pool
    else:
        raise ParameterDomainError("需要 --case，或者同时给出 --csv 和 --pool")

    console.banner("σ 区间估计")
    console.step(1, 2, "加载人口数据...")
    records = load_demographics(csv_path)
    mapping = load_pool_mapping(pool_path)
    console.step(2, 2, "计算区间...")
    table = sigma_table(records, mapping, args.low_fraction)
    for row in table.itertuples(index=False):
        console.info(f"  {row.year}: [{row.low_rounded:.2f}, {row.high_rounded:.2f}]")
    write_table(table, args.output, args.format)
    _write_run_config(args)
    return EXIT_OK


def cmd_presets(args: argparse.Namespace) -> int:
    presets = case_presets()
    console.success(f"找到 {len(presets)} 个预设")
    write_table(pd.DataFrame([preset.to_row() for preset in presets]), args.output, args.format)
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    """主函数 - 解析命令行参数并执行相应操作，返回退出码"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse 的用法错误为 2，--help 为 0
        return int(e.code or 0)

    console.set_quiet(args.quiet)
    try:
        return args.handler(args)
    except (ParameterDomainError, CalibrationError) as e:
        print(f"错误: {e}", file=sys.stderr)
        return EXIT_USAGE
    except NonConvergenceError as e:
        print(f"错误: {e}", file=sys.stderr)
        if e.last_state is not None:
            print(f"  最后状态: p={e.last_state[0]}, q={e.last_state[1]}（{e.iterations} 次迭代）",
                  file=sys.stderr)
        return EXIT_NONCONVERGED
    finally:
        console.set_quiet(False)


if __name__ == "__main__":
    sys.exit(main())

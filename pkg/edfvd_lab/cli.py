"""
命令行入口。

子命令：
- analyze   可调度性判定、x 区间与虚拟截止期
- optimize  LO 任务 HI 模式预算优化（输出 JSON 方案，可写回任务集）
- drop      逐个丢弃 LO 任务直到通过测试
- simulate  离散事件仿真（可输出轨迹 JSON 并立即检查）
- check     检查已保存的轨迹
- speedup   加速因子取值、对照表与最大值搜索
- generate  批量生成随机任务集
- sweep     接受率扫描实验（CSV）

退出码：0 成功/可调度；1 不可调度/有错失/有违规/不可行；2 输入或配置错误。
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path

from edfvd_lab.analysis import XPolicy, classical_edfvd_test, emc_necessary_test, imc_test, virtual_deadlines
from edfvd_lab.config_loader import (
    debug_enabled,
    default_paths,
    load_env,
    load_generator_defaults,
    load_simulation_defaults,
    load_sweep_defaults,
)
from edfvd_lab.model import ModelKind, utilizations
from edfvd_lab.parsing.taskset_json import dump_task_set, load_task_set, task_set_to_dict
from edfvd_lab.utils.json_utils import dumps_json, format_rational, parse_rational, write_json
from edfvd_lab.utils.text_utils import describe_rational

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_INPUT = 2


def _rational_arg(text: str) -> Fraction:
    try:
        return parse_rational(text, field="参数")
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from e


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="edfvd-lab", add_help=True)
    parser.add_argument("--seed", type=int, default=None, help="基准随机种子（默认取配置文件）")
    parser.add_argument("--threads", type=int, default=None, help="扫描实验的工作线程数")
    parser.add_argument("--out", default="", help="输出路径（CSV 文件或目录，视子命令而定）")
    parser.add_argument("--quiet", action="store_true", help="不输出进度信息")

    subparsers = parser.add_subparsers(dest="command", required=True)

    p = subparsers.add_parser("analyze", help="IMC/EMC 可调度性测试")
    p.add_argument("taskset", help="任务集 JSON 文件")
    p.add_argument("--x-policy", choices=[m.value for m in XPolicy], default=XPolicy.MIN.value, help="在 x 区间内的取值策略")

    p = subparsers.add_parser("optimize", help="在 HI 模式剩余利用率内追加 LO 任务预算")
    p.add_argument("taskset")
    p.add_argument("--x", type=_rational_arg, default=None, help="截止期缩放因子（默认按预算最大化自动选取）")
    p.add_argument("--apply", default="", help="把优化后的任务集写到该路径")

    p = subparsers.add_parser("drop", help="逐个丢弃 LO 任务直到通过测试")
    p.add_argument("taskset")
    p.add_argument("--x-policy", choices=[m.value for m in XPolicy], default=XPolicy.MIN.value)
    p.add_argument("--output", default="", help="把修改后的任务集写到该路径（默认打印到标准输出）")

    p = subparsers.add_parser("simulate", help="离散事件仿真")
    p.add_argument("taskset")
    p.add_argument("--x", type=_rational_arg, default=None, help="截止期缩放因子（默认取分析结果）")
    p.add_argument("--x-policy", choices=[m.value for m in XPolicy], default=XPolicy.MIN.value)
    p.add_argument("--scenario", default="lo", help="lo[@<seed>] | switch:<task>:<job>[@<seed>] | full:<seed>")
    p.add_argument("--horizon", type=_rational_arg, default=None, help="仿真视野（默认按配置推算）")
    p.add_argument("--trace", default="", help="轨迹 JSON 输出路径")
    p.add_argument("--check", action="store_true", help="仿真后立即运行轨迹检查")

    p = subparsers.add_parser("check", help="检查已保存的轨迹")
    p.add_argument("taskset")
    p.add_argument("--x", type=_rational_arg, required=True)
    p.add_argument("--trace", required=True, help="轨迹 JSON 文件")

    p = subparsers.add_parser("speedup", help="加速因子")
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--table", action="store_true", help="输出 lambda,alpha,f 对照表")
    p.add_argument("--max", action="store_true", help="网格搜索最大值")
    p.add_argument("--step", type=float, default=None, help="网格步长（--table 默认用常用取值，--max 默认 0.001）")

    p = subparsers.add_parser("generate", help="批量生成随机任务集")
    p.add_argument("--p-crit", type=float, default=None)
    p.add_argument("--lambda", dest="lam", type=_rational_arg, default=None)
    p.add_argument("--r-lo", type=_rational_arg, default=None)
    p.add_argument("--r-hi", type=_rational_arg, default=None)
    p.add_argument("--u-target", type=_rational_arg, default=None)
    p.add_argument("--model", choices=[m.value for m in ModelKind], default=None)
    p.add_argument("--seed", dest="sub_seed", type=int, default=None)
    p.add_argument("-n", "--count", type=int, default=1)
    p.add_argument("--out", dest="sub_out", default="", help="输出目录")

    p = subparsers.add_parser("sweep", help="接受率扫描实验")
    p.add_argument("--config", required=True, help="扫描配置 JSON 路径，或 config/sweeps/ 下的名称")
    p.add_argument("--sets-per-point", type=int, default=None)
    p.add_argument("--validate-sim", action="store_true", help="对被接受的任务集做仿真验证")
    p.add_argument("--seed", dest="sub_seed", type=int, default=None)
    p.add_argument("--out", dest="sub_out", default="", help="CSV 输出路径（默认打印到标准输出）")

    return parser


def _seed(args: argparse.Namespace, fallback: int) -> int:
    sub = getattr(args, "sub_seed", None)
    if sub is not None:
        return sub
    if args.seed is not None:
        return args.seed
    return fallback


def _out(args: argparse.Namespace) -> str:
    return (getattr(args, "sub_out", "") or args.out or "").strip()


def _cmd_analyze(args: argparse.Namespace) -> int:
    from edfvd_lab.output_manager import render_analysis

    ts = load_task_set(Path(args.taskset))
    u = utilizations(ts)
    verdict = imc_test(ts, XPolicy(args.x_policy))
    virtual = None
    if verdict.chosen_x is not None:
        virtual = virtual_deadlines(ts, verdict.chosen_x)
    extra = [("经典 EDF-VD 测试（切换时丢弃 LO）", "通过" if classical_edfvd_test(u) else "不通过")]
    if ts.model_kind is ModelKind.EMC:
        extra.append(("EMC 必要条件 U_HI^HI + U_LO^HI <= 1", "满足" if emc_necessary_test(u) else "不满足"))
    print(render_analysis(ts, u, verdict, source=args.taskset, virtual=virtual, extra=extra), end="")
    return EXIT_OK if verdict.schedulable else EXIT_NEGATIVE


def _cmd_optimize(args: argparse.Namespace) -> int:
    from edfvd_lab.quality import QualityInfeasibleError, apply_plan, optimize_quality, quality_report

    ts = load_task_set(Path(args.taskset))
    try:
        plan = optimize_quality(ts, args.x)
    except QualityInfeasibleError as e:
        print(f"不可行：{e}", file=sys.stderr)
        return EXIT_NEGATIVE
    payload = plan.to_dict()
    payload["wtq_before"] = format_rational(quality_report(ts).wtq)
    print(dumps_json(payload), end="")
    if args.apply:
        dump_task_set(apply_plan(ts, plan), Path(args.apply))
        print(f"已写出优化后的任务集：{Path(args.apply).as_posix()}", file=sys.stderr)
    return EXIT_OK


def _cmd_drop(args: argparse.Namespace) -> int:
    from edfvd_lab.quality import drop_low_tasks

    ts = load_task_set(Path(args.taskset))
    outcome = drop_low_tasks(ts, XPolicy(args.x_policy))
    status = "可调度" if outcome.schedulable else "不可调度"
    print(f"判定：{outcome.verdict.kind.value}（{status}）")
    print(f"丢弃顺序：{', '.join(outcome.dropped) if outcome.dropped else '（无）'}")
    if args.output:
        dump_task_set(outcome.modified, Path(args.output))
        print(f"已写出修改后的任务集：{Path(args.output).as_posix()}")
    else:
        print(dumps_json(task_set_to_dict(outcome.modified)), end="")
    return EXIT_OK if outcome.schedulable else EXIT_NEGATIVE


def _cmd_simulate(args: argparse.Namespace) -> int:
    from edfvd_lab.sim import HorizonPolicy, Scenario, check_trace, default_horizon, dump_trace, simulate

    ts = load_task_set(Path(args.taskset))
    x = args.x
    if x is None:
        verdict = imc_test(ts, XPolicy(args.x_policy))
        x = verdict.simulation_x
        if x is None:
            raise ValueError("任务集未通过测试，无法推导 x，请用 --x 显式指定")
    horizon = args.horizon
    if horizon is None:
        horizon = default_horizon(ts, HorizonPolicy.from_config(load_simulation_defaults()))
    scenario = Scenario.parse(args.scenario)
    trace = simulate(ts, x, scenario, horizon)

    print(f"x = {describe_rational(Fraction(x))}，视野 = {describe_rational(Fraction(horizon))}，场景 = {scenario.describe()}")
    switch = "未发生" if trace.mode_switch_time is None else describe_rational(trace.mode_switch_time)
    print(f"模式切换：{switch}")
    print(f"事件数：{len(trace.events)}，截止期错失：{len(trace.misses)}")
    for m in trace.misses:
        print(f"- {m.task_id}#{m.job_index} 于 t={describe_rational(m.time)}")
    if args.trace:
        dump_trace(trace, Path(args.trace))
        print(f"已写出轨迹：{Path(args.trace).as_posix()}")

    failed = trace.has_miss
    if args.check:
        violations = check_trace(ts, x, trace)
        print(f"轨迹检查：{len(violations)} 项违规")
        for v in violations:
            print(f"- {v}")
        failed = failed or bool(violations)
    return EXIT_NEGATIVE if failed else EXIT_OK


def _cmd_check(args: argparse.Namespace) -> int:
    from edfvd_lab.sim import check_trace, load_trace

    ts = load_task_set(Path(args.taskset))
    trace = load_trace(Path(args.trace))
    violations = check_trace(ts, args.x, trace)
    if not violations:
        print("轨迹检查通过：0 项违规")
        return EXIT_OK
    print(f"轨迹检查：{len(violations)} 项违规")
    for v in violations:
        print(f"- {v}")
    return EXIT_NEGATIVE


def _cmd_speedup(args: argparse.Namespace) -> int:
    import numpy as np

    from edfvd_lab.speedup import RatioPair, max_speedup_search, s_threshold, speedup_factor, speedup_table

    if args.max:
        step = args.step or 0.001
        a, lam, f = max_speedup_search(step, lam=args.lam, alpha=args.alpha)
        print(f"最大加速因子 f* = {f:.4f}，位于 alpha = {a:.4f}, lambda = {lam:.4f}（步长 {step}）")
        return EXIT_OK

    if args.table:
        if args.step:
            n = int(round(1 / args.step))
            rows = speedup_table(np.arange(1, n + 1) * args.step, np.arange(0, n + 1) * args.step)
        else:
            rows = speedup_table()
        lines = ["lambda,alpha,f"] + [f"{lam:.6g},{a:.6g},{f:.4f}" for lam, a, f in rows]
        text = "\n".join(lines) + "\n"
        out = _out(args)
        if out:
            path = Path(out)
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(text, encoding="utf-8", newline="\n")
            print(f"已写出加速因子表：{path.as_posix()}", file=sys.stderr)
        else:
            print(text, end="")
        return EXIT_OK

    if args.alpha is None or args.lam is None:
        raise ValueError("请同时提供 --alpha 与 --lambda，或使用 --table / --max")
    r = RatioPair(args.alpha, args.lam)
    print(f"f = {speedup_factor(r):.6f}")
    print(f"S = {s_threshold(r):.6f}")
    return EXIT_OK


def _cmd_generate(args: argparse.Namespace) -> int:
    from edfvd_lab.gen import GenParams, generate_task_set, generation_manifest, worker_seed

    if args.count < 1:
        raise ValueError("-n 必须 >= 1")
    cfg = dict(load_generator_defaults())
    if args.r_lo is not None or args.r_hi is not None:
        r_lo = args.r_lo if args.r_lo is not None else args.r_hi
        r_hi = args.r_hi if args.r_hi is not None else args.r_lo
        cfg["r_range"] = (r_lo, r_hi)
    params = GenParams.from_config(
        cfg,
        p_criticality=args.p_crit,
        lambda_=args.lam,
        u_target=args.u_target,
        model_kind=args.model,
    )
    base_seed = _seed(args, int(load_sweep_defaults().get("seed", 1)))
    out_dir = Path(_out(args) or "outputs/tasksets")
    out_dir.mkdir(parents=True, exist_ok=True)

    seeds: list[int] = []
    files: list[str] = []
    width = max(4, len(str(args.count)))
    for i in range(args.count):
        seed = worker_seed(base_seed, i)
        ts = generate_task_set(params.with_seed(seed))
        name = f"taskset_{i + 1:0{width}d}.json"
        dump_task_set(ts, out_dir / name)
        seeds.append(seed)
        files.append(name)
    write_json(out_dir / "manifest.json", generation_manifest(params, seeds, files))
    print(f"已生成 {args.count} 个任务集：{out_dir.as_posix()}")
    return EXIT_OK


def _resolve_sweep_path(value: str) -> Path:
    path = Path(value)
    if path.exists():
        return path
    named = default_paths().sweep_file(value)
    if named.exists():
        return named
    raise FileNotFoundError(f"找不到扫描配置：{value}")


def _cmd_sweep(args: argparse.Namespace) -> int:
    from dataclasses import replace

    from edfvd_lab.orchestration.sweep import load_sweep_config, run_sweep
    from edfvd_lab.output_manager import emit_csv, render_csv
    from edfvd_lab.sim import HorizonPolicy
    from edfvd_lab.utils.text_utils import format_axis_value

    sweep_defaults = load_sweep_defaults()
    config = load_sweep_config(
        _resolve_sweep_path(args.config),
        sweep_defaults=sweep_defaults,
        generator_defaults=load_generator_defaults(),
    )
    overrides = {}
    if args.sets_per_point is not None:
        overrides["sets_per_point"] = args.sets_per_point
    if args.validate_sim:
        overrides["validate_with_sim"] = True
    seed = _seed(args, config.seed)
    if seed != config.seed:
        overrides["seed"] = seed
    if overrides:
        config = replace(config, **overrides)

    threads = args.threads if args.threads is not None else int(sweep_defaults.get("threads", 1))
    places = int(sweep_defaults.get("ratio_places", 4))

    def progress(state) -> None:
        if not args.quiet:
            print(
                f"[sweep] {config.axis}={format_axis_value(state['value'])} 完成 {state['total']}/{config.sets_per_point}",
                file=sys.stderr,
            )

    result = run_sweep(
        config,
        threads=threads,
        horizon_policy=HorizonPolicy.from_config(load_simulation_defaults()),
        progress=progress,
    )
    out = _out(args)
    if out:
        emit_csv(result, Path(out), places=places)
        if not args.quiet:
            print(f"已写出扫描结果：{Path(out).as_posix()}", file=sys.stderr)
    else:
        print(render_csv(result, places=places), end="")
    if result.total_sim_misses:
        print(f"警告：仿真发现 {result.total_sim_misses} 个被接受的任务集出现截止期错失", file=sys.stderr)
        return EXIT_NEGATIVE
    return EXIT_OK


_COMMANDS = {
    "analyze": _cmd_analyze,
    "optimize": _cmd_optimize,
    "drop": _cmd_drop,
    "simulate": _cmd_simulate,
    "check": _cmd_check,
    "speedup": _cmd_speedup,
    "generate": _cmd_generate,
    "sweep": _cmd_sweep,
}


def run(argv: list[str] | None = None) -> int:
    """
    解析参数并执行子命令，返回退出码（供测试直接调用）。
    """

    parser = _build_parser()
    args = parser.parse_args(argv)
    handler = _COMMANDS.get(args.command)
    if handler is None:
        parser.print_help()
        return EXIT_INPUT
    try:
        load_env()
        return handler(args)
    except (ValueError, KeyError, OSError, RuntimeError) as e:
        print(f"运行失败：{e}", file=sys.stderr)
        if debug_enabled():
            import traceback

            traceback.print_exc()
        return EXIT_INPUT


def main(argv: list[str] | None = None) -> None:
    sys.exit(run(argv))

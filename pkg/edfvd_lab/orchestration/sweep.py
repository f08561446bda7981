"""
接受率扫描实验编排。

流程（每个扫描点独立）：
1) 按轴取值构造生成参数（Uavg / Lambda / Alpha / PCrit）；
2) 生成 sets_per_point 个任务集，第 k 个工作单元的种子为 base_seed + point_index·sets_per_point + k；
3) 逐个施加启用的测试并计数；
4) 可选：对 EDF-VD 接受的任务集做 FullBudgets 随机切换仿真，统计出现截止期错失的任务集数。

扫描点之间用线程池并行；种子只取决于点序号与集合序号，结果与线程数无关。
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable

from typing_extensions import TypedDict

from edfvd_lab.analysis import imc_test, worst_case_reservation_test
from edfvd_lab.gen import GenParams, generate_task_set, worker_seed
from edfvd_lab.model import utilizations
from edfvd_lab.sim.scenario import Scenario
from edfvd_lab.sim.simulator import HorizonPolicy, default_horizon, simulate
from edfvd_lab.utils.json_utils import parse_rational, read_json_object


class SweepConfigError(ValueError):
    """
    扫描配置不合法（未知轴、取值越界、测试名未知等）。
    """


AXES = ("Uavg", "Lambda", "Alpha", "PCrit")
TEST_EDFVD = "EDFVD"
TEST_WORST_CASE = "WorstCaseEDF"
TESTS = (TEST_EDFVD, TEST_WORST_CASE)
# 配置中可用的别名，载入时统一为 CSV 中的测试名
TEST_ALIASES = {"EDFVD_Theorem3": TEST_EDFVD}


class PointState(TypedDict):
    index: int
    value: float
    accepted: dict[str, int]
    sim_misses: dict[str, int]
    total: int


@dataclass(frozen=True)
class SweepConfig:
    axis: str
    axis_values: tuple[float, ...]
    fixed: dict[str, Any] = field(default_factory=dict)
    sets_per_point: int = 1000
    tests: tuple[str, ...] = (TEST_EDFVD,)
    validate_with_sim: bool = False
    sim_scenarios_per_set: int = 5
    seed: int = 1

    def __post_init__(self) -> None:
        if self.axis not in AXES:
            raise SweepConfigError(f"未知扫描轴：{self.axis!r}（可选 {'/'.join(AXES)}）")
        if not self.axis_values:
            raise SweepConfigError("axis_values 不能为空")
        for v in self.axis_values:
            _check_axis_value(self.axis, v)
        if self.sets_per_point < 1:
            raise SweepConfigError("sets_per_point 必须 >= 1")
        tests = tuple(dict.fromkeys(TEST_ALIASES.get(t, t) for t in self.tests))
        object.__setattr__(self, "tests", tests)
        unknown = [t for t in self.tests if t not in TESTS]
        if unknown or not self.tests:
            raise SweepConfigError(f"未知测试：{unknown}（可选 {'/'.join(TESTS + tuple(TEST_ALIASES))}）")
        if self.validate_with_sim and self.sim_scenarios_per_set < 1:
            raise SweepConfigError("启用仿真验证时 sim_scenarios_per_set 必须 >= 1")

    @classmethod
    def from_dict(
        cls,
        data: dict[str, Any],
        *,
        sweep_defaults: dict[str, Any] | None = None,
        generator_defaults: dict[str, Any] | None = None,
    ) -> SweepConfig:
        """
        JSON 配置 → SweepConfig。缺省字段依次取 sweep.yaml 与 generator.yaml 的默认值。
        """

        defaults = sweep_defaults or {}
        values = data.get("axis_values")
        if not isinstance(values, list):
            raise SweepConfigError("axis_values 必须是数组")
        fixed = dict(generator_defaults or {})
        fixed.update(data.get("fixed") or {})
        try:
            return cls(
                axis=str(data.get("axis", "")),
                axis_values=tuple(float(v) for v in values),
                fixed=fixed,
                sets_per_point=int(data.get("sets_per_point", defaults.get("sets_per_point", 1000))),
                tests=tuple(data.get("tests") or (TEST_EDFVD,)),
                validate_with_sim=bool(data.get("validate_with_sim", defaults.get("validate_with_sim", False))),
                sim_scenarios_per_set=int(data.get("sim_scenarios_per_set", defaults.get("sim_scenarios_per_set", 5))),
                seed=int(data.get("seed", defaults.get("seed", 1))),
            )
        except SweepConfigError:
            raise
        except (TypeError, ValueError) as e:
            raise SweepConfigError(f"扫描配置字段类型错误：{e}") from e

    def params_for(self, value: float) -> GenParams:
        """
        以 fixed 为底，把扫描轴对应的生成参数替换为 value。
        """

        q = parse_rational(value, field=self.axis)
        overrides: dict[str, Any] = {}
        if self.axis == "Uavg":
            overrides["u_target"] = q
        elif self.axis == "Lambda":
            overrides["lambda_"] = q
        elif self.axis == "Alpha":
            overrides["r_range"] = (1 / q, 1 / q)
        else:
            overrides["p_criticality"] = float(q)
        try:
            return GenParams.from_config(self.fixed, **overrides)
        except (TypeError, ValueError) as e:
            raise SweepConfigError(f"生成参数不合法（{self.axis}={value}）：{e}") from e


def load_sweep_config(
    path: Path,
    *,
    sweep_defaults: dict[str, Any] | None = None,
    generator_defaults: dict[str, Any] | None = None,
) -> SweepConfig:
    try:
        data = read_json_object(path)
    except ValueError as e:
        raise SweepConfigError(str(e)) from e
    return SweepConfig.from_dict(data, sweep_defaults=sweep_defaults, generator_defaults=generator_defaults)


def _check_axis_value(axis: str, v: float) -> None:
    if axis == "Uavg" and not (0 < v):
        raise SweepConfigError(f"Uavg 必须为正：{v}")
    if axis in ("Lambda", "Alpha") and not (0 < v <= 1):
        raise SweepConfigError(f"{axis} 必须位于 (0,1]：{v}")
    if axis == "PCrit" and not (0 <= v <= 1):
        raise SweepConfigError(f"PCrit 必须位于 [0,1]：{v}")


@dataclass(frozen=True)
class SweepRow:
    axis: str
    value: float
    test: str
    accepted: int
    total: int
    sim_misses: int = 0

    @property
    def ratio(self) -> float:
        return self.accepted / self.total if self.total else 0.0


@dataclass
class SweepResult:
    rows: list[SweepRow] = field(default_factory=list)

    def ratios(self, test: str) -> list[tuple[float, float]]:
        return [(r.value, r.ratio) for r in self.rows if r.test == test]

    @property
    def total_sim_misses(self) -> int:
        return sum(r.sim_misses for r in self.rows)


def _simulation_missed(task_set, x: Fraction, set_seed: int, config: SweepConfig, policy: HorizonPolicy) -> bool:
    horizon = default_horizon(task_set, policy)
    for k in range(config.sim_scenarios_per_set):
        scenario = Scenario.full_budgets(set_seed * config.sim_scenarios_per_set + k)
        if simulate(task_set, x, scenario, horizon).has_miss:
            return True
    return False


def run_point(config: SweepConfig, index: int, value: float, policy: HorizonPolicy | None = None) -> PointState:
    """
    计算单个扫描点：生成、测试、（可选）仿真验证。
    """

    policy = policy or HorizonPolicy()
    base = config.params_for(value)
    state: PointState = {
        "index": index,
        "value": value,
        "accepted": {t: 0 for t in config.tests},
        "sim_misses": {t: 0 for t in config.tests},
        "total": 0,
    }
    for k in range(config.sets_per_point):
        seed = worker_seed(config.seed, index * config.sets_per_point + k)
        task_set = generate_task_set(base.with_seed(seed))
        verdict = imc_test(task_set)
        outcomes = {
            TEST_EDFVD: verdict.schedulable,
            TEST_WORST_CASE: worst_case_reservation_test(utilizations(task_set)),
        }
        missed = False
        if config.validate_with_sim and verdict.schedulable:
            missed = _simulation_missed(task_set, verdict.simulation_x, seed, config, policy)
        for test in config.tests:
            if outcomes[test]:
                state["accepted"][test] += 1
                if missed:
                    state["sim_misses"][test] += 1
        state["total"] += 1
    return state


def run_sweep(
    config: SweepConfig,
    *,
    threads: int = 1,
    horizon_policy: HorizonPolicy | None = None,
    progress: Callable[[PointState], None] | None = None,
) -> SweepResult:
    """
    并行计算全部扫描点，按点序号与测试声明顺序汇总成结果表。
    """

    def work(item: tuple[int, float]) -> PointState:
        state = run_point(config, item[0], item[1], horizon_policy)
        if progress is not None:
            progress(state)
        return state

    points = list(enumerate(config.axis_values))
    with ThreadPoolExecutor(max_workers=max(1, int(threads))) as pool:
        states = list(pool.map(work, points))

    rows = [
        SweepRow(
            axis=config.axis,
            value=s["value"],
            test=test,
            accepted=s["accepted"][test],
            total=s["total"],
            sim_misses=s["sim_misses"][test],
        )
        for s in sorted(states, key=lambda s: s["index"])
        for test in config.tests
    ]
    return SweepResult(rows=rows)

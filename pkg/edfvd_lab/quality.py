"""
LO 任务降级服务的质量指标与两种增强手段。

说明：
- 质量比 Q_i = C_i^HI / C_i^LO，加权总质量 WTQ = Σ w_i·Q_i（只统计 LO 任务）；
- optimize_quality：在 HI 模式剩余利用率内给 LO 任务追加 HI 模式预算，
  问题是带强制下界的分数背包，先分配强制量，再按单位利用率价值 w_i·T_i/C_i^LO 贪心填充；
- drop_low_tasks：测试不通过时按 Q_i·w_i 从小到大逐个丢弃 LO 任务（wcet_hi := 0），直到通过或无可丢弃。

两者都只适用于 IMC 任务集（EMC 以拉长周期降级，不存在预算可调）。
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable

from edfvd_lab.analysis import (
    BoundKind,
    Verdict,
    XPolicy,
    feasible_x_range,
    high_mode_x_max,
    imc_test,
    low_mode_x_min,
    worst_case_reservation_test,
)
from edfvd_lab.model import ModelKind, Task, TaskSet, UtilizationSummary, ensure_valid, utilizations
from edfvd_lab.utils.json_utils import format_rational


class QualityInfeasibleError(ValueError):
    """
    强制执行量的总利用率超出 HI 模式可用预算。shortfall 为超出的利用率。
    """

    def __init__(self, shortfall: Fraction) -> None:
        self.shortfall = Fraction(shortfall)
        super().__init__(f"强制执行量无法放入 HI 模式预算，缺口利用率 {self.shortfall}（≈{float(self.shortfall):.4f}）")


def _require_imc(task_set: TaskSet) -> None:
    if task_set.model_kind is not ModelKind.IMC:
        raise ValueError("质量指标与预算优化只适用于 IMC 任务集")


def quality_ratio(task: Task) -> Fraction:
    if task.wcet_lo == 0:
        raise ValueError(f"{task.id}: wcet_lo 为 0，质量比无定义")
    return task.wcet_hi / task.wcet_lo


def weighted_quality(task: Task) -> Fraction:
    return quality_ratio(task) * task.importance


@dataclass(frozen=True)
class QualityReport:
    per_task: dict[str, Fraction]
    wtq: Fraction


def quality_report(task_set: TaskSet) -> QualityReport:
    _require_imc(task_set)
    ensure_valid(task_set)
    per_task = {t.id: quality_ratio(t) for t in task_set.lo_tasks}
    wtq = sum((per_task[t.id] * t.importance for t in task_set.lo_tasks), Fraction(0))
    return QualityReport(per_task=per_task, wtq=wtq)


def quality_budget_cap(u: UtilizationSummary, x: Fraction) -> Fraction:
    """
    HI 模式下还能追加给 LO 任务的利用率：
    1/(1-x) - x/(1-x)·U_LO^LO - U_LO^HI - U_HI^HI/(1-x)，负值按 0 处理。
    """

    x = Fraction(x)
    if not (0 < x < 1):
        raise ValueError(f"x 必须位于 (0,1)，实际为 {x}")
    raw = 1 / (1 - x) - x / (1 - x) * u.u_lo_lo - u.u_lo_hi - u.u_hi_hi / (1 - x)
    return max(raw, Fraction(0))


@dataclass(frozen=True)
class BudgetPlan:
    x: Fraction
    increments: dict[str, Fraction]
    resulting_wcet_hi: dict[str, Fraction]
    achieved_wtq: Fraction
    budget_used: Fraction
    budget_cap: Fraction

    def to_dict(self) -> dict[str, Any]:
        return {
            "x": format_rational(self.x),
            "budget_cap": format_rational(self.budget_cap),
            "budget_used": format_rational(self.budget_used),
            "achieved_wtq": format_rational(self.achieved_wtq),
            "increments": {k: format_rational(v) for k, v in self.increments.items()},
            "resulting_wcet_hi": {k: format_rational(v) for k, v in self.resulting_wcet_hi.items()},
        }


def default_optimization_x(u: UtilizationSummary) -> Fraction:
    """
    预算上限对 x 的导数符号与 1 - U_LO^LO - U_HI^HI 相同：
    需要缩放截止期时取可行区间下端，普通 EDF 已可调度时取上端。
    """

    x_range, reasons = feasible_x_range(u)
    if x_range is None:
        detail = ", ".join(r.value for r in reasons)
        raise ValueError(f"任务集不存在可用的 x（{detail}）")
    if worst_case_reservation_test(u):
        return x_range.upper
    return x_range.pick(XPolicy.MIN)


def _increment_box(task: Task) -> tuple[Fraction, Fraction]:
    # 已被丢弃的任务若要恢复，至少恢复到强制执行量
    if task.wcet_hi == 0:
        return task.mandatory_wcet, task.wcet_lo
    return Fraction(0), task.wcet_lo - task.wcet_hi


def optimize_quality(task_set: TaskSet, x: Fraction | None = None) -> BudgetPlan:
    """
    在给定 x 下最大化 Σ (w_i/C_i^LO)·I_i。x 缺省时由 default_optimization_x 选取。

    x 落在 LO 模式下界与 HI 模式上界之外时抛出 ValueError；强制下界放不进预算时抛出 QualityInfeasibleError。
    """

    _require_imc(task_set)
    u = utilizations(task_set)
    if x is None:
        x = default_optimization_x(u)
    x = Fraction(x)
    lo_bound = low_mode_x_min(u)
    if not lo_bound.feasible or x < lo_bound.value:
        raise ValueError(f"x={x} 低于 LO 模式下界，任务集在该 x 下不可调度")
    hi_bound = high_mode_x_max(u)
    if not hi_bound.feasible or (hi_bound.kind is BoundKind.VALUE and x > hi_bound.value):
        raise ValueError(f"x={x} 高于 HI 模式上界，任务集在该 x 下不可调度")
    cap = quality_budget_cap(u, x)

    increments: dict[str, Fraction] = {}
    room: dict[str, Fraction] = {}
    used = Fraction(0)
    for t in task_set.lo_tasks:
        low, high = _increment_box(t)
        increments[t.id] = low
        room[t.id] = high - low
        used += low / t.period
    if used > cap:
        raise QualityInfeasibleError(used - cap)

    remaining = cap - used
    order = sorted(
        ((i, t) for i, t in enumerate(task_set.tasks) if t.is_lo),
        key=lambda it: (-(it[1].importance * it[1].period / it[1].wcet_lo), it[0]),
    )
    for _, t in order:
        if remaining <= 0:
            break
        if t.importance == 0 or room[t.id] <= 0:
            continue
        take = min(room[t.id] / t.period, remaining)
        increments[t.id] += take * t.period
        remaining -= take

    resulting = {t.id: t.wcet_hi + increments[t.id] for t in task_set.lo_tasks}
    achieved = sum((resulting[t.id] / t.wcet_lo * t.importance for t in task_set.lo_tasks), Fraction(0))
    return BudgetPlan(
        x=x,
        increments=increments,
        resulting_wcet_hi=resulting,
        achieved_wtq=achieved,
        budget_used=cap - remaining,
        budget_cap=cap,
    )


def apply_plan(task_set: TaskSet, plan: BudgetPlan) -> TaskSet:
    out = task_set
    for task_id, wcet_hi in plan.resulting_wcet_hi.items():
        out = out.replace_task(out.task(task_id).with_wcet_hi(wcet_hi))
    ensure_valid(out)
    return out


@dataclass(frozen=True)
class DropOutcome:
    verdict: Verdict
    modified: TaskSet
    dropped: tuple[str, ...]

    @property
    def schedulable(self) -> bool:
        return self.verdict.schedulable


def drop_low_tasks(
    task_set: TaskSet,
    x_policy: XPolicy = XPolicy.MIN,
    metric: Callable[[Task], Fraction] = weighted_quality,
) -> DropOutcome:
    """
    逐个丢弃 LO 任务直到测试通过。

    每轮在 wcet_hi != 0 的 LO 任务中选 metric 最小者（并列时先声明者优先），把 wcet_hi 置 0。
    """

    _require_imc(task_set)
    current = task_set
    dropped: list[str] = []
    while True:
        verdict = imc_test(current, x_policy)
        if verdict.schedulable:
            return DropOutcome(verdict, current, tuple(dropped))
        candidates = [(metric(t), i, t) for i, t in enumerate(current.tasks) if t.is_lo and t.wcet_hi != 0]
        if not candidates:
            return DropOutcome(verdict, current, tuple(dropped))
        _, _, victim = min(candidates, key=lambda c: (c[0], c[1]))
        current = current.replace_task(victim.with_wcet_hi(Fraction(0)))
        dropped.append(victim.id)

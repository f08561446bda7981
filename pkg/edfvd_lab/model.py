"""
IMC/EMC 任务模型：领域类型与利用率运算。

约定：
- 所有时间量都是精确有理数（Fraction），不使用浮点；
- 隐式截止期模型：deadline == period；
- LO 任务 wcet_hi == 0 表示模式切换时立即丢弃（经典 MC 行为）；
- EMC 模型下 LO 任务在 HI 模式按 extended_period 拉长周期，WCET 不变。
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction


class Criticality(str, Enum):
    LO = "LO"
    HI = "HI"


class ModelKind(str, Enum):
    IMC = "IMC"
    EMC = "EMC"


@dataclass(frozen=True)
class Task:
    """
    隐式截止期的零星（sporadic）混合关键性任务。

    wcet_lo / wcet_hi 分别是 LO 模式与 HI 模式下的 WCET；
    importance 与 mandatory_wcet 只对 LO 任务有意义；
    extended_period 只用于 EMC 模型的 LO 任务。
    """

    id: str
    period: Fraction
    criticality: Criticality
    wcet_lo: Fraction
    wcet_hi: Fraction
    importance: Fraction = Fraction(1)
    mandatory_wcet: Fraction = Fraction(0)
    extended_period: Fraction | None = None
    deadline: Fraction | None = None

    def __post_init__(self) -> None:
        if self.deadline is None:
            object.__setattr__(self, "deadline", self.period)

    @property
    def is_hi(self) -> bool:
        return self.criticality is Criticality.HI

    @property
    def is_lo(self) -> bool:
        return self.criticality is Criticality.LO

    def with_wcet_hi(self, wcet_hi: Fraction) -> Task:
        return replace(self, wcet_hi=Fraction(wcet_hi))


@dataclass(frozen=True)
class TaskSet:
    tasks: tuple[Task, ...]
    model_kind: ModelKind = ModelKind.IMC

    def __post_init__(self) -> None:
        if not isinstance(self.tasks, tuple):
            object.__setattr__(self, "tasks", tuple(self.tasks))

    def __len__(self) -> int:
        return len(self.tasks)

    def __iter__(self):
        return iter(self.tasks)

    @property
    def lo_tasks(self) -> tuple[Task, ...]:
        return tuple(t for t in self.tasks if t.is_lo)

    @property
    def hi_tasks(self) -> tuple[Task, ...]:
        return tuple(t for t in self.tasks if t.is_hi)

    def task(self, task_id: str) -> Task:
        for t in self.tasks:
            if t.id == task_id:
                return t
        raise KeyError(task_id)

    def index_of(self, task_id: str) -> int:
        for i, t in enumerate(self.tasks):
            if t.id == task_id:
                return i
        raise KeyError(task_id)

    def replace_task(self, task: Task) -> TaskSet:
        """
        按 id 替换任务，保持声明顺序。
        """

        idx = self.index_of(task.id)
        tasks = list(self.tasks)
        tasks[idx] = task
        return replace(self, tasks=tuple(tasks))


@dataclass(frozen=True)
class Violation:
    task_id: str | None
    field: str
    message: str

    def __str__(self) -> str:
        who = self.task_id if self.task_id is not None else "<task set>"
        return f"{who}.{self.field}: {self.message}"


class InvalidTaskSetError(ValueError):
    """
    任务集不满足模型不变式。violations 保存全部违规项。
    """

    def __init__(self, violations: list[Violation]) -> None:
        self.violations = list(violations)
        detail = "; ".join(str(v) for v in self.violations[:5])
        more = f"（另有 {len(self.violations) - 5} 项）" if len(self.violations) > 5 else ""
        super().__init__(f"任务集不合法：{detail}{more}")


@dataclass(frozen=True)
class UtilizationSummary:
    """
    四个聚合利用率及逐任务利用率。

    命名：u_<任务关键性>_<模式>，例如 u_lo_hi = LO 任务在 HI 模式下的总利用率。
    """

    u_lo_lo: Fraction
    u_lo_hi: Fraction
    u_hi_lo: Fraction
    u_hi_hi: Fraction
    per_task: dict[str, tuple[Fraction, Fraction]] = field(default_factory=dict)

    @property
    def u_total_lo(self) -> Fraction:
        return self.u_lo_lo + self.u_hi_lo

    @property
    def u_total_hi(self) -> Fraction:
        return self.u_lo_hi + self.u_hi_hi

    @property
    def u_avg(self) -> Fraction:
        return (self.u_total_lo + self.u_total_hi) / 2

    @classmethod
    def from_values(cls, u_lo_lo, u_lo_hi, u_hi_lo, u_hi_hi) -> UtilizationSummary:
        """
        直接由四个聚合值构造（不含逐任务信息），用于分析函数的独立调用。
        """

        values = [Fraction(v) for v in (u_lo_lo, u_lo_hi, u_hi_lo, u_hi_hi)]
        if any(v < 0 for v in values):
            raise ValueError("利用率必须非负")
        return cls(*values)


def _check_task(task: Task, model_kind: ModelKind) -> list[Violation]:
    out: list[Violation] = []

    def bad(fld: str, msg: str) -> None:
        out.append(Violation(task.id, fld, msg))

    if task.period <= 0:
        bad("period", f"周期必须为正（{task.period}）")
    if task.deadline != task.period:
        bad("deadline", f"隐式截止期要求 deadline == period（{task.deadline} != {task.period}）")
    if task.wcet_hi < 0:
        bad("wcet_hi", "wcet_hi 不能为负")
    if task.mandatory_wcet < 0:
        bad("mandatory_wcet", "mandatory_wcet 不能为负")
    if task.importance < 0:
        bad("importance", "importance 不能为负")

    if task.is_hi:
        if task.wcet_lo <= 0:
            bad("wcet_lo", "HI 任务的 wcet_lo 必须为正")
        if task.wcet_lo > task.wcet_hi:
            bad("wcet_hi", f"HI 任务要求 wcet_lo <= wcet_hi（{task.wcet_lo} > {task.wcet_hi}）")
        if task.wcet_hi > task.period:
            bad("wcet_hi", f"HI 任务要求 wcet_hi <= period（{task.wcet_hi} > {task.period}）")
        if task.extended_period is not None:
            bad("extended_period", "只有 LO 任务可以设置 extended_period")
    else:
        if task.wcet_lo <= 0:
            bad("wcet_lo", "LO 任务的 wcet_lo 必须为正")
        if task.wcet_hi > task.wcet_lo:
            bad("wcet_hi", f"LO 任务要求 wcet_hi <= wcet_lo（{task.wcet_hi} > {task.wcet_lo}）")
        if task.wcet_lo > task.period:
            bad("wcet_lo", f"LO 任务要求 wcet_lo <= period（{task.wcet_lo} > {task.period}）")
        if task.mandatory_wcet > task.wcet_lo:
            bad("mandatory_wcet", f"要求 mandatory_wcet <= wcet_lo（{task.mandatory_wcet} > {task.wcet_lo}）")
        if task.extended_period is not None and task.extended_period < task.period:
            bad("extended_period", f"要求 extended_period >= period（{task.extended_period} < {task.period}）")
        if model_kind is ModelKind.EMC:
            if task.extended_period is None:
                bad("extended_period", "EMC 模型的 LO 任务必须设置 extended_period")
            if task.wcet_hi != task.wcet_lo:
                bad("wcet_hi", "EMC 模型的 LO 任务要求 wcet_hi == wcet_lo（以拉长周期而非削减预算降级）")
    return out


def validate(task_set: TaskSet) -> list[Violation]:
    """
    返回全部不变式违规项；空列表表示任务集合法。
    """

    out: list[Violation] = []
    seen: set[str] = set()
    for t in task_set.tasks:
        if t.id in seen:
            out.append(Violation(t.id, "id", "任务 id 重复"))
        seen.add(t.id)
        out.extend(_check_task(t, task_set.model_kind))
    return out


def ensure_valid(task_set: TaskSet) -> None:
    violations = validate(task_set)
    if violations:
        raise InvalidTaskSetError(violations)


def task_utilizations(task: Task, model_kind: ModelKind) -> tuple[Fraction, Fraction]:
    """
    单任务 (u_lo, u_hi)。EMC 的 LO 任务在 HI 模式下以 extended_period 为除数。
    """

    u_lo = task.wcet_lo / task.period
    if task.is_lo and model_kind is ModelKind.EMC and task.extended_period is not None:
        return u_lo, task.wcet_lo / task.extended_period
    return u_lo, task.wcet_hi / task.period


def utilizations(task_set: TaskSet) -> UtilizationSummary:
    """
    计算精确的四个聚合利用率。任务集不合法时抛出 InvalidTaskSetError。
    """

    ensure_valid(task_set)
    u_lo_lo = u_lo_hi = u_hi_lo = u_hi_hi = Fraction(0)
    per_task: dict[str, tuple[Fraction, Fraction]] = {}
    for t in task_set.tasks:
        u_lo, u_hi = task_utilizations(t, task_set.model_kind)
        per_task[t.id] = (u_lo, u_hi)
        if t.is_hi:
            u_hi_lo += u_lo
            u_hi_hi += u_hi
        else:
            u_lo_lo += u_lo
            u_lo_hi += u_hi
    return UtilizationSummary(u_lo_lo, u_lo_hi, u_hi_lo, u_hi_hi, per_task)


def hyperperiod(task_set: TaskSet) -> int | None:
    """
    周期均为整数时返回最小公倍数，否则返回 None。
    """

    periods = [t.period for t in task_set.tasks]
    if not periods or any(p.denominator != 1 for p in periods):
        return None
    return math.lcm(*(p.numerator for p in periods))

"""
轨迹检查器：把 IMC/EMC 执行语义写成断言，对任意轨迹（仿真产出或手工构造）逐事件回放。

检查项：
- 事件时间单调，且至多一次模式切换；
- 任一时刻至多一个作业在运行，只启动活跃作业；
- 执行量不超过当前模式预算，挂起只发生在预算用尽时；
- 模式切换只能由执行满 C^LO 的 HI 作业触发；
- 切换时刻 IMC 的 LO 作业若已执行 >= C^HI 必须被挂起；
- 无截止期错失（含轨迹未报告的错失）；
- 有就绪作业时处理器不空闲，运行作业的（虚拟）截止期在活跃作业中最小。

截止期与预算由检查器按任务集独立推算，不读取仿真器内部状态。
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from itertools import groupby

from edfvd_lab.model import ModelKind, Task, TaskSet
from edfvd_lab.sim.trace import EventKind, Trace, TraceEvent


class ViolationKind(str, Enum):
    TIME_ORDER = "time_order"
    MULTIPLE_SWITCH = "multiple_mode_switch"
    CONCURRENT_RUNNING = "concurrent_running"
    INACTIVE_JOB = "inactive_job"
    BUDGET = "budget_exceeded"
    PREMATURE_SUSPEND = "premature_suspend"
    SWITCH_WITHOUT_OVERRUN = "switch_without_overrun"
    SUSPENSION_RULE = "suspension_rule"
    DEADLINE_MISS = "deadline_miss"
    IDLE_WITH_READY = "idle_with_ready"
    EDF_ORDER = "edf_order"


@dataclass(frozen=True)
class TraceViolation:
    kind: ViolationKind
    time: Fraction
    task_id: str | None
    job_index: int | None
    message: str

    def __str__(self) -> str:
        who = "" if self.task_id is None else f" {self.task_id}#{self.job_index}"
        return f"[{self.kind.value}] t={self.time}{who}: {self.message}"


@dataclass(eq=False)
class _JobView:
    task: Task
    order: int
    index: int
    release: Fraction
    deadline: Fraction
    virtual_deadline: Fraction
    executed: Fraction = Fraction(0)
    over_budget_reported: bool = False


class _Replay:
    def __init__(self, task_set: TaskSet, x: Fraction) -> None:
        self.task_set = task_set
        self.x = Fraction(x)
        self.emc = task_set.model_kind is ModelKind.EMC
        self.order = {t.id: i for i, t in enumerate(task_set.tasks)}
        self.hi_mode = False
        self.switch_time: Fraction | None = None
        self.now = Fraction(0)
        self.jobs: dict[tuple[str, int], _JobView] = {}
        self.active: dict[tuple[str, int], _JobView] = {}
        self.running: _JobView | None = None
        self.reported_miss: set[tuple[str, int]] = set()
        self.violations: list[TraceViolation] = []

    def flag(self, kind: ViolationKind, msg: str, job: _JobView | None = None, key=None) -> None:
        task_id, index = (job.task.id, job.index) if job is not None else (key or (None, None))
        self.violations.append(TraceViolation(kind, self.now, task_id, index, msg))

    def budget(self, job: _JobView) -> Fraction:
        task = job.task
        if not self.hi_mode:
            return task.wcet_lo
        if task.is_lo and self.emc:
            return task.wcet_lo
        return task.wcet_hi

    def priority(self, job: _JobView) -> Fraction:
        if job.task.is_hi and not self.hi_mode:
            return job.virtual_deadline
        return job.deadline

    def advance(self, t: Fraction) -> None:
        job = self.running
        elapsed = t - self.now
        self.now = t
        if job is not None:
            job.executed += elapsed
            if job.executed > self.budget(job) and not job.over_budget_reported:
                job.over_budget_reported = True
                self.flag(ViolationKind.BUDGET, f"执行量 {job.executed} 超过预算 {self.budget(job)}", job)

    def _lookup(self, ev: TraceEvent) -> _JobView | None:
        key = (ev.task_id, ev.job_index)
        job = self.active.get(key)
        if job is None:
            self.flag(ViolationKind.INACTIVE_JOB, f"{ev.kind.value} 指向非活跃作业", key=key)
        return job

    def _retire(self, job: _JobView) -> None:
        self.active.pop((job.task.id, job.index), None)
        if self.running is job:
            self.running = None

    def release(self, ev: TraceEvent) -> None:
        try:
            task = self.task_set.task(ev.task_id)
        except KeyError:
            self.flag(ViolationKind.INACTIVE_JOB, "释放了未知任务", key=(ev.task_id, ev.job_index))
            return
        period = task.extended_period if (self.hi_mode and self.emc and task.is_lo) else task.period
        job = _JobView(
            task=task,
            order=self.order[task.id],
            index=int(ev.job_index),
            release=self.now,
            deadline=self.now + period,
            virtual_deadline=self.now + self.x * task.period if task.is_hi else self.now + period,
        )
        key = (task.id, job.index)
        self.jobs[key] = job
        self.active[key] = job

    def start(self, ev: TraceEvent) -> None:
        job = self._lookup(ev)
        if job is None:
            return
        if self.running is not None and self.running is not job:
            self.flag(ViolationKind.CONCURRENT_RUNNING, f"{self.running.task.id}#{self.running.index} 仍在运行", job)
        self.running = job

    def preempt(self, ev: TraceEvent) -> None:
        job = self._lookup(ev)
        if job is not None and self.running is job:
            self.running = None

    def complete(self, ev: TraceEvent) -> None:
        job = self._lookup(ev)
        if job is None:
            return
        if self.now > job.deadline:
            self.reported_miss.add((job.task.id, job.index))
            self.flag(ViolationKind.DEADLINE_MISS, f"完成时刻晚于截止期 {job.deadline}", job)
        self._retire(job)

    def suspend(self, ev: TraceEvent) -> None:
        job = self._lookup(ev)
        if job is None:
            return
        if job.executed < self.budget(job):
            self.flag(ViolationKind.PREMATURE_SUSPEND, f"执行量 {job.executed} 未达到预算 {self.budget(job)} 即被挂起", job)
        self._retire(job)

    def mode_switch(self, ev: TraceEvent) -> None:
        if self.hi_mode:
            self.flag(ViolationKind.MULTIPLE_SWITCH, "出现第二次模式切换")
            return
        job = self.active.get((ev.task_id, ev.job_index))
        if job is None or not job.task.is_hi or job.executed != job.task.wcet_lo:
            self.flag(ViolationKind.SWITCH_WITHOUT_OVERRUN, "切换不是由执行满 C^LO 的 HI 作业触发", key=(ev.task_id, ev.job_index))
        self.hi_mode = True
        self.switch_time = self.now
        if self.emc:
            for task in self.task_set.lo_tasks:
                latest = [j for (tid, _), j in self.jobs.items() if tid == task.id]
                if not latest:
                    continue
                last = max(latest, key=lambda j: j.index)
                if last.release <= self.now < last.release + task.period:
                    last.deadline = last.release + task.extended_period

    def miss(self, ev: TraceEvent) -> None:
        key = (ev.task_id, ev.job_index)
        self.reported_miss.add(key)
        self.flag(ViolationKind.DEADLINE_MISS, "轨迹报告截止期错失", key=key)
        job = self.active.get(key)
        if job is not None:
            self._retire(job)

    def after_group(self, t: Fraction) -> None:
        if self.switch_time == t and not self.emc:
            for job in self.active.values():
                if job.task.is_lo and job.executed >= job.task.wcet_hi:
                    self.flag(ViolationKind.SUSPENSION_RULE, "切换时已执行 >= C^HI 的 LO 作业未被挂起", job)

        for key, job in list(self.active.items()):
            if job.deadline <= t and key not in self.reported_miss:
                self.reported_miss.add(key)
                self.flag(ViolationKind.DEADLINE_MISS, f"截止期 {job.deadline} 已过但作业未完成且未报告", job)

        live = [j for k, j in self.active.items() if k not in self.reported_miss]
        if not live:
            return
        if self.running is None:
            self.flag(ViolationKind.IDLE_WITH_READY, f"{len(live)} 个作业就绪但处理器空闲")
            return
        best = min(self.priority(j) for j in live)
        if self.priority(self.running) > best:
            self.flag(
                ViolationKind.EDF_ORDER,
                f"运行作业的截止期 {self.priority(self.running)} 大于就绪作业的最小截止期 {best}",
                self.running,
            )


_HANDLERS = {
    EventKind.RELEASE: _Replay.release,
    EventKind.START: _Replay.start,
    EventKind.PREEMPT: _Replay.preempt,
    EventKind.COMPLETE: _Replay.complete,
    EventKind.SUSPEND: _Replay.suspend,
    EventKind.MODE_SWITCH: _Replay.mode_switch,
    EventKind.DEADLINE_MISS: _Replay.miss,
}


def check_trace(task_set: TaskSet, x: Fraction, trace: Trace) -> list[TraceViolation]:
    """
    回放轨迹并返回全部违规项；空列表表示轨迹符合执行语义且无错失。
    """

    replay = _Replay(task_set, x)
    last_t: Fraction | None = None
    for t, group in groupby(trace.events, key=lambda e: e.time):
        if last_t is not None and t < last_t:
            replay.now = t
            replay.flag(ViolationKind.TIME_ORDER, f"事件时间 {t} 早于前一事件 {last_t}")
            continue
        replay.advance(t)
        for ev in group:
            _HANDLERS[ev.kind](replay, ev)
        replay.after_group(t)
        last_t = t
    return replay.violations

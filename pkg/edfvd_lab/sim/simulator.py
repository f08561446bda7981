"""
单处理器 EDF-VD 离散事件仿真器（IMC / EMC 执行语义）。

执行语义：
1) 系统从 LO 模式开始；作业严格周期释放（零星模型下最密集的合法到达）；
2) LO 模式下 HI 作业按虚拟截止期 a_i + x·T_i 排序，LO 作业按真实截止期排序；
3) HI 作业执行满 C^LO 仍未完成时立即切换到 HI 模式，此后 HI 作业按真实截止期排序、预算 C^HI；
4) 切换时刻：IMC 的 LO 作业若已执行 >= C^HI 则挂起到下次释放，否则最多执行到 C^HI；
   EMC 的跨越切换时刻的 LO 作业截止期延长为 a_i + T^max，后续释放间隔为 T^max；
5) LO 模式下 LO 作业执行满 C^LO 被挂起（不触发切换）；
6) 作业的实际需求由场景决定，需求低于当前模式预算时提前完成。

同一时刻的处理顺序：结算正在运行的作业 → 检测截止期错失 → 释放新作业 → 调度。
截止期相同时按任务声明顺序、再按作业序号决胜。全部时间量为精确有理数。
不实现 HI → LO 的回切。
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Any

from edfvd_lab.model import ModelKind, Task, TaskSet, ensure_valid, hyperperiod
from edfvd_lab.sim.scenario import Scenario
from edfvd_lab.sim.trace import DeadlineMiss, EventKind, Trace, TraceEvent


class Mode(str, Enum):
    LO = "LO"
    HI = "HI"


class JobState(str, Enum):
    READY = "Ready"
    RUNNING = "Running"
    SUSPENDED = "Suspended"
    COMPLETED = "Completed"
    MISSED = "Missed"


@dataclass(eq=False)
class Job:
    task: Task
    order: int
    index: int
    release: Fraction
    abs_deadline: Fraction
    virtual_deadline: Fraction | None
    demand: Fraction
    budget: Fraction
    executed: Fraction = Fraction(0)
    state: JobState = JobState.READY

    @property
    def task_id(self) -> str:
        return self.task.id

    @property
    def stop_at(self) -> Fraction:
        # 执行量达到此值时作业结束（完成、挂起或触发切换）
        return min(self.demand, self.budget)


@dataclass(frozen=True)
class HorizonPolicy:
    hyperperiod_multiplier: int = 2
    max_period_multiplier: int = 20

    @classmethod
    def from_config(cls, cfg: dict[str, Any] | None) -> HorizonPolicy:
        cfg = cfg or {}
        return cls(
            hyperperiod_multiplier=int(cfg.get("hyperperiod_multiplier", 2)),
            max_period_multiplier=int(cfg.get("max_period_multiplier", 20)),
        )


def default_horizon(task_set: TaskSet, policy: HorizonPolicy | None = None) -> Fraction:
    """
    周期均为整数且 2×超周期不超过 20×最大周期时取前者，否则取 20×最大周期。
    """

    policy = policy or HorizonPolicy()
    if not task_set.tasks:
        return Fraction(0)
    cap = policy.max_period_multiplier * max(t.period for t in task_set.tasks)
    h = hyperperiod(task_set)
    if h is not None and policy.hyperperiod_multiplier * h <= cap:
        return Fraction(policy.hyperperiod_multiplier * h)
    return Fraction(cap)


class EdfVdSimulator:
    """
    一个实例对应一次仿真，单线程持有全部状态；并行时每个场景各建一个实例。
    """

    def __init__(self, task_set: TaskSet, x: Fraction, scenario: Scenario, horizon: Fraction | None = None) -> None:
        ensure_valid(task_set)
        x = Fraction(x)
        if not (0 < x <= 1):
            raise ValueError(f"x 必须位于 (0,1]，实际为 {x}")
        if horizon is None:
            horizon = default_horizon(task_set)
        horizon = Fraction(horizon)
        if task_set.tasks and horizon < max(t.period for t in task_set.tasks):
            raise ValueError(f"仿真视野 {horizon} 小于最大周期")

        self.task_set = task_set
        self.x = x
        self.scenario = scenario
        self.horizon = horizon
        self.trigger = scenario.resolve_trigger(task_set, horizon)

        self.now = Fraction(0)
        self.mode = Mode.LO
        self.running: Job | None = None
        self.trace = Trace()
        self._active: list[Job] = []
        self._order = {t.id: i for i, t in enumerate(task_set.tasks)}
        self._next_release: dict[str, Fraction] = {t.id: Fraction(0) for t in task_set.tasks}
        self._last_release: dict[str, Fraction] = {}
        self._release_count: dict[str, int] = {t.id: 0 for t in task_set.tasks}

    @property
    def _emc(self) -> bool:
        return self.task_set.model_kind is ModelKind.EMC

    def _emit(self, kind: EventKind, job: Job | None = None) -> None:
        self.trace.events.append(
            TraceEvent(
                time=self.now,
                kind=kind,
                task_id=None if job is None else job.task_id,
                job_index=None if job is None else job.index,
            )
        )

    def _period_in_mode(self, task: Task) -> Fraction:
        if self.mode is Mode.HI and self._emc and task.is_lo:
            return task.extended_period
        return task.period

    def _budget_in_mode(self, task: Task) -> Fraction:
        if self.mode is Mode.LO:
            return task.wcet_lo
        if task.is_lo and self._emc:
            return task.wcet_lo
        return task.wcet_hi

    def _demand(self, task: Task, index: int) -> Fraction:
        if task.is_hi and (self.mode is Mode.HI or self.trigger == (task.id, index)):
            return task.wcet_hi
        return task.wcet_lo * self.scenario.demand_fraction(self._order[task.id], index)

    def _priority(self, job: Job) -> tuple[Fraction, int, int]:
        if job.task.is_hi and self.mode is Mode.LO:
            return job.virtual_deadline, job.order, job.index
        return job.abs_deadline, job.order, job.index

    def _retire(self, job: Job, state: JobState, kind: EventKind) -> None:
        job.state = state
        self._active.remove(job)
        if self.running is job:
            self.running = None
        self._emit(kind, job)

    def _release_due(self) -> None:
        for task in self.task_set.tasks:
            while self._next_release[task.id] <= self.now:
                release = self._next_release[task.id]
                period = self._period_in_mode(task)
                index = self._release_count[task.id]
                job = Job(
                    task=task,
                    order=self._order[task.id],
                    index=index,
                    release=release,
                    abs_deadline=release + period,
                    virtual_deadline=release + self.x * task.period if task.is_hi else None,
                    demand=self._demand(task, index),
                    budget=self._budget_in_mode(task),
                )
                self._release_count[task.id] = index + 1
                self._last_release[task.id] = release
                self._next_release[task.id] = release + period
                self._active.append(job)
                self._emit(EventKind.RELEASE, job)
                if job.budget == 0:
                    self._retire(job, JobState.SUSPENDED, EventKind.SUSPEND)

    def _switch_mode(self, trigger: Job) -> None:
        self.mode = Mode.HI
        self.trace.mode_switch_time = self.now
        self._emit(EventKind.MODE_SWITCH, trigger)

        for job in list(self._active):
            task = job.task
            if task.is_hi:
                job.budget = task.wcet_hi
                job.demand = task.wcet_hi
            elif not self._emc:
                if job.executed >= task.wcet_hi:
                    self._retire(job, JobState.SUSPENDED, EventKind.SUSPEND)
                else:
                    job.budget = task.wcet_hi

        if self._emc:
            for task in self.task_set.lo_tasks:
                last = self._last_release.get(task.id)
                if last is None or not (last <= self.now < last + task.period):
                    continue
                stretched = last + task.extended_period
                self._next_release[task.id] = stretched
                for job in self._active:
                    if job.task is task and job.release == last:
                        job.abs_deadline = stretched

    def _settle_running(self) -> None:
        job = self.running
        if job is None or job.executed < job.stop_at:
            return
        if job.executed >= job.demand:
            self._retire(job, JobState.COMPLETED, EventKind.COMPLETE)
        elif job.task.is_hi and self.mode is Mode.LO:
            self._switch_mode(job)
        else:
            self._retire(job, JobState.SUSPENDED, EventKind.SUSPEND)

    def _detect_misses(self) -> None:
        for job in list(self._active):
            if job.abs_deadline <= self.now and job.executed < job.demand:
                self._retire(job, JobState.MISSED, EventKind.DEADLINE_MISS)
                self.trace.misses.append(DeadlineMiss(job.task_id, job.index, self.now))

    def _dispatch(self) -> None:
        if not self._active:
            return
        best = min(self._active, key=self._priority)
        if best is self.running:
            return
        if self.running is not None:
            self.running.state = JobState.READY
            self._emit(EventKind.PREEMPT, self.running)
        best.state = JobState.RUNNING
        self.running = best
        self._emit(EventKind.START, best)

    def _next_event_time(self) -> Fraction:
        candidates = [self.horizon]
        candidates.extend(t for t in self._next_release.values() if t < self.horizon)
        if self.running is not None:
            candidates.append(self.now + self.running.stop_at - self.running.executed)
        candidates.extend(j.abs_deadline for j in self._active if j.abs_deadline > self.now)
        return min(candidates)

    def _advance(self, t: Fraction) -> None:
        if self.running is not None:
            self.running.executed += t - self.now
        self.now = t

    def run(self) -> Trace:
        self._release_due()
        self._dispatch()
        while self.now < self.horizon:
            self._advance(self._next_event_time())
            self._settle_running()
            self._detect_misses()
            # 视野末端不再释放新作业，但仍完成调度，保证轨迹末尾满足工作守恒
            if self.now < self.horizon:
                self._release_due()
            self._dispatch()
        return self.trace


def simulate(
    task_set: TaskSet,
    x: Fraction,
    scenario: Scenario,
    horizon: Fraction | None = None,
) -> Trace:
    return EdfVdSimulator(task_set, x, scenario, horizon).run()

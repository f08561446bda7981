"""
仿真场景：决定哪个 HI 作业越过 C^LO 从而触发模式切换，以及其余作业的实际执行需求。

说明：
- LO_CONFORMING：所有作业都在 C^LO 内完成，不发生模式切换；
- SWITCH_AT_JOB：指定 HI 任务的第 job_index 个作业（从 0 计）执行到 C^HI；
- FULL_BUDGETS：由种子随机选出触发作业（只在 C^HI > C^LO 的 HI 任务中选），其余作业都执行满 C^LO。

LO_CONFORMING / SWITCH_AT_JOB 可选带种子：带种子时，LO 模式下非触发作业的需求从 (0, C^LO]
中抽取（步长 C^LO/DEMAND_STEPS），按 (种子, 任务声明序号, 作业序号) 独立抽样，与释放顺序无关；
不带种子时需求恰为 C^LO。LO 作业的需求在任何模式下都按同样规则确定，再由系统按当前模式预算截断。
切换之后所有未完成及新释放的 HI 作业需求都是 C^HI（HI 模式最坏负载）。
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

import numpy as np

from edfvd_lab.model import TaskSet

# 场景随机抽样使用的 RNG 算法，写入生成清单与文档
RNG_ALGORITHM = "numpy.PCG64"

# 需求抽样的离散步数：需求取 C^LO·k/DEMAND_STEPS，k ∈ [1, DEMAND_STEPS]
DEMAND_STEPS = 1000


class ScenarioKind(str, Enum):
    LO_CONFORMING = "lo"
    SWITCH_AT_JOB = "switch"
    FULL_BUDGETS = "full"


@dataclass(frozen=True)
class Scenario:
    kind: ScenarioKind
    hi_task_id: str | None = None
    job_index: int | None = None
    rng_seed: int | None = None

    @classmethod
    def lo_conforming(cls, rng_seed: int | None = None) -> Scenario:
        return cls(ScenarioKind.LO_CONFORMING, rng_seed=None if rng_seed is None else int(rng_seed))

    @classmethod
    def switch_at_job(cls, hi_task_id: str, job_index: int, rng_seed: int | None = None) -> Scenario:
        if job_index < 0:
            raise ValueError("job_index 不能为负")
        return cls(
            ScenarioKind.SWITCH_AT_JOB,
            hi_task_id=hi_task_id,
            job_index=int(job_index),
            rng_seed=None if rng_seed is None else int(rng_seed),
        )

    @classmethod
    def full_budgets(cls, rng_seed: int) -> Scenario:
        return cls(ScenarioKind.FULL_BUDGETS, rng_seed=int(rng_seed))

    @classmethod
    def parse(cls, text: str) -> Scenario:
        """
        解析命令行场景描述：lo[@<seed>] | switch:<task>:<job>[@<seed>] | full:<seed>。
        """

        raw = (text or "").strip()
        seed: int | None = None
        if not raw.startswith("full:"):
            base, sep, tail = raw.rpartition("@")
            if sep:
                if not tail.isdigit():
                    raise ValueError(f"场景种子不合法：{text!r}")
                raw, seed = base, int(tail)

        if raw == "lo":
            return cls.lo_conforming(seed)
        if raw.startswith("switch:"):
            body = raw[len("switch:"):]
            task_id, sep, job = body.rpartition(":")
            if not sep or not task_id:
                raise ValueError(f"场景格式应为 switch:<task>:<job>，实际为 {text!r}")
            try:
                return cls.switch_at_job(task_id, int(job), seed)
            except ValueError as e:
                raise ValueError(f"场景作业序号不合法：{text!r}") from e
        if raw.startswith("full:"):
            try:
                return cls.full_budgets(int(raw[len("full:"):]))
            except ValueError as e:
                raise ValueError(f"场景种子不合法：{text!r}") from e
        raise ValueError(f"未知场景：{text!r}（可选 lo[@<seed>] / switch:<task>:<job>[@<seed>] / full:<seed>）")

    def describe(self) -> str:
        if self.kind is ScenarioKind.FULL_BUDGETS:
            return f"full:{self.rng_seed}"
        text = f"switch:{self.hi_task_id}:{self.job_index}" if self.kind is ScenarioKind.SWITCH_AT_JOB else "lo"
        return text if self.rng_seed is None else f"{text}@{self.rng_seed}"

    @property
    def samples_demand(self) -> bool:
        return self.kind is not ScenarioKind.FULL_BUDGETS and self.rng_seed is not None

    def demand_fraction(self, task_order: int, job_index: int) -> Fraction:
        """
        非触发作业的需求占 C^LO 的比例，位于 (0, 1]；不抽样的场景恒为 1。
        """

        if not self.samples_demand:
            return Fraction(1)
        rng = np.random.Generator(np.random.PCG64([int(self.rng_seed), int(task_order), int(job_index)]))
        return Fraction(int(rng.integers(1, DEMAND_STEPS + 1)), DEMAND_STEPS)

    def resolve_trigger(self, task_set: TaskSet, horizon: Fraction) -> tuple[str, int] | None:
        """
        返回触发模式切换的 (HI 任务 id, 作业序号)；不切换时返回 None。
        """

        if self.kind is ScenarioKind.LO_CONFORMING:
            return None
        if self.kind is ScenarioKind.SWITCH_AT_JOB:
            task = task_set.task(self.hi_task_id)
            if not task.is_hi:
                raise ValueError(f"{self.hi_task_id} 不是 HI 任务，不能触发模式切换")
            return task.id, int(self.job_index)

        candidates = [t for t in task_set.hi_tasks if t.wcet_hi > t.wcet_lo]
        if not candidates:
            return None
        rng = np.random.Generator(np.random.PCG64(self.rng_seed))
        task = candidates[int(rng.integers(len(candidates)))]
        releases = max(1, math.ceil(horizon / task.period))
        return task.id, int(rng.integers(releases))

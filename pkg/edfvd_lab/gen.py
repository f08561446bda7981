"""
随机 IMC/EMC 任务集生成器（接受率实验协议）。

生成规则：
- 任务以概率 p_criticality 为 HI，否则为 LO；
- 周期 T 为 period_range 内均匀整数，利用率 u 均匀取自 util_range，C^LO = u·T；
- HI 任务 C^HI = R·C^LO（R 每个任务重新抽取，或固定）；LO 任务 C^HI = λ·C^LO；
- EMC 的 LO 任务 C^HI = C^LO，拉长周期 T^max = T/λ；
- 任务逐个加入，直到 U_avg = (U^LO + U^HI)/2 落入 [U-tol, U+tol]；超出上界的任务丢弃重抽。

取整约定：C^LO 向上取整到 1/wcet_denominator；随机 R 保留三位小数；C^HI 按比值精确相乘。
RNG 为 numpy Generator(PCG64)，同一种子产生逐位相同的任务集。
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace
from fractions import Fraction
from typing import Any

import numpy as np

from edfvd_lab.model import Criticality, ModelKind, Task, TaskSet, task_utilizations
from edfvd_lab.sim.scenario import RNG_ALGORITHM
from edfvd_lab.utils.json_utils import format_rational, parse_rational


class GenerationError(ValueError):
    """
    在重试上限内无法命中目标利用率窗口（或无法抽到满足约束的任务）。
    """

    def __init__(self, retries: int, message: str = "") -> None:
        self.retries = retries
        super().__init__(message or f"任务集生成失败：重试 {retries} 次仍未命中目标利用率窗口")


def _pair(value: Any, *, field: str) -> tuple[Any, Any]:
    if isinstance(value, (int, float, str, Fraction)) and not isinstance(value, bool):
        return value, value
    items = list(value)
    if len(items) != 2:
        raise ValueError(f"{field} 必须是两个元素的区间")
    return items[0], items[1]


@dataclass(frozen=True)
class GenParams:
    p_criticality: float = 0.5
    period_range: tuple[int, int] = (100, 1000)
    util_range: tuple[float, float] = (0.05, 0.2)
    r_range: tuple[Fraction, Fraction] = (Fraction(3, 2), Fraction(5, 2))
    lambda_: Fraction = Fraction(1, 2)
    u_target: Fraction = Fraction(7, 10)
    tolerance: Fraction = Fraction(1, 20)
    rng_seed: int = 1
    model_kind: ModelKind = ModelKind.IMC
    retry_cap: int = 10000
    wcet_denominator: int = 1000

    def __post_init__(self) -> None:
        t_lo, t_hi = (int(v) for v in _pair(self.period_range, field="period_range"))
        u_lo, u_hi = (float(v) for v in _pair(self.util_range, field="util_range"))
        r_lo, r_hi = (parse_rational(v, field="r_range") for v in _pair(self.r_range, field="r_range"))
        normalized = {
            "p_criticality": float(self.p_criticality),
            "period_range": (t_lo, t_hi),
            "util_range": (u_lo, u_hi),
            "r_range": (r_lo, r_hi),
            "lambda_": parse_rational(self.lambda_, field="lambda"),
            "u_target": parse_rational(self.u_target, field="u_target"),
            "tolerance": parse_rational(self.tolerance, field="tolerance"),
            "model_kind": ModelKind(str(getattr(self.model_kind, "value", self.model_kind)).upper()),
        }
        for key, value in normalized.items():
            object.__setattr__(self, key, value)

        if not (0 <= self.p_criticality <= 1):
            raise ValueError(f"p_criticality 必须位于 [0,1]，实际为 {self.p_criticality}")
        if not (0 < t_lo <= t_hi):
            raise ValueError(f"period_range 不合法：{self.period_range}")
        if not (0 < u_lo <= u_hi <= 1):
            raise ValueError(f"util_range 不合法：{self.util_range}")
        if not (1 <= r_lo <= r_hi):
            raise ValueError(f"r_range 必须满足 1 <= 下界 <= 上界：{self.r_range}")
        if not (0 < self.lambda_ <= 1):
            raise ValueError(f"lambda 必须位于 (0,1]，实际为 {self.lambda_}")
        if self.tolerance < 0:
            raise ValueError("tolerance 不能为负")
        if self.retry_cap < 1 or self.wcet_denominator < 1:
            raise ValueError("retry_cap 与 wcet_denominator 必须为正")

    @classmethod
    def from_config(cls, cfg: dict[str, Any] | None = None, **overrides: Any) -> GenParams:
        """
        由 YAML/JSON 配置构造；配置键 lambda 对应字段 lambda_，overrides 优先。
        """

        merged: dict[str, Any] = {}
        for key, value in (cfg or {}).items():
            if key == "lambda":
                key = "lambda_"
            if key in cls.__dataclass_fields__:
                merged[key] = value
        merged.update({k: v for k, v in overrides.items() if v is not None})
        for key in ("period_range", "util_range", "r_range"):
            if key in merged and isinstance(merged[key], list):
                merged[key] = tuple(merged[key])
        return cls(**merged)

    @property
    def r_fixed(self) -> bool:
        return self.r_range[0] == self.r_range[1]

    @property
    def alpha(self) -> Fraction | None:
        """
        R 固定时实验记录用的 α = 1/R。
        """

        return 1 / self.r_range[0] if self.r_fixed else None

    def with_seed(self, seed: int) -> GenParams:
        return replace(self, rng_seed=int(seed))

    def to_dict(self) -> dict[str, Any]:
        out = asdict(self)
        out["lambda"] = format_rational(out.pop("lambda_"))
        out["u_target"] = format_rational(self.u_target)
        out["tolerance"] = format_rational(self.tolerance)
        out["r_range"] = [format_rational(r) for r in self.r_range]
        out["period_range"] = list(self.period_range)
        out["util_range"] = list(self.util_range)
        out["model_kind"] = self.model_kind.value
        return out


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed)))


def worker_seed(base_seed: int, index: int) -> int:
    """
    并行工作单元的种子：base_seed + index。
    """

    return int(base_seed) + int(index)


def _draw_ratio(params: GenParams, rng: np.random.Generator) -> Fraction:
    r_lo, r_hi = params.r_range
    if r_lo == r_hi:
        return r_lo
    r = rng.uniform(float(r_lo), float(r_hi))
    return Fraction(round(r * 1000), 1000)


def generate_task(params: GenParams, rng: np.random.Generator, task_id: str = "tau1") -> Task:
    """
    先抽关键性，再抽周期、利用率（HI 任务还有 R），直到 C^HI <= T。
    """

    hi = bool(rng.random() < params.p_criticality)
    t_lo, t_hi = params.period_range
    u_lo, u_hi = params.util_range
    den = params.wcet_denominator

    for _ in range(params.retry_cap):
        period = Fraction(int(rng.integers(t_lo, t_hi + 1)))
        u = rng.uniform(u_lo, u_hi)
        wcet_lo = Fraction(math.ceil(u * float(period) * den), den)
        wcet_lo = min(wcet_lo, period)
        if hi:
            wcet_hi = _draw_ratio(params, rng) * wcet_lo
            if wcet_hi > period:
                continue
            return Task(id=task_id, period=period, criticality=Criticality.HI, wcet_lo=wcet_lo, wcet_hi=wcet_hi)
        if params.model_kind is ModelKind.EMC:
            return Task(
                id=task_id,
                period=period,
                criticality=Criticality.LO,
                wcet_lo=wcet_lo,
                wcet_hi=wcet_lo,
                extended_period=period / params.lambda_,
            )
        return Task(
            id=task_id,
            period=period,
            criticality=Criticality.LO,
            wcet_lo=wcet_lo,
            wcet_hi=params.lambda_ * wcet_lo,
        )
    raise GenerationError(params.retry_cap, f"重试 {params.retry_cap} 次仍无法抽到 C^HI <= T 的 HI 任务")


def _avg_contribution(task: Task, model_kind: ModelKind) -> Fraction:
    u_lo, u_hi = task_utilizations(task, model_kind)
    return (u_lo + u_hi) / 2


def generate_task_set(params: GenParams, rng: np.random.Generator | None = None) -> TaskSet:
    """
    逐个加入任务直到 U_avg 进入目标窗口；使加权和越过上界的任务被丢弃并重抽。
    """

    if params.u_target < Fraction(repr(params.util_range[0])):
        raise ValueError(f"u_target={params.u_target} 低于单任务利用率下界 {params.util_range[0]}")
    rng = rng if rng is not None else make_rng(params.rng_seed)
    low = params.u_target - params.tolerance
    high = params.u_target + params.tolerance

    tasks: list[Task] = []
    total = Fraction(0)
    retries = 0
    while total < low:
        task = generate_task(params, rng, task_id=f"tau{len(tasks) + 1}")
        contribution = _avg_contribution(task, params.model_kind)
        if total + contribution > high:
            retries += 1
            if retries > params.retry_cap:
                raise GenerationError(retries)
            continue
        tasks.append(task)
        total += contribution
    return TaskSet(tasks=tuple(tasks), model_kind=params.model_kind)


def generation_manifest(params: GenParams, seeds: list[int], files: list[str]) -> dict[str, Any]:
    """
    生成批次的清单：参数、RNG 算法、R 的抽取粒度与每个文件对应的种子。
    """

    return {
        "rng": RNG_ALGORITHM,
        "r_policy": "fixed" if params.r_fixed else "per_task",
        "alpha": None if params.alpha is None else format_rational(params.alpha),
        "params": params.to_dict(),
        "sets": [{"file": f, "seed": s} for f, s in zip(files, seeds)],
    }

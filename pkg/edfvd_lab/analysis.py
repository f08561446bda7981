"""
EDF-VD 下 IMC/EMC 任务集的利用率充分测试。

判定分三支：
1) U_LO^LO + U_HI^HI <= 1：最坏情况预留，普通 EDF 即可调度，无需缩放截止期；
2) 否则求 x 的可行区间 [x_min, x_max]：
   - LO 模式：x >= U_HI^LO / (1 - U_LO^LO)
   - HI 模式：x·U_LO^LO + (1-x)·U_LO^HI + U_HI^HI <= 1
   区间非空则以 EDF-VD 调度，x 由策略在区间内选取；
3) 区间为空或任一模式过载：不可调度，并列出失败的条件。

EMC 任务集经 model.utilizations 折算（HI 模式 LO 利用率以拉长周期为除数）后走同一测试。
全部计算使用精确有理数。
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

from edfvd_lab.model import TaskSet, UtilizationSummary, utilizations


class XPolicy(str, Enum):
    MIN = "min"
    MID = "mid"
    MAX = "max"


class BoundKind(str, Enum):
    VALUE = "value"
    UNCONSTRAINED = "unconstrained"
    INFEASIBLE = "infeasible"


class FailedCondition(str, Enum):
    """
    不可调度原因：
    - LOW_MODE：LO 模式过载（U_LO^LO >= 1 或 x_min >= 1）
    - HIGH_MODE：HI 模式过载（U_HI^HI + U_LO^HI 超过 1，或等号情形下仍过载）
    - PRECONDITION：区间公式的前提（U_HI^HI + U_LO^HI < 1、U_LO^LO < 1、U_LO^LO > U_LO^HI）不成立
    - EMPTY_RANGE：两端都有定义但 x_min > x_max（或区间内不存在 (0,1) 中的 x）
    """

    LOW_MODE = "low_mode_overload"
    HIGH_MODE = "high_mode_overload"
    PRECONDITION = "range_precondition"
    EMPTY_RANGE = "empty_x_range"


@dataclass(frozen=True)
class XBound:
    kind: BoundKind
    value: Fraction | None = None

    @classmethod
    def of(cls, value: Fraction) -> XBound:
        return cls(BoundKind.VALUE, Fraction(value))

    @classmethod
    def unconstrained(cls) -> XBound:
        return cls(BoundKind.UNCONSTRAINED)

    @classmethod
    def infeasible(cls) -> XBound:
        return cls(BoundKind.INFEASIBLE)

    @property
    def feasible(self) -> bool:
        return self.kind is not BoundKind.INFEASIBLE


@dataclass(frozen=True)
class XRange:
    """
    截止期缩放因子 x 的可行区间 [lower, upper]（upper 已截断到 1 以下）。
    """

    lower: Fraction
    upper: Fraction

    @property
    def nonempty(self) -> bool:
        return self.lower <= self.upper and self.lower < 1

    def contains(self, x: Fraction) -> bool:
        return self.lower <= x <= self.upper

    def pick(self, policy: XPolicy) -> Fraction:
        """
        按策略在区间内取 x。lower 为 0 时（无 HI 利用率）MIN 取区间内最小的正点 upper/1000。
        """

        if policy is XPolicy.MAX:
            return self.upper
        if policy is XPolicy.MID:
            return (self.lower + self.upper) / 2
        if self.lower > 0:
            return self.lower
        return self.upper / 1000


class VerdictKind(str, Enum):
    WORST_CASE_RESERVATION = "WorstCaseReservationEDF"
    SCHEDULABLE_EDF_VD = "SchedulableEDFVD"
    UNSCHEDULABLE = "Unschedulable"


@dataclass(frozen=True)
class Verdict:
    kind: VerdictKind
    x_range: XRange | None = None
    chosen_x: Fraction | None = None
    reasons: tuple[FailedCondition, ...] = ()

    @property
    def schedulable(self) -> bool:
        return self.kind is not VerdictKind.UNSCHEDULABLE

    @property
    def simulation_x(self) -> Fraction | None:
        """
        仿真时使用的 x：EDF-VD 分支取 chosen_x；预留分支取 1（虚拟截止期等于真实截止期，即普通 EDF）。
        """

        if self.kind is VerdictKind.SCHEDULABLE_EDF_VD:
            return self.chosen_x
        if self.kind is VerdictKind.WORST_CASE_RESERVATION:
            return Fraction(1)
        return None


def worst_case_reservation_test(u: UtilizationSummary) -> bool:
    """
    U_HI^HI + U_LO^LO <= 1 时普通 EDF 即可调度（不缩放截止期、不削减 LO 预算）。
    """

    return u.u_hi_hi + u.u_lo_lo <= 1


def low_mode_x_min(u: UtilizationSummary) -> XBound:
    """
    LO 模式下 x 的下界 U_HI^LO / (1 - U_LO^LO)；U_LO^LO >= 1 时 LO 模式过载。
    """

    if u.u_lo_lo >= 1:
        return XBound.infeasible()
    return XBound.of(u.u_hi_lo / (1 - u.u_lo_lo))


def high_mode_x_max(u: UtilizationSummary) -> XBound:
    """
    HI 模式下 x 的上界。

    - U_LO^LO > U_LO^HI：(1 - (U_HI^HI + U_LO^HI)) / (U_LO^LO - U_LO^HI)，分子为负则不可行；
    - U_LO^LO == U_LO^HI：条件与 x 无关，U_LO^HI + U_HI^HI <= 1 时不受约束，否则不可行。
    """

    if u.u_lo_hi > u.u_lo_lo:
        raise ValueError("利用率汇总不合法：U_LO^HI 不能大于 U_LO^LO")
    numerator = 1 - (u.u_hi_hi + u.u_lo_hi)
    if u.u_lo_lo == u.u_lo_hi:
        return XBound.unconstrained() if numerator >= 0 else XBound.infeasible()
    if numerator < 0:
        return XBound.infeasible()
    return XBound.of(numerator / (u.u_lo_lo - u.u_lo_hi))


def _cap_below_one(lower: Fraction, upper: XBound) -> Fraction:
    # 截断宽度取 [lower, 1] 的千分之一，保证 x 严格小于 1
    ceiling = 1 - (1 - lower) / 1000
    if upper.kind is BoundKind.UNCONSTRAINED:
        return ceiling
    return min(upper.value, ceiling)


def feasible_x_range(u: UtilizationSummary) -> tuple[XRange | None, tuple[FailedCondition, ...]]:
    """
    由两个模式的界求 x 的可行区间（不考虑预留分支）。

    返回 (区间, 失败原因)；区间为 None 时原因非空。
    """

    reasons: list[FailedCondition] = []
    lo = low_mode_x_min(u)
    hi = high_mode_x_max(u)

    if not lo.feasible or lo.value >= 1:
        reasons.append(FailedCondition.LOW_MODE)
    if not hi.feasible:
        reasons.append(FailedCondition.HIGH_MODE)
    if hi.kind is BoundKind.VALUE and u.u_hi_hi + u.u_lo_hi >= 1:
        reasons.append(FailedCondition.PRECONDITION)
    if reasons:
        return None, tuple(reasons)

    upper = _cap_below_one(lo.value, hi)
    x_range = XRange(lower=lo.value, upper=upper)
    if not x_range.nonempty or upper <= 0:
        return None, (FailedCondition.EMPTY_RANGE,)
    return x_range, ()


def evaluate(u: UtilizationSummary, x_policy: XPolicy = XPolicy.MIN) -> Verdict:
    """
    在利用率汇总上执行完整判定（imc_test 的核心）。
    """

    if worst_case_reservation_test(u):
        return Verdict(VerdictKind.WORST_CASE_RESERVATION)
    x_range, reasons = feasible_x_range(u)
    if x_range is None:
        return Verdict(VerdictKind.UNSCHEDULABLE, reasons=reasons)
    return Verdict(VerdictKind.SCHEDULABLE_EDF_VD, x_range=x_range, chosen_x=x_range.pick(x_policy))


def imc_test(task_set: TaskSet, x_policy: XPolicy = XPolicy.MIN) -> Verdict:
    """
    IMC/EMC 任务集的充分测试。任务集不合法时抛出 InvalidTaskSetError。
    """

    return evaluate(utilizations(task_set), x_policy)


def virtual_deadlines(task_set: TaskSet, x: Fraction) -> dict[str, Fraction]:
    """
    HI 任务的相对虚拟截止期 x·T_i；LO 任务不出现在结果中。
    """

    x = Fraction(x)
    if not (0 < x < 1):
        raise ValueError(f"x 必须位于 (0,1)，实际为 {x}")
    return {t.id: x * t.period for t in task_set.hi_tasks}


def emc_necessary_test(u: UtilizationSummary) -> bool:
    """
    EMC 任务集的必要条件：U_HI^HI + U_LO^HI <= 1。
    """

    return u.u_hi_hi + u.u_lo_hi <= 1


def classical_edfvd_test(u: UtilizationSummary) -> bool:
    """
    经典 MC 模型（切换时丢弃全部 LO 任务）的 EDF-VD 测试，只使用 U_LO^LO、U_HI^LO、U_HI^HI。

    以交叉相乘形式实现：U_HI^LO · U_LO^LO <= (1 - U_HI^HI)(1 - U_LO^LO)。
    """

    if u.u_lo_lo + u.u_hi_hi <= 1:
        return True
    if u.u_lo_lo >= 1 or u.u_hi_hi >= 1:
        return False
    return u.u_hi_lo * u.u_lo_lo <= (1 - u.u_hi_hi) * (1 - u.u_lo_lo)

"""
EDF-VD（IMC）加速因子及其辅助解析量的数值实现。

记号：
- alpha = U_HI^LO / U_HI^HI，取值 (0,1]
- lam   = U_LO^HI / U_LO^LO，取值 [0,1]
- b = U_LO^LO，c = U_HI^HI 作为函数参数出现

说明：
- 本模块使用浮点（含平方根），不参与任何可调度性判定；
- alpha == 1 或 lam == 1 时加速因子恒为 1，直接短路，避免闭式分母退化；
- speedup_grid 基于 numpy 向量化，供表格与网格搜索使用。
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

# 常用 (alpha, lam) 取值，与经典加速因子对照表一致
TABLE_ALPHAS: tuple[float, ...] = (0.1, 0.3, 1 / 3, 0.5, 0.7, 0.9, 1.0)
TABLE_LAMBDAS: tuple[float, ...] = (0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 1.0)


@dataclass(frozen=True)
class RatioPair:
    alpha: float
    lam: float

    def __post_init__(self) -> None:
        a, lm = float(self.alpha), float(self.lam)
        if not (0 < a <= 1):
            raise ValueError(f"alpha 必须位于 (0,1]，实际为 {self.alpha}")
        if not (0 <= lm <= 1):
            raise ValueError(f"lambda 必须位于 [0,1]，实际为 {self.lam}")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "lam", lm)

    @property
    def degenerate(self) -> bool:
        return self.alpha == 1.0 or self.lam == 1.0


def _require_interior(r: RatioPair) -> None:
    if r.degenerate:
        raise ValueError(f"该量只在 alpha<1 且 lambda<1 时有定义（alpha={r.alpha}, lambda={r.lam}）")


def _quadratic_a(a: float, lm: float) -> float:
    return a * lm - a * lm * lm - a + 1


def _sqrt_term(a: float) -> float:
    return math.sqrt(4 * a - 3 * a * a)


def speedup_factor(r: RatioPair) -> float:
    """
    f(alpha, lam) = 2(1-α)(αλ-αλ²-α+1) / [(1-αλ)((2-αλ-α) + (λ-1)√(4α-3α²))]，恒 >= 1。
    """

    if r.degenerate:
        return 1.0
    a, lm = r.alpha, r.lam
    num = 2 * (1 - a) * _quadratic_a(a, lm)
    den = (1 - a * lm) * ((2 - a * lm - a) + (lm - 1) * _sqrt_term(a))
    return num / den


def s_threshold(r: RatioPair) -> float:
    """
    利用率阈值 S(alpha, lam)：max(b+αc, λb+c) <= S 时任务集必通过 EDF-VD 测试。等于 1/speedup_factor。
    """

    if r.degenerate:
        return 1.0
    a, lm = r.alpha, r.lam
    num = (1 - a * lm) * ((2 - a * lm - a) + (lm - 1) * _sqrt_term(a))
    den = 2 * (1 - a) * _quadratic_a(a, lm)
    return num / den


def roots_b0(r: RatioPair) -> tuple[float, float]:
    """
    二次方程 (-αλ²+αλ-α+1)b² + (αλ+α-2)b + (1-α) = 0 的两根。

    返回 (区间 [0,1] 内的根, 大于 1 被舍弃的根)。
    """

    _require_interior(r)
    a, lm = r.alpha, r.lam
    qa = _quadratic_a(a, lm)
    mid = 2 - a * lm - a
    spread = (1 - lm) * _sqrt_term(a)
    return (mid - spread) / (2 * qa), (mid + spread) / (2 * qa)


def optimal_point(r: RatioPair) -> tuple[float, float, float]:
    """
    最坏情况点 (b0, c0, s0)：c0 = (1-λ)/(1-α)·b0，s0 = (1-αλ)/(1-α)·b0（= S）。
    """

    b0, _ = roots_b0(r)
    a, lm = r.alpha, r.lam
    c0 = (1 - lm) / (1 - a) * b0
    s0 = (1 - a * lm) / (1 - a) * b0
    return b0, c0, s0


def equation_system_residuals(r: RatioPair) -> tuple[float, float, float]:
    """
    把 optimal_point 代回三元方程组后的残差，理论上全为 0。
    """

    b0, c0, s0 = optimal_point(r)
    a, lm = r.alpha, r.lam
    return (
        b0 + a * c0 - s0,
        lm * b0 + c0 - s0,
        lm * b0 * b0 + (a * lm - a + 1) * b0 * c0 - (lm + 1) * b0 - c0 + 1,
    )


def piecewise_s(b, r: RatioPair):
    """
    以 b = U_LO^LO 为自变量的分段有理函数；在 b0 处取得最小值 S。

    b 可以是标量或 numpy 数组，取值 (0,1]。
    """

    _require_interior(r)
    arr = np.asarray(b, dtype=float)
    if np.any(arr <= 0) or np.any(arr > 1):
        raise ValueError("b 必须位于 (0,1]")
    a, lm = r.alpha, r.lam
    b0, _ = roots_b0(r)
    den = (a * lm - a + 1) * arr - 1
    first = ((a * lm * lm - a * lm) * arr * arr + arr - 1) / den
    second = ((1 - a) * arr * arr + (a * lm + a - 1) * arr - a) / den
    out = np.where(arr <= b0, first, second)
    if out.ndim == 0:
        return float(out)
    return out


def feasibility_margin(r: RatioPair, b: float, c: float) -> float:
    """
    EDF-VD 可行区间两端之差 (1-(c+λb))/(b-λb) - αc/(1-b)；非负即存在可用的 x。

    要求 0 < b < 1 且 lam < 1。
    """

    if not (0 < b < 1):
        raise ValueError(f"b 必须位于 (0,1)，实际为 {b}")
    if r.lam >= 1:
        raise ValueError("lambda == 1 时上界无定义")
    a, lm = r.alpha, r.lam
    return (1 - (c + lm * b)) / (b - lm * b) - a * c / (1 - b)


def speedup_grid(alphas: Iterable[float], lambdas: Iterable[float]) -> np.ndarray:
    """
    向量化计算加速因子矩阵，形状 (len(lambdas), len(alphas))，行对应 lambda。
    """

    a = np.asarray(list(alphas), dtype=float)[np.newaxis, :]
    lm = np.asarray(list(lambdas), dtype=float)[:, np.newaxis]
    if np.any(a <= 0) or np.any(a > 1):
        raise ValueError("alpha 必须位于 (0,1]")
    if np.any(lm < 0) or np.any(lm > 1):
        raise ValueError("lambda 必须位于 [0,1]")

    with np.errstate(divide="ignore", invalid="ignore"):
        num = 2 * (1 - a) * (a * lm - a * lm * lm - a + 1)
        den = (1 - a * lm) * ((2 - a * lm - a) + (lm - 1) * np.sqrt(4 * a - 3 * a * a))
        f = num / den
    return np.where((a == 1.0) | (lm == 1.0), 1.0, f)


def speedup_table(
    alphas: Iterable[float] = TABLE_ALPHAS,
    lambdas: Iterable[float] = TABLE_LAMBDAS,
) -> list[tuple[float, float, float]]:
    """
    返回 (lambda, alpha, f) 行，lambda 外层、alpha 内层。
    """

    alphas = list(alphas)
    lambdas = list(lambdas)
    grid = speedup_grid(alphas, lambdas)
    return [(lm, a, float(grid[i, j])) for i, lm in enumerate(lambdas) for j, a in enumerate(alphas)]


def max_speedup_search(
    grid_step: float,
    *,
    lam: float | None = None,
    alpha: float | None = None,
) -> tuple[float, float, float]:
    """
    在 alpha ∈ (0,1)、lambda ∈ [0,1) 的网格上搜索加速因子最大值。

    lam / alpha 给定时只在对应的行/列上搜索。返回 (alpha*, lambda*, f*)。
    """

    if not (0 < grid_step <= 0.01):
        raise ValueError(f"grid_step 必须位于 (0, 0.01]，实际为 {grid_step}")
    n = int(round(1 / grid_step))
    alphas = np.array([alpha], dtype=float) if alpha is not None else np.arange(1, n) * grid_step
    lambdas = np.array([lam], dtype=float) if lam is not None else np.arange(0, n) * grid_step

    grid = speedup_grid(alphas, lambdas)
    i, j = np.unravel_index(int(np.argmax(grid)), grid.shape)
    return float(alphas[j]), float(lambdas[i]), float(grid[i, j])

"""
文本工具：数值的可读格式化。
"""

from __future__ import annotations

from fractions import Fraction


def format_decimal(value: Fraction | float | int, places: int = 4) -> str:
    """
    按固定小数位输出数值（CSV 与终端展示共用）。
    """

    if places < 0:
        raise ValueError("places 必须为非负整数")
    return f"{float(value):.{places}f}"


def format_axis_value(value: Fraction | float | int) -> str:
    """
    扫描轴取值的紧凑十进制表示（0.4 → "0.4"，1/3 → "0.333333"）。
    """

    return f"{float(value):.6g}"


def describe_rational(value: Fraction) -> str:
    """
    同时给出精确值与近似值，例如 "18/25 (≈0.7200)"；整数直接输出。
    """

    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator} (≈{float(value):.4f})"

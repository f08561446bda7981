"""
JSON 工具：精确有理数与 JSON 之间的互转。

现实问题：
- 任务集文件里的时间量既可能写成数字（4、0.25），也可能写成 "p/q" 字符串；
- 浮点字面量必须按十进制文本解释（0.1 → 1/10），否则二进制误差会污染利用率比较；
- 输出时整数保持整数，非整数统一写成 "p/q"，保证读回后逐位一致。
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Any


def parse_rational(value: Any, *, field: str = "value") -> Fraction:
    """
    将 JSON 值解析为 Fraction。

    接受：int、float（按十进制文本解释）、"p/q" 或十进制字符串。
    bool 与其他类型抛出 ValueError。
    """

    if isinstance(value, bool):
        raise ValueError(f"{field} 不能是布尔值")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    if isinstance(value, str):
        text = value.strip()
        if not text:
            raise ValueError(f"{field} 为空字符串")
        try:
            return Fraction(text)
        except (ValueError, ZeroDivisionError) as e:
            raise ValueError(f"{field} 无法解析为有理数：{value!r}") from e
    raise ValueError(f"{field} 的类型不受支持：{type(value).__name__}")


def format_rational(value: Fraction | int) -> int | str:
    """
    将有理数编码为 JSON 值：整数输出 int，其他输出 "p/q" 字符串。
    """

    q = Fraction(value)
    if q.denominator == 1:
        return q.numerator
    return f"{q.numerator}/{q.denominator}"


def read_json_object(path: Path) -> dict[str, Any]:
    """
    读取 JSON 文件并要求顶层为对象(dict)。
    """

    text = path.read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ValueError(f"JSON 解析失败：{e.msg}（{path}）") from e
    if not isinstance(data, dict):
        raise ValueError(f"JSON 顶层必须是对象(dict)（{path}）")
    return data


def write_json(path: Path, payload: Any) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_json(payload), encoding="utf-8", newline="\n")


def dumps_json(payload: Any) -> str:
    return json.dumps(payload, ensure_ascii=False, indent=2) + "\n"

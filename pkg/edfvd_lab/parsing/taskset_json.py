"""
任务集文件格式（JSON）的解析与输出。

格式：
{ "model": "IMC"|"EMC",
  "tasks": [ { "id", "period", "criticality", "wcet_lo", "wcet_hi",
               "importance"?, "mandatory_wcet"?, "extended_period"? } ] }

有理数可写成数字或 "p/q" 字符串；importance 缺省为 1，mandatory_wcet 缺省为 0。
解析只做格式层面的检查，模型不变式交给 model.validate。
"""

from __future__ import annotations

from pathlib import Path
from typing import Any

from edfvd_lab.model import Criticality, ModelKind, Task, TaskSet
from edfvd_lab.utils.json_utils import format_rational, parse_rational, read_json_object, write_json


class TaskSetFormatError(ValueError):
    """
    任务集文件结构错误（缺字段、类型不对、枚举值未知等）。
    """


_REQUIRED = ("id", "period", "criticality", "wcet_lo", "wcet_hi")


def _parse_enum(enum_cls, raw: Any, *, field: str):
    text = str(raw or "").strip().upper()
    try:
        return enum_cls(text)
    except ValueError as e:
        allowed = "/".join(m.value for m in enum_cls)
        raise TaskSetFormatError(f"{field} 必须是 {allowed}，实际为 {raw!r}") from e


def task_from_dict(item: dict[str, Any], *, position: int) -> Task:
    if not isinstance(item, dict):
        raise TaskSetFormatError(f"tasks[{position}] 必须是对象")
    missing = [k for k in _REQUIRED if k not in item]
    if missing:
        raise TaskSetFormatError(f"tasks[{position}] 缺少字段：{', '.join(missing)}")

    task_id = str(item["id"]).strip()
    if not task_id:
        raise TaskSetFormatError(f"tasks[{position}].id 不能为空")

    def rat(key: str, default=None):
        if key not in item or item[key] is None:
            return default
        try:
            return parse_rational(item[key], field=f"{task_id}.{key}")
        except ValueError as e:
            raise TaskSetFormatError(str(e)) from e

    period = rat("period")
    deadline = rat("deadline", period)
    return Task(
        id=task_id,
        period=period,
        deadline=deadline,
        criticality=_parse_enum(Criticality, item["criticality"], field=f"{task_id}.criticality"),
        wcet_lo=rat("wcet_lo"),
        wcet_hi=rat("wcet_hi"),
        importance=rat("importance", parse_rational(1)),
        mandatory_wcet=rat("mandatory_wcet", parse_rational(0)),
        extended_period=rat("extended_period"),
    )


def task_set_from_dict(data: dict[str, Any]) -> TaskSet:
    model_kind = _parse_enum(ModelKind, data.get("model", "IMC"), field="model")
    tasks_raw = data.get("tasks")
    if not isinstance(tasks_raw, list):
        raise TaskSetFormatError("tasks 必须是数组")
    tasks = tuple(task_from_dict(item, position=i) for i, item in enumerate(tasks_raw))
    return TaskSet(tasks=tasks, model_kind=model_kind)


def task_to_dict(task: Task) -> dict[str, Any]:
    out: dict[str, Any] = {
        "id": task.id,
        "period": format_rational(task.period),
        "criticality": task.criticality.value,
        "wcet_lo": format_rational(task.wcet_lo),
        "wcet_hi": format_rational(task.wcet_hi),
    }
    if task.is_lo:
        out["importance"] = format_rational(task.importance)
        out["mandatory_wcet"] = format_rational(task.mandatory_wcet)
    if task.extended_period is not None:
        out["extended_period"] = format_rational(task.extended_period)
    return out


def task_set_to_dict(task_set: TaskSet) -> dict[str, Any]:
    return {
        "model": task_set.model_kind.value,
        "tasks": [task_to_dict(t) for t in task_set.tasks],
    }


def load_task_set(path: Path) -> TaskSet:
    try:
        data = read_json_object(path)
    except ValueError as e:
        raise TaskSetFormatError(str(e)) from e
    return task_set_from_dict(data)


def dump_task_set(task_set: TaskSet, path: Path) -> None:
    write_json(path, task_set_to_dict(task_set))

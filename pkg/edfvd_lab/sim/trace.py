"""
仿真轨迹：事件序列、模式切换时刻与截止期错失记录，以及 JSON 读写。

JSON 结构：
{ "mode_switch": t | null,
  "events": [ {"t", "kind", "task", "job"} ],
  "misses": [ {"t", "task", "job"} ] }
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Any

from typing_extensions import TypedDict

from edfvd_lab.utils.json_utils import format_rational, parse_rational, read_json_object, write_json


class EventKind(str, Enum):
    RELEASE = "Release"
    START = "Start"
    PREEMPT = "Preempt"
    COMPLETE = "Complete"
    SUSPEND = "Suspend"
    MODE_SWITCH = "ModeSwitch"
    DEADLINE_MISS = "DeadlineMiss"


class EventDict(TypedDict):
    t: int | str
    kind: str
    task: str | None
    job: int | None


@dataclass(frozen=True)
class TraceEvent:
    time: Fraction
    kind: EventKind
    task_id: str | None = None
    job_index: int | None = None

    def to_dict(self) -> EventDict:
        return {
            "t": format_rational(self.time),
            "kind": self.kind.value,
            "task": self.task_id,
            "job": self.job_index,
        }


@dataclass(frozen=True)
class DeadlineMiss:
    task_id: str
    job_index: int
    time: Fraction


@dataclass
class Trace:
    events: list[TraceEvent] = field(default_factory=list)
    mode_switch_time: Fraction | None = None
    misses: list[DeadlineMiss] = field(default_factory=list)

    @property
    def has_miss(self) -> bool:
        return bool(self.misses)

    def events_of(self, kind: EventKind) -> list[TraceEvent]:
        return [e for e in self.events if e.kind is kind]

    def to_dict(self) -> dict[str, Any]:
        return {
            "mode_switch": None if self.mode_switch_time is None else format_rational(self.mode_switch_time),
            "events": [e.to_dict() for e in self.events],
            "misses": [
                {"t": format_rational(m.time), "task": m.task_id, "job": m.job_index} for m in self.misses
            ],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> Trace:
        raw_switch = data.get("mode_switch")
        events: list[TraceEvent] = []
        for i, item in enumerate(data.get("events") or []):
            if not isinstance(item, dict):
                raise ValueError(f"events[{i}] 必须是对象")
            try:
                kind = EventKind(str(item.get("kind")))
            except ValueError as e:
                raise ValueError(f"events[{i}].kind 未知：{item.get('kind')!r}") from e
            job = item.get("job")
            events.append(
                TraceEvent(
                    time=parse_rational(item.get("t"), field=f"events[{i}].t"),
                    kind=kind,
                    task_id=item.get("task"),
                    job_index=None if job is None else int(job),
                )
            )
        misses = [
            DeadlineMiss(
                task_id=str(m.get("task")),
                job_index=int(m.get("job")),
                time=parse_rational(m.get("t"), field=f"misses[{i}].t"),
            )
            for i, m in enumerate(data.get("misses") or [])
        ]
        return cls(
            events=events,
            mode_switch_time=None if raw_switch is None else parse_rational(raw_switch, field="mode_switch"),
            misses=misses,
        )


def load_trace(path: Path) -> Trace:
    return Trace.from_dict(read_json_object(path))


def dump_trace(trace: Trace, path: Path) -> None:
    write_json(path, trace.to_dict())

"""
结果输出管理：扫描结果 CSV 与终端文本报告。

要求：
- CSV 列固定为 axis,value,test,accepted,total,ratio,sim_misses，表头必有，UTF-8，LF 行尾；
- 同一结果重复输出逐字节一致（ratio 固定小数位，value 使用紧凑十进制）；
- 文本报告按块累积，最后一次性导出。
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from edfvd_lab.analysis import Verdict, VerdictKind
from edfvd_lab.model import TaskSet, UtilizationSummary
from edfvd_lab.orchestration.sweep import SweepResult, SweepRow
from edfvd_lab.utils.text_utils import describe_rational, format_axis_value, format_decimal

CSV_COLUMNS = ("axis", "value", "test", "accepted", "total", "ratio", "sim_misses")


def render_csv(result: SweepResult, *, places: int = 4) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in result.rows:
        writer.writerow(
            [r.axis, format_axis_value(r.value), r.test, r.accepted, r.total, format_decimal(r.ratio, places), r.sim_misses]
        )
    return buf.getvalue()


def emit_csv(result: SweepResult, path: Path, *, places: int = 4) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(render_csv(result, places=places), encoding="utf-8", newline="\n")


def load_csv(path: Path) -> SweepResult:
    """
    读回 emit_csv 的输出。表头不符时抛出 ValueError。
    """

    text = path.read_text(encoding="utf-8")
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or tuple(header) != CSV_COLUMNS:
        raise ValueError(f"CSV 表头不符：期望 {','.join(CSV_COLUMNS)}（{path}）")
    rows: list[SweepRow] = []
    for i, rec in enumerate(reader, start=2):
        if not rec:
            continue
        if len(rec) != len(CSV_COLUMNS):
            raise ValueError(f"CSV 第 {i} 行列数不符（{path}）")
        axis, value, test, accepted, total, _ratio, sim_misses = rec
        rows.append(
            SweepRow(
                axis=axis,
                value=float(value),
                test=test,
                accepted=int(accepted),
                total=int(total),
                sim_misses=int(sim_misses),
            )
        )
    return SweepResult(rows=rows)


@dataclass
class TextReport:
    """
    终端报告的内存表示：按块累积，块之间空一行。
    """

    title: str
    blocks: list[str] = field(default_factory=list)

    def add_block(self, text: str) -> None:
        self.blocks.append(text.rstrip() + "\n")

    def add_fields(self, pairs: list[tuple[str, str]]) -> None:
        width = max((len(k) for k, _ in pairs), default=0)
        self.add_block("\n".join(f"{k.ljust(width)}  {v}" for k, v in pairs))

    def export_text(self) -> str:
        return "\n".join([f"== {self.title} ==", ""] + self.blocks)


_VERDICT_LABELS = {
    VerdictKind.WORST_CASE_RESERVATION: "可调度（最坏情况预留，普通 EDF 即可）",
    VerdictKind.SCHEDULABLE_EDF_VD: "可调度（EDF-VD）",
    VerdictKind.UNSCHEDULABLE: "不可调度",
}


def utilization_fields(u: UtilizationSummary) -> list[tuple[str, str]]:
    return [
        ("U_LO^LO", describe_rational(u.u_lo_lo)),
        ("U_LO^HI", describe_rational(u.u_lo_hi)),
        ("U_HI^LO", describe_rational(u.u_hi_lo)),
        ("U_HI^HI", describe_rational(u.u_hi_hi)),
        ("U_avg", describe_rational(u.u_avg)),
    ]


def verdict_fields(verdict: Verdict) -> list[tuple[str, str]]:
    pairs = [("判定", f"{verdict.kind.value} · {_VERDICT_LABELS[verdict.kind]}")]
    if verdict.x_range is not None:
        pairs.append(("x 区间", f"[{describe_rational(verdict.x_range.lower)}, {describe_rational(verdict.x_range.upper)}]"))
    if verdict.chosen_x is not None:
        pairs.append(("选取 x", describe_rational(verdict.chosen_x)))
    if verdict.reasons:
        pairs.append(("失败条件", ", ".join(r.value for r in verdict.reasons)))
    return pairs


def render_analysis(
    task_set: TaskSet,
    u: UtilizationSummary,
    verdict: Verdict,
    *,
    source: str,
    virtual: dict[str, Fraction] | None = None,
    extra: list[tuple[str, str]] | None = None,
) -> str:
    report = TextReport(title=f"EDF-VD 分析：{source}")
    report.add_fields(
        [
            ("模型", task_set.model_kind.value),
            ("任务数", f"{len(task_set)}（HI {len(task_set.hi_tasks)} / LO {len(task_set.lo_tasks)}）"),
        ]
    )
    report.add_fields(utilization_fields(u))
    report.add_fields(verdict_fields(verdict) + list(extra or []))
    if virtual:
        report.add_block("虚拟截止期：\n" + "\n".join(f"- {k}: {describe_rational(v)}" for k, v in virtual.items()))
    return report.export_text()

"""Result rows and their CSV / JSON renderings."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass
from typing import Optional, Sequence

from ..oracle import MeasureReport
from .instance import Instance, rational_text

CSV_COLUMNS = (
    "voter_id",
    "label",
    "weight",
    "out_degree",
    "in_degree",
    "measure",
    "positive_criticality",
    "negative_criticality",
    "engine",
    "k",
    "epsilon",
    "delta",
)

EXPERIMENT_COLUMNS = ("preset", "panel", "x_name", "x", "series", "y", "engine", "k")


@dataclass
class ResultRow:
    voter_id: int
    label: str
    weight: int
    out_degree: int
    in_degree: int
    measure: float
    positive_criticality: Optional[float]
    negative_criticality: Optional[float]
    engine: str
    k: Optional[int] = None
    epsilon: Optional[float] = None
    delta: Optional[float] = None


def result_rows(inst: Instance, report: MeasureReport) -> list[ResultRow]:
    s = report.sampling if report.engine == "sample" else None
    ind = inst.graph.in_degrees
    rows = []
    for i in range(inst.n):
        rows.append(
            ResultRow(
                voter_id=i,
                label=inst.label(i),
                weight=inst.game.weights[i],
                out_degree=inst.graph.out_degree(i),
                in_degree=ind[i],
                measure=float(report.measure[i]),
                positive_criticality=None if report.positive is None else float(report.positive[i]),
                negative_criticality=None if report.negative is None else float(report.negative[i]),
                engine=report.engine,
                k=s["k"] if s else None,
                epsilon=s["epsilon"] if s else None,
                delta=s["delta"] if s else None,
            )
        )
    return rows


def _cell(value, digits: Optional[int]) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(round(value, digits) if digits is not None else value)
    return str(value)


def _rounded(d: dict, digits: Optional[int]) -> dict:
    if digits is None:
        return d
    return {k: round(v, digits) if isinstance(v, float) else v for k, v in d.items()}


def render_csv(records: Sequence[dict], columns: Sequence[str], digits: Optional[int] = None) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for rec in records:
        writer.writerow([_cell(rec[c], digits) for c in columns])
    return buf.getvalue()


def render_result(inst: Instance, report: MeasureReport, p_d, fmt: str, digits: Optional[int] = None) -> str:
    rows = [asdict(r) for r in result_rows(inst, report)]
    if fmt == "csv":
        return render_csv(rows, CSV_COLUMNS, digits)
    doc = {
        "engine": report.engine,
        "quota": rational_text(inst.game.quota),
        "p_d": None if p_d is None else rational_text(p_d),
        "sampling": report.sampling,
        "rows": [_rounded(r, digits) for r in rows],
    }
    return json.dumps(doc, indent=2) + "\n"


def render_experiment(preset: str, rows: Sequence[dict], fmt: str, full: bool, seed: int, digits: Optional[int] = None) -> str:
    if fmt == "csv":
        return render_csv(rows, EXPERIMENT_COLUMNS, digits)
    doc = {"preset": preset, "full": full, "seed": seed, "rows": [_rounded(dict(r), digits) for r in rows]}
    return json.dumps(doc, indent=2) + "\n"

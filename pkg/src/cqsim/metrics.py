"""Per-gate compression records, run summaries, and their CSV/JSON forms."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, fields

from .state import qubit_gain

CSV_COLUMNS = (
    "gate_index", "gate_label", "stride_count", "min_ratio", "mean_ratio",
    "max_chosen_delta", "bytes_before", "bytes_after", "elapsed_ns", "norm_after",
)
_INT_COLUMNS = {"gate_index", "stride_count", "bytes_before", "bytes_after", "elapsed_ns"}


@dataclass
class GateRecord:
    gate_index: int
    gate_label: str
    stride_count: int      # strides recompressed by this gate
    min_ratio: float       # over all strides after the gate
    mean_ratio: float
    max_chosen_delta: float
    bytes_before: int      # compressed state size before / after the gate
    bytes_after: int
    elapsed_ns: int
    norm_after: float


@dataclass
class RunSummary:
    overall_min_ratio: float
    qubit_gain: int
    total_elapsed: float
    threshold_violations: int = 0
    reference_elapsed: float | None = None
    overhead_factor: float | None = None
    fidelity: float | None = None


def summary_gain(min_ratio: float) -> int:
    """qubit_gain, except that an expanding run (ratio below 1) reports 0 rather than failing."""
    return qubit_gain(max(min_ratio, 1.0))


def summarize(records, fidelity: float | None = None, reference_time: float | None = None,
              threshold_violations: int = 0) -> RunSummary:
    records = list(records)
    if not records:
        raise ValueError("cannot summarize an empty run")
    overall = min(r.min_ratio for r in records)
    total = sum(r.elapsed_ns for r in records) / 1e9
    overhead = None
    if reference_time is not None:
        overhead = total / reference_time if reference_time > 0 else float("inf")
    return RunSummary(
        overall_min_ratio=overall,
        qubit_gain=summary_gain(overall),
        total_elapsed=total,
        threshold_violations=threshold_violations,
        reference_elapsed=reference_time,
        overhead_factor=overhead,
        fidelity=fidelity,
    )


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def emit_csv(records, out=None) -> str:
    """CSV with a header row; floats carry 17 significant digits."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in records:
        writer.writerow([_fmt(getattr(r, c)) for c in CSV_COLUMNS])
    text = buf.getvalue()
    if out is not None:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    return text


def read_csv(text: str) -> list[GateRecord]:
    rows = csv.DictReader(io.StringIO(text))
    if tuple(rows.fieldnames or ()) != CSV_COLUMNS:
        raise ValueError(f"unexpected CSV columns {rows.fieldnames}")
    out = []
    for row in rows:
        kw = {}
        for f in fields(GateRecord):
            v = row[f.name]
            kw[f.name] = v if f.name == "gate_label" else int(v) if f.name in _INT_COLUMNS else float(v)
        out.append(GateRecord(**kw))
    return out


def emit_summary_json(summary: RunSummary, out=None) -> str:
    """JSON object keyed by RunSummary field names; unset optional fields are omitted."""
    data = {k: v for k, v in asdict(summary).items() if v is not None}
    text = json.dumps(data, indent=2)
    if out is not None:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    return text

"""CSV schemas for every table the CLI emits.

Floats are written with ``repr`` so values round-trip exactly and repeated
runs are byte-identical. Each schema is a tuple of ``(column, parser)``;
``read_csv`` re-parses a file under its schema and rejects header drift.
"""

from __future__ import annotations

import csv
import io
import os
import tempfile
from pathlib import Path
from typing import Callable, Iterable, Sequence

from .errors import ValidationError


def _bool(text: str) -> bool:
    if text not in ("true", "false"):
        raise ValueError(f"expected true/false, got {text!r}")
    return text == "true"


def _opt_int(text: str):
    return None if text == "" else int(text)


Schema = Sequence[tuple[str, Callable[[str], object]]]

SEGMENT_SCHEMA: Schema = (
    ("segment_index", int),
    ("policy", str),
    ("quality_index", int),
    ("enhancement_index", int),
    ("qp", _opt_int),
    ("scale_ratio", float),
    ("bandwidth_bps", float),
    ("accuracy", float),
    ("encode_s", float),
    ("decode_s", float),
    ("transmit_s", float),
    ("enhance_s", float),
    ("inference_s", float),
    ("total_s", float),
    ("datasize_bits", float),
    ("utility", float),
    ("feasible", _bool),
    ("evaluations", int),
)

SUMMARY_SCHEMA: Schema = (
    ("policy", str),
    ("segments", int),
    ("mean_accuracy", float),
    ("mean_latency_s", float),
    ("mean_transmit_s", float),
    ("mean_datasize_bits", float),
    ("total_utility", float),
    ("feasibility_rate", float),
)

SWEEP_SCHEMA: Schema = (
    ("bitrate_bps", float),
    ("policy", str),
    ("mean_accuracy", float),
    ("mean_latency_s", float),
    ("feasibility_rate", float),
    ("mean_transmit_s", float),
    ("mean_datasize_bits", float),
    ("total_utility", float),
)

ORACLE_SCHEMA: Schema = (
    ("segment", int),
    ("bandwidth_bps", float),
    ("sa_utility", float),
    ("oracle_utility", float),
    ("gap", float),
    ("relative_gap", float),
    ("sa_evals", int),
    ("oracle_evals", int),
)


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def segment_rows(results) -> list[list]:
    rows = []
    for r in results:
        lat = r.latency
        rows.append([
            r.segment_index, r.policy, r.configuration.quality_index, r.configuration.enhancement_index,
            r.qp, r.scale_ratio, r.bandwidth_bps, r.accuracy,
            lat.encode_s, lat.decode_s, lat.transmit_s, lat.enhance_s, lat.inference_s, lat.total_s,
            r.datasize_bits, r.utility_value, r.feasible, r.evaluations,
        ])
    return rows


def summary_rows(summaries) -> list[list]:
    return [
        [s.policy, s.segments, s.mean_accuracy, s.mean_latency_s, s.mean_transmit_s,
         s.mean_datasize_bits, s.total_utility, s.feasibility_rate]
        for s in summaries
    ]


def sweep_rows(rows) -> list[list]:
    return [
        [r.bitrate_bps, r.policy, r.mean_accuracy, r.mean_latency_s, r.feasibility_rate,
         r.mean_transmit_s, r.mean_datasize_bits, r.total_utility]
        for r in rows
    ]


def to_csv(schema: Schema, rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([name for name, _ in schema])
    for row in rows:
        if len(row) != len(schema):
            raise ValueError(f"row has {len(row)} cells, schema has {len(schema)}")
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def parse_csv(schema: Schema, text: str) -> list[dict]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    expected = [name for name, _ in schema]
    if header != expected:
        raise ValidationError(f"CSV header {header} does not match schema {expected}")
    out = []
    for lineno, row in enumerate(reader, start=2):
        if len(row) != len(schema):
            raise ValidationError(f"line {lineno}: expected {len(schema)} cells, got {len(row)}")
        try:
            out.append({name: parse(cell) for (name, parse), cell in zip(schema, row)})
        except ValueError as exc:
            raise ValidationError(f"line {lineno}: {exc}") from None
    return out


def read_csv(schema: Schema, path) -> list[dict]:
    return parse_csv(schema, Path(path).read_text())


def write_atomic(path, text: str):
    """Write via a temp file in the same directory, then rename into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise

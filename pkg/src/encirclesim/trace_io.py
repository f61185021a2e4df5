"""Trace file I/O: versioned CSV and JSONL with the scenario embedded.

Floats are written in shortest round-trip form, so writing the same result
twice produces byte-identical files and reading one back is lossless.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np

from .scenario import ScenarioConfig
from .simulate import SimulationResult, StepRecord

TRACE_SCHEMA = 1

COLUMNS = ["k", "x1x", "x1y", "x2x", "x2y", "sx", "sy", "shx", "shy",
           "u1x", "u1y", "u2x", "u2y", "d12", "d1s", "d2s", "hx", "hy",
           "ehat", "es", "impulse", "sat1", "sat2"]


class TraceError(ValueError):
    """A trace file is malformed or incomplete."""


def record_to_values(rec: StepRecord) -> list:
    return [rec.k,
            rec.x1[0], rec.x1[1], rec.x2[0], rec.x2[1],
            rec.s[0], rec.s[1], rec.s_hat[0], rec.s_hat[1],
            rec.u1[0], rec.u1[1], rec.u2[0], rec.u2[1],
            rec.d12, rec.d1s, rec.d2s, rec.h[0], rec.h[1],
            rec.est_err_norm, rec.as_err_norm,
            int(rec.impulse), int(rec.sat1), int(rec.sat2)]


def record_from_mapping(row: dict) -> StepRecord:
    try:
        return StepRecord(
            k=int(row["k"]),
            x1=np.array([float(row["x1x"]), float(row["x1y"])]),
            x2=np.array([float(row["x2x"]), float(row["x2y"])]),
            s=np.array([float(row["sx"]), float(row["sy"])]),
            s_hat=np.array([float(row["shx"]), float(row["shy"])]),
            u1=np.array([float(row["u1x"]), float(row["u1y"])]),
            u2=np.array([float(row["u2x"]), float(row["u2y"])]),
            d12=float(row["d12"]), d1s=float(row["d1s"]), d2s=float(row["d2s"]),
            h=np.array([float(row["hx"]), float(row["hy"])]),
            est_err_norm=float(row["ehat"]), as_err_norm=float(row["es"]),
            impulse=bool(int(row["impulse"])),
            sat1=bool(int(row["sat1"])), sat2=bool(int(row["sat2"])),
        )
    except KeyError as exc:
        raise TraceError(f"trace row missing column {exc.args[0]!r}") from None
    except (TypeError, ValueError) as exc:
        raise TraceError(f"trace row has a malformed value: {exc}") from None


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def trace_to_csv(result: SimulationResult) -> str:
    buf = io.StringIO()
    buf.write(f"#schema {TRACE_SCHEMA}\n")
    buf.write(f"#seed {result.seed}\n")
    buf.write("#config " + json.dumps(result.config.to_dict(), sort_keys=True) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    for rec in result.records:
        writer.writerow([_fmt(v) for v in record_to_values(rec)])
    return buf.getvalue()


def trace_to_jsonl(result: SimulationResult) -> str:
    lines = [json.dumps({"t": "header", "schema": TRACE_SCHEMA, "seed": result.seed,
                         "config": result.config.to_dict()}, sort_keys=True)]
    for rec in result.records:
        obj = dict(zip(COLUMNS, record_to_values(rec)))
        obj = {key: (float(v) if isinstance(v, (float, np.floating)) else int(v))
               for key, v in obj.items()}
        lines.append(json.dumps(obj))
    return "\n".join(lines) + "\n"


def write_trace(path: str | Path, result: SimulationResult, fmt: str = "csv") -> None:
    if fmt == "csv":
        text = trace_to_csv(result)
    elif fmt == "jsonl":
        text = trace_to_jsonl(result)
    else:
        raise ValueError(f"unknown trace format {fmt!r} (expected csv or jsonl)")
    Path(path).write_text(text)


def read_trace(path: str | Path) -> tuple[ScenarioConfig, int, list[StepRecord]]:
    """Read a CSV or JSONL trace written by write_trace; format is sniffed."""
    text = Path(path).read_text()
    first = text.split("\n", 1)[0]
    if first.startswith("{"):
        return _read_jsonl(text)
    return _read_csv(text)


def _read_csv(text: str) -> tuple[ScenarioConfig, int, list[StepRecord]]:
    schema = None
    seed = None
    cfg = None
    body: list[str] = []
    for line in text.splitlines():
        if line.startswith("#schema"):
            schema = int(line.split(None, 1)[1])
        elif line.startswith("#seed"):
            seed = int(line.split(None, 1)[1])
        elif line.startswith("#config"):
            cfg = ScenarioConfig.from_dict(json.loads(line.split(None, 1)[1]))
        elif line.startswith("#") or not line.strip():
            continue
        else:
            body.append(line)
    if schema != TRACE_SCHEMA:
        raise TraceError(f"unsupported trace schema {schema!r} (expected {TRACE_SCHEMA})")
    if cfg is None or seed is None:
        raise TraceError("trace is missing its embedded #config/#seed header")
    if not body:
        raise TraceError("trace has no data rows")
    header = next(csv.reader([body[0]]))
    missing = [c for c in COLUMNS if c not in header]
    if missing:
        raise TraceError(f"trace is missing required column(s): {', '.join(missing)}")
    records = [record_from_mapping(dict(zip(header, row)))
               for row in csv.reader(body[1:]) if row]
    _check_monotonic(records)
    return cfg, seed, records


def _read_jsonl(text: str) -> tuple[ScenarioConfig, int, list[StepRecord]]:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    try:
        head = json.loads(lines[0])
    except (IndexError, json.JSONDecodeError) as exc:
        raise TraceError(f"malformed jsonl trace header: {exc}") from None
    if head.get("t") != "header" or head.get("schema") != TRACE_SCHEMA:
        raise TraceError(f"unsupported trace header: {head!r}")
    cfg = ScenarioConfig.from_dict(head["config"])
    records = [record_from_mapping(json.loads(ln)) for ln in lines[1:]]
    _check_monotonic(records)
    return cfg, int(head["seed"]), records


def _check_monotonic(records: list[StepRecord]) -> None:
    for i, rec in enumerate(records):
        if rec.k != i:
            raise TraceError(f"trace rows out of order: expected k={i}, found k={rec.k}")

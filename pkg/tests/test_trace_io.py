import dataclasses

import numpy as np
import pytest

from encirclesim import reference_scenario, run_scenario
from encirclesim.trace_io import (
    COLUMNS,
    TraceError,
    read_trace,
    trace_to_csv,
    write_trace,
)


@pytest.fixture(scope="module")
def result():
    cfg = dataclasses.replace(reference_scenario(), steps=60)
    return run_scenario(cfg, seed=7)


def test_csv_write_is_byte_stable(result, tmp_path):
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    write_trace(a, result)
    write_trace(b, result)
    assert a.read_bytes() == b.read_bytes()


def test_csv_roundtrip_lossless(result, tmp_path):
    path = tmp_path / "t.csv"
    write_trace(path, result)
    cfg, seed, records = read_trace(path)
    assert cfg == result.config
    assert seed == result.seed
    assert len(records) == len(result.records)
    for ra, rb in zip(result.records, records):
        np.testing.assert_array_equal(ra.x1, rb.x1)
        np.testing.assert_array_equal(ra.s_hat, rb.s_hat)
        np.testing.assert_array_equal(ra.h, rb.h)
        assert ra.d1s == rb.d1s
        assert ra.est_err_norm == rb.est_err_norm
        assert ra.impulse == rb.impulse and ra.sat1 == rb.sat1


def test_jsonl_roundtrip_lossless(result, tmp_path):
    path = tmp_path / "t.jsonl"
    write_trace(path, result, fmt="jsonl")
    cfg, seed, records = read_trace(path)
    assert cfg == result.config
    assert seed == result.seed
    for ra, rb in zip(result.records, records):
        np.testing.assert_array_equal(ra.x2, rb.x2)
        assert ra.d2s == rb.d2s


def test_header_has_schema_and_columns(result):
    text = trace_to_csv(result)
    lines = text.splitlines()
    assert lines[0] == "#schema 1"
    assert lines[1] == f"#seed {result.seed}"
    assert lines[2].startswith("#config {")
    assert lines[3] == ",".join(COLUMNS)


def test_missing_column_is_named(result, tmp_path):
    text = trace_to_csv(result)
    # drop the hx column wholesale
    lines = text.splitlines()
    idx = COLUMNS.index("hx")
    out = lines[:3]
    for line in lines[3:]:
        parts = line.split(",")
        del parts[idx]
        out.append(",".join(parts))
    path = tmp_path / "broken.csv"
    path.write_text("\n".join(out) + "\n")
    with pytest.raises(TraceError, match="hx"):
        read_trace(path)


def test_unknown_schema_rejected(result, tmp_path):
    text = trace_to_csv(result).replace("#schema 1", "#schema 99")
    path = tmp_path / "future.csv"
    path.write_text(text)
    with pytest.raises(TraceError, match="schema"):
        read_trace(path)


def test_out_of_order_rows_rejected(result, tmp_path):
    lines = trace_to_csv(result).splitlines()
    lines[5], lines[6] = lines[6], lines[5]
    path = tmp_path / "shuffled.csv"
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(TraceError, match="out of order"):
        read_trace(path)


def test_unknown_format_rejected(result, tmp_path):
    with pytest.raises(ValueError, match="format"):
        write_trace(tmp_path / "t.bin", result, fmt="parquet")

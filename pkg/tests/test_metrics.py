import json

import pytest

from cqsim.metrics import CSV_COLUMNS, GateRecord, emit_csv, emit_summary_json, read_csv, summarize


def record(i, ratio, elapsed=1000):
    return GateRecord(i, "h", 2, ratio, ratio * 1.5, 1e-5, 4096, 2048, elapsed, 1.0000000000000002)


def test_summarize_picks_minimum():
    s = summarize([record(0, 8192.0), record(1, 12.0), record(2, 5.7)])
    assert s.overall_min_ratio == 5.7
    assert s.qubit_gain == 2
    assert s.total_elapsed == pytest.approx(3e-6)
    assert s.fidelity is None and s.overhead_factor is None


@pytest.mark.parametrize("ratio, gain", [(1.02, 0), (445144.0, 18), (0.9993, 0)])
def test_summary_gain(ratio, gain):
    assert summarize([record(0, ratio)]).qubit_gain == gain


def test_overhead_factor():
    s = summarize([record(0, 4.0, elapsed=30_000_000)], fidelity=0.99, reference_time=0.01)
    assert s.overhead_factor == pytest.approx(3.0)
    assert s.fidelity == 0.99


def test_summarize_empty():
    with pytest.raises(ValueError):
        summarize([])


def test_csv_header_and_round_trip(tmp_path):
    recs = [record(0, 1 / 3), record(1, 2 ** 0.5)]
    text = emit_csv(recs, tmp_path / "m.csv")
    assert text.splitlines()[0] == ",".join(CSV_COLUMNS)
    assert (tmp_path / "m.csv").read_text() == text
    assert read_csv(text) == recs


def test_csv_empty_run_is_header_only():
    assert emit_csv([]) == ",".join(CSV_COLUMNS) + "\n"


def test_read_csv_rejects_other_columns():
    with pytest.raises(ValueError):
        read_csv("a,b\n1,2\n")


def test_summary_json(tmp_path):
    s = summarize([record(0, 33.0)], fidelity=0.995, reference_time=1e-6)
    data = json.loads(emit_summary_json(s, tmp_path / "s.json"))
    assert data["overall_min_ratio"] == 33.0
    assert data["qubit_gain"] == 5
    assert data["fidelity"] == 0.995
    assert json.loads((tmp_path / "s.json").read_text()) == data
    bare = json.loads(emit_summary_json(summarize([record(0, 2.0)])))
    assert "fidelity" not in bare and "overhead_factor" not in bare

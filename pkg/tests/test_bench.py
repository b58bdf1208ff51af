import pytest

from sdcred import bench


def test_small_suite_and_csv_roundtrip(tmp_path):
    rows = bench.run_suite("all", max_claims=4, max_disclosed=2, repetitions=10, seed=3)
    ops = [r.operation for r in rows]
    assert ops.count("issue") == 4
    for op in ("present-text", "present-range", "verify-text", "verify-range"):
        assert ops.count(op) == 2
    assert all(r.repetitions >= 10 and r.wall_time_us > 0 for r in rows)
    assert [r.claim_count for r in rows if r.operation == "issue"] == [1, 2, 3, 4]
    assert all(r.disclosed_count == 0 for r in rows if r.operation == "issue")

    path = tmp_path / "bench.csv"
    bench.write_csv(rows, path)
    again = bench.read_csv(path)
    assert [(r.operation, r.claim_count, r.disclosed_count) for r in again] == [
        (r.operation, r.claim_count, r.disclosed_count) for r in rows
    ]
    assert path.read_text().splitlines()[0] == "operation,claim_count,disclosed_count,wall_time_us,repetitions"


def test_rejects_too_few_repetitions_and_unknown_suite():
    with pytest.raises(ValueError):
        bench.run_suite("issue", max_claims=2, repetitions=5)
    with pytest.raises(ValueError):
        bench.run_suite("plot", max_claims=2)


def test_read_csv_checks_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("op,n\nissue,1\n")
    with pytest.raises(ValueError):
        bench.read_csv(path)

import json

import pytest
from hypothesis import given, strategies as st

from semiforge.dataset import (
    DatasetRecord,
    FunnelStats,
    InvalidStats,
    IoFailure,
    Provenance,
    emit_jsonl,
    funnel_report,
    read_jsonl,
    record_from_dict,
    record_to_dict,
    retention_ratios,
)


def semi_record(difficulty=1, seq=0):
    return DatasetRecord(
        instruction="do the thing",
        code="print(1)",
        source="semi",
        provenance=Provenance(problem_id="p1", solution_index=0, seq=seq),
        difficulty=difficulty,
        n_test_cases=difficulty,
        answer_type={"kind": "standard_input", "function_name": None},
        test_cases=(
            {"mode": "stdin", "payload": "1", "function_name": None, "expected_output": "1"},
        ),
    )


def test_semi_record_requires_matching_difficulty():
    with pytest.raises(ValueError):
        DatasetRecord(
            instruction="x",
            code="y",
            source="semi",
            provenance=Provenance("p", 0, 0),
            difficulty=3,
            n_test_cases=2,
        )
    with pytest.raises(ValueError):
        DatasetRecord(
            instruction="x",
            code="y",
            source="semi",
            provenance=Provenance("p", 0, 0),
        )


def test_unknown_source_rejected():
    with pytest.raises(ValueError):
        DatasetRecord(
            instruction="x", code="y", source="scraped", provenance=Provenance("p", 0, 0)
        )


def test_record_round_trip():
    record = semi_record()
    back = record_from_dict(record_to_dict(record))
    assert record_to_dict(back) == record_to_dict(record)
    assert back.answer_type["kind"] == "standard_input"
    assert back.test_cases[0]["payload"] == "1"


def test_si_record_without_difficulty():
    record = DatasetRecord(
        instruction="write a poem function",
        code="def poem():\n    return 'hi'",
        source="si",
        provenance=Provenance("si-1", None, 4),
    )
    back = record_from_dict(record_to_dict(record))
    assert back.difficulty is None
    assert back.provenance.seq == 4


def test_emit_and_read_jsonl(tmp_path):
    records = [semi_record(seq=i) for i in range(3)]
    path = tmp_path / "out" / "dataset.jsonl"
    path.parent.mkdir()
    count = emit_jsonl(records, path)
    assert count == 3
    back = read_jsonl(path)
    assert [record_to_dict(r) for r in back] == [record_to_dict(r) for r in records]


def test_emit_is_byte_stable(tmp_path):
    records = [semi_record(seq=i) for i in range(3)]
    first = tmp_path / "a.jsonl"
    second = tmp_path / "b.jsonl"
    emit_jsonl(records, first)
    emit_jsonl(records, second)
    assert first.read_bytes() == second.read_bytes()


def test_emit_unwritable_path(tmp_path):
    with pytest.raises(IoFailure):
        emit_jsonl([semi_record()], tmp_path / "missing" / "dataset.jsonl")


PUBLISHED = FunnelStats(
    loaded_codes=126, generated_ok=92, with_test_cases=69, refined_passed=54, after_dedup=40
)


def test_retention_ratios_reference_counts():
    assert retention_ratios(PUBLISHED) == [73.0, 75.0, 78.3, 74.1]


def test_retention_ratio_zero_guard():
    assert retention_ratios(FunnelStats(0, 0, 0, 0, 0)) == [None, None, None, None]


def test_monotonicity_check():
    assert PUBLISHED.is_monotonic()
    assert not FunnelStats(10, 12, 5, 4, 3).is_monotonic()
    assert not FunnelStats(10, -1, -1, -1, -1).is_monotonic()


def test_funnel_report_text():
    report = funnel_report(PUBLISHED, format="text")
    lines = report.splitlines()
    assert lines[0] == "loaded_codes: 126"
    assert "generated_ok: 92 (73.0% of loaded_codes)" in lines
    assert "after_dedup: 40 (74.1% of refined_passed)" in lines


def test_funnel_report_includes_drops():
    stats = FunnelStats(5, 4, 3, 2, 1, drop_reasons={"generate": {"parse_error": 1}})
    report = funnel_report(stats, format="text")
    assert "drops [generate]: parse_error=1" in report


def test_funnel_report_json():
    stats = FunnelStats(5, 4, 3, 2, 1, drop_reasons={"generate": {"parse_error": 1}})
    blob = json.loads(funnel_report(stats, format="json"))
    assert blob["stages"]["after_dedup"] == 1
    assert blob["retention_pct"]["generated_ok"] == 80.0
    assert blob["drop_reasons"]["generate"]["parse_error"] == 1


def test_funnel_report_rejects_non_monotonic():
    with pytest.raises(InvalidStats):
        funnel_report(FunnelStats(1, 2, 3, 4, 5))


def test_funnel_report_unknown_format():
    with pytest.raises(ValueError):
        funnel_report(PUBLISHED, format="yaml")


def test_stats_round_trip():
    stats = FunnelStats(5, 4, 3, 2, 1, drop_reasons={"dedup": {"near_duplicate": 1}})
    assert FunnelStats.from_dict(stats.to_dict()) == stats


decreasing = st.lists(st.integers(min_value=0, max_value=1000), min_size=5, max_size=5).map(
    lambda xs: sorted(xs, reverse=True)
)


@given(decreasing)
def test_ratios_bounded_for_monotone_counts(counts):
    for ratio in retention_ratios(FunnelStats(*counts)):
        assert ratio is None or 0.0 <= ratio <= 100.0

"""Final dataset records, JSONL emission, and the funnel report.

DatasetRecord is the unit trainers consume: an instruction paired with
code, tagged with its source stream (semi, ni, si) and enough
provenance to reconstruct any ordering. Semi records additionally keep
their test cases so correctness can be re-checked from the emitted
file alone.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import SemiforgeError

SOURCES = ("semi", "ni", "si")


class IoFailure(SemiforgeError):
    pass


class InvalidStats(SemiforgeError):
    pass


@dataclass(frozen=True)
class Provenance:
    """Where a record came from: corpus problem, solution slot, generation order."""

    problem_id: str
    solution_index: int | None = None
    seq: int | None = None


@dataclass(frozen=True)
class DatasetRecord:
    instruction: str
    code: str
    source: str
    provenance: Provenance
    difficulty: int | None = None
    n_test_cases: int | None = None
    answer_type: Mapping | None = None
    test_cases: tuple = ()

    def __post_init__(self) -> None:
        if self.source not in SOURCES:
            raise ValueError(f"unknown record source: {self.source!r}")
        if self.source == "semi":
            if self.difficulty is None or self.n_test_cases is None:
                raise ValueError("semi records must carry difficulty and n_test_cases")
            if self.difficulty != self.n_test_cases:
                raise ValueError("semi difficulty must equal the test-case count")


def record_to_dict(record: DatasetRecord) -> dict:
    return {
        "instruction": record.instruction,
        "code": record.code,
        "source": record.source,
        "difficulty": record.difficulty,
        "n_test_cases": record.n_test_cases,
        "answer_type": dict(record.answer_type) if record.answer_type else None,
        "test_cases": [dict(c) for c in record.test_cases],
        "provenance": {
            "problem_id": record.provenance.problem_id,
            "solution_index": record.provenance.solution_index,
            "seq": record.provenance.seq,
        },
    }


def record_from_dict(obj: Mapping) -> DatasetRecord:
    prov = obj.get("provenance") or {}
    return DatasetRecord(
        instruction=obj["instruction"],
        code=obj["code"],
        source=obj["source"],
        difficulty=obj.get("difficulty"),
        n_test_cases=obj.get("n_test_cases"),
        answer_type=obj.get("answer_type"),
        test_cases=tuple(obj.get("test_cases") or ()),
        provenance=Provenance(
            problem_id=prov.get("problem_id", ""),
            solution_index=prov.get("solution_index"),
            seq=prov.get("seq"),
        ),
    )


def emit_jsonl(records: Iterable[DatasetRecord], path: str | Path) -> int:
    """Write records one JSON object per line; byte-stable for equal input."""
    count = 0
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for record in records:
                fh.write(json.dumps(record_to_dict(record), ensure_ascii=False, sort_keys=True))
                fh.write("\n")
                count += 1
    except OSError as exc:
        raise IoFailure(f"could not write {path}: {exc}") from exc
    return count


def read_jsonl(path: str | Path) -> list[DatasetRecord]:
    text = Path(path).read_text(encoding="utf-8")
    return [record_from_dict(json.loads(line)) for line in text.splitlines() if line.strip()]


STAGE_FIELDS = ("loaded_codes", "generated_ok", "with_test_cases", "refined_passed", "after_dedup")


@dataclass(frozen=True)
class FunnelStats:
    loaded_codes: int
    generated_ok: int
    with_test_cases: int
    refined_passed: int
    after_dedup: int
    drop_reasons: Mapping[str, Mapping[str, int]] = field(default_factory=dict)

    def counts(self) -> tuple[int, ...]:
        return tuple(getattr(self, name) for name in STAGE_FIELDS)

    def is_monotonic(self) -> bool:
        counts = self.counts()
        return all(c >= 0 for c in counts) and all(
            a >= b for a, b in zip(counts, counts[1:])
        )

    def to_dict(self) -> dict:
        out = {name: getattr(self, name) for name in STAGE_FIELDS}
        out["drop_reasons"] = {
            stage: dict(sorted(reasons.items())) for stage, reasons in sorted(self.drop_reasons.items())
        }
        return out

    @classmethod
    def from_dict(cls, obj: Mapping) -> "FunnelStats":
        return cls(
            **{name: int(obj[name]) for name in STAGE_FIELDS},
            drop_reasons={k: dict(v) for k, v in obj.get("drop_reasons", {}).items()},
        )


def retention_ratios(stats: FunnelStats) -> list[float | None]:
    """Stage-over-stage survival, as percentages rounded to one decimal."""
    counts = stats.counts()
    ratios: list[float | None] = []
    for prev, cur in zip(counts, counts[1:]):
        ratios.append(round(100.0 * cur / prev, 1) if prev else None)
    return ratios


def funnel_report(stats: FunnelStats, format: str = "text") -> str:
    if not stats.is_monotonic():
        raise InvalidStats(f"funnel counts must be non-negative and non-increasing: {stats.counts()}")
    ratios = retention_ratios(stats)
    if format == "json":
        payload = {
            "stages": {name: getattr(stats, name) for name in STAGE_FIELDS},
            "retention_pct": {
                STAGE_FIELDS[i + 1]: ratios[i] for i in range(len(ratios))
            },
            "drop_reasons": {
                stage: dict(sorted(reasons.items()))
                for stage, reasons in sorted(stats.drop_reasons.items())
            },
        }
        return json.dumps(payload, indent=2, sort_keys=True)
    if format != "text":
        raise ValueError(f"unknown report format: {format!r}")

    lines = [f"{STAGE_FIELDS[0]}: {stats.loaded_codes}"]
    for i, name in enumerate(STAGE_FIELDS[1:]):
        ratio = ratios[i]
        shown = "n/a" if ratio is None else f"{ratio:.1f}%"
        lines.append(f"{name}: {getattr(stats, name)} ({shown} of {STAGE_FIELDS[i]})")
    for stage in sorted(stats.drop_reasons):
        reasons = stats.drop_reasons[stage]
        if not reasons:
            continue
        breakdown = ", ".join(f"{reason}={count}" for reason, count in sorted(reasons.items()))
        lines.append(f"drops [{stage}]: {breakdown}")
    return "\n".join(lines)

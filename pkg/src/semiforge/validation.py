"""Test-case construction, pass-all validation, and ROUGE-L dedup.

Expected outputs are never generated: they come from executing the
original corpus code on the generated inputs. Inputs whose execution
fails are dropped; a sample whose inputs all fail is discarded
outright. Refined code is retained only when it passes every surviving
case.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

from .dataset import Provenance
from .errors import SemiforgeError
from .executor import (
    ExecStatus,
    Invocation,
    ResourceLimits,
    execute,
    normalize_output,
    outputs_match,
)
from .generation import CALL_BASED, AnswerType, GenerationBundle
from .lcs import encode_pair, lcs_length

DEFAULT_DEDUP_THRESHOLD = 0.7


class EmptyTestCases(SemiforgeError):
    def __init__(self, message: str, drops: dict | None = None):
        super().__init__(message)
        self.drops = dict(drops or {})


@dataclass(frozen=True)
class TestCase:
    invocation: Invocation
    expected_output: str


class FailReason(str, Enum):
    WRONG_OUTPUT = "wrong_output"
    RUNTIME_ERROR = "runtime_error"
    TIMEOUT = "timeout"


@dataclass(frozen=True)
class Verdict:
    passed: bool
    case_index: int | None = None
    reason: FailReason | None = None

    @classmethod
    def pass_(cls) -> "Verdict":
        return cls(passed=True)

    @classmethod
    def fail(cls, case_index: int, reason: FailReason) -> "Verdict":
        return cls(passed=False, case_index=case_index, reason=reason)


@dataclass(frozen=True)
class ValidatedSample:
    instruction: str
    refined_code: str
    test_cases: tuple[TestCase, ...]
    difficulty: int
    provenance: Provenance
    answer_type: AnswerType

    def __post_init__(self) -> None:
        if len(self.test_cases) < 1:
            raise ValueError("validated samples need at least one test case")
        if self.difficulty != len(self.test_cases):
            raise ValueError("difficulty must equal the test-case count")


def invocation_for(answer_type: AnswerType, raw_input: str) -> Invocation:
    if answer_type.kind == CALL_BASED:
        return Invocation.call(answer_type.function_name, raw_input)
    return Invocation.stdin(raw_input)


def construct_test_cases_with_drops(
    original_code: str,
    bundle: GenerationBundle,
    limits: ResourceLimits | None = None,
    interpreter: str | None = None,
) -> tuple[list[TestCase], Counter]:
    """Like construct_test_cases, but also report why inputs were dropped."""
    cases: list[TestCase] = []
    drops: Counter = Counter()
    for raw_input in bundle.raw_inputs:
        invocation = invocation_for(bundle.answer_type, raw_input)
        result = execute(original_code, invocation, limits, interpreter)
        if result.ok:
            cases.append(TestCase(invocation=invocation, expected_output=normalize_output(result.stdout)))
        else:
            drops[result.status.value] += 1
    if not cases:
        raise EmptyTestCases(
            f"all {len(bundle.raw_inputs)} inputs failed: {dict(drops)}", drops=dict(drops)
        )
    return cases, drops


def construct_test_cases(
    original_code: str,
    bundle: GenerationBundle,
    limits: ResourceLimits | None = None,
    interpreter: str | None = None,
) -> list[TestCase]:
    """Execute the original code on every raw input; keep the Ok pairs."""
    cases, _ = construct_test_cases_with_drops(original_code, bundle, limits, interpreter)
    return cases


_FAIL_BY_STATUS = {
    ExecStatus.TIMEOUT: FailReason.TIMEOUT,
    ExecStatus.RUNTIME_ERROR: FailReason.RUNTIME_ERROR,
    ExecStatus.OUTPUT_OVERFLOW: FailReason.RUNTIME_ERROR,
}


def validate_refined_code(
    refined_code: str,
    test_cases: Sequence[TestCase],
    limits: ResourceLimits | None = None,
    interpreter: str | None = None,
) -> Verdict:
    """Pass iff every case executes Ok and matches; stop at the first failure."""
    if not test_cases:
        raise ValueError("validation needs at least one test case")
    for index, case in enumerate(test_cases):
        result = execute(refined_code, case.invocation, limits, interpreter)
        if not result.ok:
            return Verdict.fail(index, _FAIL_BY_STATUS[result.status])
        if not outputs_match(result.stdout, case.expected_output):
            return Verdict.fail(index, FailReason.WRONG_OUTPUT)
    return Verdict.pass_()


def tokenize(text: str) -> list[str]:
    """Lowercase whitespace tokens, the unit ROUGE-L operates on."""
    return text.lower().split()


def rouge_l(candidate: Sequence[str], reference: Sequence[str], backend: str | None = None) -> float:
    """LCS-based F1 between two token lists; 0.0 when either is empty."""
    if not candidate or not reference:
        return 0.0
    a, b = encode_pair(candidate, reference)
    lcs = int(lcs_length(a, b, backend=backend))
    if lcs == 0:
        return 0.0
    precision = lcs / len(candidate)
    recall = lcs / len(reference)
    return 2.0 * precision * recall / (precision + recall)


def rouge_l_text(candidate: str, reference: str, backend: str | None = None) -> float:
    return rouge_l(tokenize(candidate), tokenize(reference), backend=backend)


def _f1_upper_bound(len_a: int, len_b: int) -> float:
    # The F1 score cannot exceed the case where the shorter list is a
    # full subsequence of the longer.
    if len_a == 0 or len_b == 0:
        return 0.0
    return 2.0 * min(len_a, len_b) / (len_a + len_b)


def dedup_instructions(
    samples: Iterable,
    threshold: float = DEFAULT_DEDUP_THRESHOLD,
    compare: str = "retained",
    backend: str | None = None,
    key=None,
):
    """Streaming greedy dedup on sample.instruction similarity.

    A sample is kept iff its maximal ROUGE-L against the comparison set
    stays at or below the threshold. The comparison set is previously
    retained instructions by default; ``compare="all"`` checks against
    every previously seen instruction instead. ``key`` extracts the
    instruction text from a sample (defaults to ``.instruction``).
    """
    retained, _ = dedup_instructions_with_drops(samples, threshold, compare, backend, key)
    return retained


def dedup_instructions_with_drops(
    samples: Iterable,
    threshold: float = DEFAULT_DEDUP_THRESHOLD,
    compare: str = "retained",
    backend: str | None = None,
    key=None,
):
    if compare not in ("retained", "all"):
        raise ValueError(f"unknown comparison set: {compare!r}")
    if key is None:
        key = lambda sample: sample.instruction
    retained = []
    dropped = []
    pool: list[list[str]] = []
    for sample in samples:
        tokens = tokenize(key(sample))
        duplicate = False
        for prior in pool:
            if _f1_upper_bound(len(tokens), len(prior)) <= threshold:
                continue
            if rouge_l(tokens, prior, backend=backend) > threshold:
                duplicate = True
                break
        if duplicate:
            dropped.append(sample)
            if compare == "all":
                pool.append(tokens)
        else:
            retained.append(sample)
            pool.append(tokens)
    return retained, dropped

"""Command-line interface.

Subcommands map onto pipeline stages: `run` executes everything,
`ingest`/`generate`/`validate`/`rank`/`emit` execute slices against the
stage files in the output directory, `eval` scores candidate files with
pass@k, and `report` renders a stored funnel. Options layer as
defaults < --config file < explicit flags.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .dataset import FunnelStats, funnel_report
from .errors import SemiforgeError
from .executor import ResourceLimits
from .metrics import EvalProblem, evaluate_candidates
from .pipeline import (
    DATASET_FILE,
    STAGES,
    PipelineConfig,
    load_config,
    run_pipeline,
    stage_path,
)
from .validation import TestCase
from .executor import Invocation

logger = logging.getLogger(__name__)

_OVERRIDE_FIELDS = {
    "corpus": "corpus_path",
    "format": "corpus_format",
    "language": "language",
    "out": "out_dir",
    "template": "template_path",
    "input_count": "input_count",
    "client": "client_mode",
    "replay_store": "replay_store",
    "endpoint": "endpoint",
    "model": "model_id",
    "interpreter": "interpreter",
    "wall_timeout": "wall_timeout",
    "threshold": "dedup_threshold",
    "compare": "dedup_compare",
    "order": "order",
    "seed": "seed",
    "scale": "scale",
    "si": "si_path",
    "workers": "workers",
}


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON config file; flags override its values")
    parser.add_argument("--corpus", help="corpus archive path")
    parser.add_argument("--format", choices=("apps", "codecontest", "generic"), help="corpus layout")
    parser.add_argument("--language", help="corpus language tag (default python)")
    parser.add_argument("--out", help="output directory for stage files and the dataset")
    parser.add_argument("--template", help="prompt template file (default: built-in)")
    parser.add_argument("--input-count", type=int, dest="input_count", help="test inputs to request")
    parser.add_argument("--client", choices=("replay", "live"), help="completion client mode")
    parser.add_argument("--replay-store", dest="replay_store", help="replay fixture directory")
    parser.add_argument("--endpoint", help="live chat-completion endpoint URL")
    parser.add_argument("--model", help="model id sent to the live endpoint")
    parser.add_argument("--interpreter", help="interpreter for sandboxed runs")
    parser.add_argument("--wall-timeout", type=float, dest="wall_timeout", help="per-run timeout seconds")
    parser.add_argument("--threshold", type=float, help="ROUGE-L dedup threshold")
    parser.add_argument("--compare", choices=("retained", "all"), help="dedup comparison set")
    parser.add_argument("--order", help="ordering strategy")
    parser.add_argument("--seed", type=int, help="RNG seed for randomized orderings")
    parser.add_argument("--scale", type=int, help="emit only the first N ordered records")
    parser.add_argument("--si", help="self-instruct records file to merge before ordering")
    parser.add_argument("--workers", type=int, help="worker pool width")


def _config_from_args(args: argparse.Namespace) -> PipelineConfig:
    config = load_config(args.config) if args.config else PipelineConfig()
    for flag, field in _OVERRIDE_FIELDS.items():
        value = getattr(args, flag, None)
        if value is not None:
            setattr(config, field, value)
    return config


def _print_stage_summary(config: PipelineConfig, stages: list[str]) -> None:
    for stage in stages:
        path = stage_path(config.out_dir, stage)
        if not path.is_file():
            continue
        rows = [json.loads(line) for line in path.read_text(encoding="utf-8").splitlines() if line]
        kept = sum(1 for row in rows if row.get("status") == "ok")
        print(f"{stage}: {kept}/{len(rows)} rows kept -> {path}")


def _cmd_slice(args: argparse.Namespace, resume_from: str | None, stop_after: str) -> int:
    config = _config_from_args(args)
    config.resume_from = resume_from
    run_pipeline(config, stop_after=stop_after)
    start = STAGES.index(resume_from) if resume_from else 0
    _print_stage_summary(config, list(STAGES[start : STAGES.index(stop_after) + 1]))
    if stop_after == "emit":
        print(f"dataset -> {Path(config.out_dir) / DATASET_FILE}")
    return 0


def _cmd_run(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    if args.resume_from:
        config.resume_from = args.resume_from
    stats = run_pipeline(config)
    print(funnel_report(stats))
    print(f"dataset -> {Path(config.out_dir) / DATASET_FILE}")
    return 0


def _load_eval_problems(problems_path: str, candidates_path: str) -> list[EvalProblem]:
    problem_rows = [
        json.loads(line)
        for line in Path(problems_path).read_text(encoding="utf-8").splitlines()
        if line.strip()
    ]
    grouped: dict[str, list[str]] = {}
    for line in Path(candidates_path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        row = json.loads(line)
        grouped.setdefault(row["problem_id"], []).append(row["candidate_code"])
    problems = []
    for row in problem_rows:
        cases = tuple(
            TestCase(
                invocation=Invocation(
                    mode=case["mode"],
                    payload=case["payload"],
                    function_name=case.get("function_name"),
                ),
                expected_output=case["expected_output"],
            )
            for case in row["test_cases"]
        )
        problems.append(
            EvalProblem(
                problem_id=row["problem_id"],
                test_cases=cases,
                candidates=tuple(grouped.get(row["problem_id"], ())),
            )
        )
    return problems


def _cmd_eval(args: argparse.Namespace) -> int:
    ks = [int(part) for part in args.k.split(",") if part.strip()]
    problems = _load_eval_problems(args.problems, args.candidates)
    limits = ResourceLimits(wall_timeout=args.wall_timeout) if args.wall_timeout else None
    report = evaluate_candidates(
        problems,
        limits=limits,
        ks=ks,
        interpreter=args.interpreter,
        workers=args.workers or 1,
    )
    payload = json.dumps(report.to_dict(), indent=2, sort_keys=True)
    if args.out:
        Path(args.out).write_text(payload + "\n", encoding="utf-8")
        print(f"report -> {args.out}")
    print(payload)
    return 0


def _cmd_report(args: argparse.Namespace) -> int:
    stats = FunnelStats.from_dict(json.loads(Path(args.funnel).read_text(encoding="utf-8")))
    print(funnel_report(stats, format=args.format))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="semiforge",
        description="Turn judge-style code corpora into validated, difficulty-ordered instruction-code pairs.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, help_text in (
        ("ingest", "load, filter, merge and cap the corpus"),
        ("generate", "run LLM generation over ingested codes"),
        ("validate", "construct test cases, validate refined code, dedup"),
        ("rank", "order validated records by the configured strategy"),
        ("emit", "write the final dataset from the ordered records"),
        ("run", "run the full pipeline"),
    ):
        p = sub.add_parser(name, help=help_text)
        _add_config_flags(p)
        if name == "run":
            p.add_argument(
                "--resume-from",
                dest="resume_from",
                help="first stage to execute; earlier stages load from stage files",
            )

    p_eval = sub.add_parser("eval", help="score candidate completions with pass@k")
    p_eval.add_argument("--problems", required=True, help="JSONL of {problem_id, test_cases}")
    p_eval.add_argument("--candidates", required=True, help="JSONL of {problem_id, candidate_code}")
    p_eval.add_argument("--k", default="1", help="comma-separated k values (default 1)")
    p_eval.add_argument("--wall-timeout", type=float, dest="wall_timeout", help="per-run timeout seconds")
    p_eval.add_argument("--interpreter", help="interpreter for sandboxed runs")
    p_eval.add_argument("--workers", type=int, help="worker pool width")
    p_eval.add_argument("--out", help="write the JSON report here as well")

    p_report = sub.add_parser("report", help="render a stored funnel report")
    p_report.add_argument("--funnel", required=True, help="funnel.json produced by run")
    p_report.add_argument("--format", choices=("text", "json"), default="text")

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        if args.command == "ingest":
            return _cmd_slice(args, None, "ingest")
        if args.command == "generate":
            return _cmd_slice(args, "generate", "generate")
        if args.command == "validate":
            return _cmd_slice(args, "construct", "dedup")
        if args.command == "rank":
            return _cmd_slice(args, "order", "order")
        if args.command == "emit":
            return _cmd_slice(args, "emit", "emit")
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "eval":
            return _cmd_eval(args)
        if args.command == "report":
            return _cmd_report(args)
        raise ValueError(f"unknown command: {args.command!r}")
    except SemiforgeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

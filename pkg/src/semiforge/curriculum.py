"""Ordering strategies for training data emission.

All randomized strategies draw from numpy's default_rng (the PCG64
generator), so a (strategy, seed) pair reproduces the same permutation
on any platform. Sorts are stable: ties keep their pipeline order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import SemiforgeError

STRATEGIES = (
    "semi_ranked",
    "semi_unranked",
    "ni_shuffled",
    "si_generated_order",
    "combined_si_then_semi",
    "all_shuffled",
)


class MissingProvenance(SemiforgeError):
    pass


@dataclass(frozen=True)
class OrderingStrategy:
    kind: str
    seed: int = 0

    def __post_init__(self) -> None:
        if self.kind not in STRATEGIES:
            raise ValueError(f"unknown ordering strategy: {self.kind!r}")


def _difficulty(record, strategy_kind: str) -> int:
    value = getattr(record, "difficulty", None)
    if value is None:
        raise MissingProvenance(f"{strategy_kind} needs a difficulty on every record")
    return value


def _seq(record, strategy_kind: str) -> int:
    prov = getattr(record, "provenance", None)
    seq = getattr(prov, "seq", None)
    if seq is None:
        raise MissingProvenance(f"{strategy_kind} needs a generation sequence number on every record")
    return seq


def _problem_id(record, strategy_kind: str) -> str:
    prov = getattr(record, "provenance", None)
    pid = getattr(prov, "problem_id", None)
    if not pid:
        raise MissingProvenance(f"{strategy_kind} needs a problem id on every record")
    return pid


def rank_by_difficulty(samples: Sequence) -> list:
    """Non-increasing difficulty; ties keep their original order."""
    items = list(samples)
    return sorted(items, key=lambda s: -_difficulty(s, "ranking"))


def _shuffled(items: list, rng: np.random.Generator) -> list:
    order = rng.permutation(len(items))
    return [items[i] for i in order]


def order_records(records: Sequence, strategy: OrderingStrategy) -> list:
    """Apply one ordering strategy; always a permutation of the input."""
    items = list(records)
    kind = strategy.kind

    if kind == "semi_ranked":
        return rank_by_difficulty(items)

    if kind == "semi_unranked":
        return _shuffled(items, np.random.default_rng(strategy.seed))

    if kind == "ni_shuffled":
        # Problems first: shuffle problem ids, lay out each problem's
        # records contiguously, then shuffle the record stream once.
        rng = np.random.default_rng(strategy.seed)
        ids: list[str] = []
        by_problem: dict[str, list] = {}
        for record in items:
            pid = _problem_id(record, kind)
            if pid not in by_problem:
                by_problem[pid] = []
                ids.append(pid)
            by_problem[pid].append(record)
        assembled = []
        for pid in _shuffled(ids, rng):
            assembled.extend(by_problem[pid])
        return _shuffled(assembled, rng)

    if kind == "si_generated_order":
        return sorted(items, key=lambda r: _seq(r, kind))

    if kind == "combined_si_then_semi":
        si_block = [r for r in items if getattr(r, "source", None) == "si"]
        rest = [r for r in items if getattr(r, "source", None) != "si"]
        si_block = sorted(si_block, key=lambda r: _seq(r, kind))
        return si_block + rank_by_difficulty(rest)

    if kind == "all_shuffled":
        return _shuffled(items, np.random.default_rng(strategy.seed))

    raise ValueError(f"unknown ordering strategy: {kind!r}")


def select_scale(records: Sequence, n: int, strategy: OrderingStrategy) -> list:
    """First n records of the strategy-ordered stream (nested prefixes)."""
    if n < 0:
        raise ValueError("scale must be >= 0")
    return order_records(records, strategy)[:n]

"""Baseline identification: discard candidates whose support misses a sample.

The procedure walks the query's sample stream in draw order.  Each sample
element is membership-tested (counted) against every still-alive candidate;
candidates that miss it are dropped.  It stops as soon as exactly one
candidate survives.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .distributions import Dataset, OpCounter, QueryMultiset


@dataclass
class CandidateSet:
    """Duplicate-free list of candidate distribution indices."""

    alive: list[int]
    origin: str = "full-dataset"  # or "bucket"

    def __post_init__(self) -> None:
        if len(set(self.alive)) != len(self.alive):
            raise ValueError("candidate list contains duplicates")

    @classmethod
    def full(cls, k: int) -> "CandidateSet":
        return cls(list(range(k)), origin="full-dataset")


@dataclass(frozen=True)
class EliminationResult:
    outcome: str  # "found" | "ambiguous" | "exhausted"
    index: int | None = None
    survivors: tuple[int, ...] = field(default_factory=tuple)


def eliminate(
    data: Dataset,
    candidates: CandidateSet,
    query: QueryMultiset,
    counter: OpCounter,
) -> EliminationResult:
    """Run the elimination pass; all membership tests are charged to counter."""
    alive = np.asarray(candidates.alive, dtype=np.int64)
    if alive.size == 0:
        raise ValueError("candidate set must be nonempty")
    if alive.size == 1:
        return EliminationResult("found", int(alive[0]))
    matrix = data.matrix
    for element in query.order.tolist():
        counter.add(alive.size)
        alive = alive[matrix[alive, element]]
        if alive.size == 1:
            return EliminationResult("found", int(alive[0]))
        if alive.size == 0:
            return EliminationResult("exhausted")
    return EliminationResult("ambiguous", None, tuple(int(j) for j in alive))

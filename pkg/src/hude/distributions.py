"""Supports, uniform-on-support distributions, and query sample sets.

The single metered primitive lives here: :func:`contains` reads one bit of a
support and charges exactly one membership operation to the caller's counter.
Everything else (generation, distances, serialization) goes through the
unmetered accessors, since setup work is never billed to a query.
"""
from __future__ import annotations

import json
from typing import Iterable, Iterator

import numpy as np


class OpCounter:
    """Counts metered membership operations for a single query."""

    __slots__ = ("membership_ops",)

    def __init__(self) -> None:
        self.membership_ops = 0

    def add(self, amount: int = 1) -> None:
        if amount < 0:
            raise ValueError("op counter is monotone; cannot add a negative amount")
        self.membership_ops += int(amount)

    def __repr__(self) -> str:
        return f"OpCounter(membership_ops={self.membership_ops})"


class SupportSet:
    """Fixed-width bit vector over the domain [0, n)."""

    __slots__ = ("bits", "n", "_cardinality", "_indices")

    def __init__(self, bits: np.ndarray):
        bits = np.asarray(bits, dtype=bool)
        if bits.ndim != 1:
            raise ValueError("support bits must be one-dimensional")
        self.bits = bits
        self.n = int(bits.shape[0])
        self._cardinality: int | None = None
        self._indices: np.ndarray | None = None

    @classmethod
    def from_indices(cls, n: int, indices: Iterable[int]) -> "SupportSet":
        bits = np.zeros(int(n), dtype=bool)
        idx = np.asarray(list(indices), dtype=np.int64)
        if idx.size:
            if idx.min() < 0 or idx.max() >= n:
                raise ValueError(f"index outside domain [0, {n})")
            bits[idx] = True
        return cls(bits)

    @property
    def cardinality(self) -> int:
        if self._cardinality is None:
            self._cardinality = int(np.count_nonzero(self.bits))
        return self._cardinality

    @property
    def indices(self) -> np.ndarray:
        """Sorted element indices; materialized once, reused for sampling."""
        if self._indices is None:
            self._indices = np.flatnonzero(self.bits)
        return self._indices

    def has(self, element: int) -> bool:
        """Unmetered membership read (generation and setup paths only)."""
        if not 0 <= element < self.n:
            raise ValueError(f"element {element} outside domain [0, {self.n})")
        return bool(self.bits[element])

    def issubset(self, other: "SupportSet") -> bool:
        if self.n != other.n:
            raise ValueError("domain sizes differ")
        return bool(np.all(other.bits[self.indices]))

    def intersection_size(self, other: "SupportSet") -> int:
        if self.n != other.n:
            raise ValueError("domain sizes differ")
        return int(np.count_nonzero(self.bits & other.bits))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SupportSet):
            return NotImplemented
        return self.n == other.n and bool(np.array_equal(self.bits, other.bits))

    def __hash__(self) -> int:  # content hash; supports are immutable by convention
        return hash((self.n, self.bits.tobytes()))

    def __repr__(self) -> str:
        return f"SupportSet(n={self.n}, cardinality={self.cardinality})"


def contains(support: SupportSet, element: int, counter: OpCounter) -> bool:
    """Metered membership test: one bit read, exactly one op charged."""
    if not 0 <= element < support.n:
        raise ValueError(f"element {element} outside domain [0, {support.n})")
    counter.add(1)
    return bool(support.bits[element])


class HalfUniformDistribution:
    """Uniform distribution over a recorded support set.

    For strict half-uniform instances the support has exactly n/2 elements;
    random-support instances keep whatever cardinality the draw produced.
    """

    __slots__ = ("support", "n")

    def __init__(self, support: SupportSet):
        self.support = support
        self.n = support.n

    def mass(self, element: int) -> float:
        card = self.support.cardinality
        if card == 0:
            raise ValueError("distribution with empty support has no mass function")
        return 1.0 / card if self.support.has(element) else 0.0

    def sample(self, m: int, rng: np.random.Generator) -> "QueryMultiset":
        """Draw m i.i.d. elements, uniform on the support, in recorded order."""
        if m < 0:
            raise ValueError("sample count must be nonnegative")
        idx = self.support.indices
        if idx.size == 0:
            raise ValueError("cannot sample from an empty support")
        draws = idx[rng.integers(0, idx.size, size=int(m))]
        return QueryMultiset.from_draws(self.n, draws)

    def __repr__(self) -> str:
        return f"HalfUniformDistribution(n={self.n}, support={self.support.cardinality})"


class QueryMultiset:
    """Multiset of sampled elements, plus the set of distinct elements.

    ``order`` preserves the original draw order; elimination consumes the
    stream in that order so op counts are reproducible.
    """

    __slots__ = ("counts", "distinct", "total", "order")

    def __init__(self, n: int, order: np.ndarray):
        order = np.asarray(order, dtype=np.int64)
        if order.ndim != 1:
            raise ValueError("sample stream must be one-dimensional")
        if order.size and (order.min() < 0 or order.max() >= n):
            raise ValueError(f"sample outside domain [0, {n})")
        self.order = order
        self.total = int(order.size)
        counts: dict[int, int] = {}
        for element in order.tolist():
            counts[element] = counts.get(element, 0) + 1
        self.counts = counts
        self.distinct = SupportSet.from_indices(n, counts.keys())

    @classmethod
    def from_draws(cls, n: int, draws: np.ndarray) -> "QueryMultiset":
        return cls(n, draws)

    @classmethod
    def from_pairs(cls, n: int, pairs: Iterable[tuple[int, int]]) -> "QueryMultiset":
        """Rebuild from (element, multiplicity) pairs, expanded in listed order."""
        stream: list[int] = []
        for element, multiplicity in pairs:
            if multiplicity <= 0:
                raise ValueError("multiplicities must be positive")
            stream.extend([int(element)] * int(multiplicity))
        return cls(n, np.asarray(stream, dtype=np.int64))

    def pairs(self) -> list[tuple[int, int]]:
        """(element, multiplicity) pairs in first-appearance order."""
        return [(e, c) for e, c in self.counts.items()]

    def __repr__(self) -> str:
        return f"QueryMultiset(total={self.total}, distinct={self.distinct.cardinality})"


def l1_distance(p: HalfUniformDistribution, q: HalfUniformDistribution) -> float:
    """L1 distance between two uniform-on-support distributions.

    Uses the general unequal-size formula; for equal support sizes m it
    reduces to |symmetric difference| / m.
    """
    if p.n != q.n:
        raise ValueError(f"domain sizes differ: {p.n} != {q.n}")
    a = p.support.cardinality
    b = q.support.cardinality
    if a == 0 or b == 0:
        raise ValueError("distances need nonempty supports")
    c = p.support.intersection_size(q.support)
    return abs(1.0 / a - 1.0 / b) * c + (a - c) / a + (b - c) / b


class Dataset:
    """Ordered collection of k supports over a shared domain [0, n).

    Stored as a read-only (k, n) boolean matrix so that the index and the
    elimination baseline can gather membership columns in bulk.
    """

    __slots__ = ("matrix", "k", "n", "_supports")

    def __init__(self, matrix: np.ndarray):
        matrix = np.ascontiguousarray(matrix, dtype=bool)
        if matrix.ndim != 2:
            raise ValueError("dataset matrix must be (k, n)")
        matrix.flags.writeable = False
        self.matrix = matrix
        self.k, self.n = (int(d) for d in matrix.shape)
        self._supports: dict[int, SupportSet] = {}

    @classmethod
    def from_supports(cls, n: int, supports: Iterable[Iterable[int]]) -> "Dataset":
        rows = [SupportSet.from_indices(n, s).bits for s in supports]
        if not rows:
            raise ValueError("dataset needs at least one support")
        return cls(np.vstack(rows))

    def support(self, j: int) -> SupportSet:
        if j not in self._supports:
            self._supports[j] = SupportSet(self.matrix[j])
        return self._supports[j]

    def distribution(self, j: int) -> HalfUniformDistribution:
        return HalfUniformDistribution(self.support(j))

    def __len__(self) -> int:
        return self.k

    def __iter__(self) -> Iterator[SupportSet]:
        return (self.support(j) for j in range(self.k))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return bool(np.array_equal(self.matrix, other.matrix))

    def __repr__(self) -> str:
        return f"Dataset(k={self.k}, n={self.n})"


# ---------------------------------------------------------------------------
# Random support matrices (building blocks for the instance generators)
# ---------------------------------------------------------------------------

_ROW_BLOCK = 4096  # fixed block size keeps the draw sequence platform-independent


def random_fixed_size_supports(k: int, n: int, m: int, rng: np.random.Generator) -> np.ndarray:
    """(k, n) boolean matrix whose rows are uniform random m-subsets of [0, n)."""
    if not 0 < m <= n:
        raise ValueError("support size must be in [1, n]")
    out = np.zeros((k, n), dtype=bool)
    for start in range(0, k, _ROW_BLOCK):
        stop = min(start + _ROW_BLOCK, k)
        u = rng.random((stop - start, n))
        chosen = np.argpartition(u, m - 1, axis=1)[:, :m]
        out[np.arange(start, stop)[:, None], chosen] = True
    return out


def random_bernoulli_supports(k: int, n: int, w: float, rng: np.random.Generator) -> np.ndarray:
    """(k, n) boolean matrix with independent Bernoulli(w) entries."""
    if not 0.0 < w <= 1.0:
        raise ValueError("inclusion probability must be in (0, 1]")
    out = np.empty((k, n), dtype=bool)
    for start in range(0, k, _ROW_BLOCK):
        stop = min(start + _ROW_BLOCK, k)
        out[start:stop] = rng.random((stop - start, n)) < w
    return out


# ---------------------------------------------------------------------------
# Dataset serialization: '# ...' metadata lines, then 'n k', then one support
# per line as sorted element indices.  Round trips are byte-exact.
# ---------------------------------------------------------------------------


def dumps_dataset(dataset: Dataset, metadata: dict | None = None) -> str:
    lines = []
    if metadata:
        lines.append("# " + json.dumps(metadata, sort_keys=True, separators=(",", ":")))
    lines.append(f"{dataset.n} {dataset.k}")
    for j in range(dataset.k):
        lines.append(" ".join(str(e) for e in dataset.support(j).indices.tolist()))
    return "\n".join(lines) + "\n"


def loads_dataset(text: str) -> tuple[Dataset, dict]:
    metadata: dict = {}
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    pos = 0
    while pos < len(lines) and lines[pos].startswith("#"):
        payload = lines[pos][1:].strip()
        if payload:
            metadata.update(json.loads(payload))
        pos += 1
    if pos >= len(lines):
        raise ValueError("dataset text has no header line")
    n_str, k_str = lines[pos].split()
    n, k = int(n_str), int(k_str)
    pos += 1
    if len(lines) - pos != k:
        raise ValueError(f"expected {k} support lines, found {len(lines) - pos}")
    matrix = np.zeros((k, n), dtype=bool)
    for j in range(k):
        row = lines[pos + j].split()
        if row:
            matrix[j, np.asarray(row, dtype=np.int64)] = True
    return Dataset(matrix), metadata


def save_dataset(dataset: Dataset, path, metadata: dict | None = None) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps_dataset(dataset, metadata))


def load_dataset(path) -> tuple[Dataset, dict]:
    with open(path, "r", encoding="utf-8") as fh:
        return loads_dataset(fh.read())

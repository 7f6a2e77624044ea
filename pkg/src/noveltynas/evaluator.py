"""Fitness oracles that stand in for supernet-based accuracy estimation.

Three kinds are available:

* :class:`TabularOracle` looks up validation accuracy in a
  :class:`BenchmarkTable` (NAS-Bench-201 style CSV).
* :class:`SyntheticOracle` scores every S2 architecture with a seeded
  landscape made of per-edge operation utilities plus pairwise edge
  interactions; the interactions create local optima.
* :class:`NoisyOracle` wraps another oracle and adds zero-mean Gaussian
  noise drawn from a stream keyed by ``(architecture key, generation)``.
  All calls within one generation agree; estimates drift between
  generations, the way a re-trained weight-sharing supernet would.

Every oracle exposes ``evaluate(arch, generation=0) -> float`` in ``[0, 1]``
and ``true_score(arch)``, the noiseless value used for reporting.
"""

from __future__ import annotations

import csv
import hashlib
import itertools
import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .arch_space import (
    DiscreteArchitecture,
    OperationSpace,
    architecture_from_choices,
    canonical_key,
    enumerate_space,
    get_space,
    parse_key,
    s2_index,
)
from .exceptions import (
    BenchmarkParseError,
    DuplicateKeyError,
    KeyNotInSpaceError,
    OracleLookupError,
    UnsupportedSpaceError,
)

__all__ = [
    "BenchmarkTable",
    "IncompleteTableWarning",
    "load_benchmark",
    "write_benchmark",
    "TabularOracle",
    "SyntheticOracle",
    "NoisyOracle",
    "make_synthetic",
    "count_local_optima",
    "evaluate",
    "true_score",
    "oracle_from_spec",
]

CSV_HEADER = ("key", "val_acc", "test_acc")


class IncompleteTableWarning(UserWarning):
    pass


@dataclass
class BenchmarkTable:
    space: OperationSpace
    records: dict[str, tuple[float, float]]
    dataset_label: str = ""

    def __len__(self):
        return len(self.records)

    @property
    def complete(self) -> bool:
        return not self.space.is_pruned and len(self.records) == self.space.size

    def optimum(self, column: str = "val_acc") -> tuple[str, float]:
        """Key and value of the best record; ties go to the smaller key."""
        col = CSV_HEADER.index(column) - 1
        key = min(self.records, key=lambda k: (-self.records[k][col], k))
        return key, self.records[key][col]


def load_benchmark(path, space, dataset_label: str | None = None) -> BenchmarkTable:
    """Read a ``key,val_acc,test_acc`` CSV into a validated table.

    Raises :class:`BenchmarkParseError` for malformed content,
    :class:`KeyNotInSpaceError` for keys that do not describe an
    architecture of ``space`` and :class:`DuplicateKeyError` for repeats.
    An incomplete S2 table only triggers :class:`IncompleteTableWarning`.
    """
    space = get_space(space)
    path = Path(path)
    records: dict[str, tuple[float, float]] = {}
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise BenchmarkParseError(f"{path}: empty file")
        if tuple(h.strip() for h in header) != CSV_HEADER:
            raise BenchmarkParseError(f"{path}:1: expected header {','.join(CSV_HEADER)}, got {header}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise BenchmarkParseError(f"{path}:{lineno}: expected 3 columns, got {len(row)}")
            key = row[0].strip()
            try:
                parse_key(key, space)
            except ValueError as exc:
                raise KeyNotInSpaceError(f"{path}:{lineno}: key {key!r} not in {space.name}: {exc}") from None
            try:
                val, test = float(row[1]), float(row[2])
            except ValueError:
                raise BenchmarkParseError(f"{path}:{lineno}: non-numeric accuracy") from None
            for v in (val, test):
                if not 0.0 <= v <= 100.0:
                    raise BenchmarkParseError(f"{path}:{lineno}: accuracy {v} outside [0, 100]")
            if key in records:
                raise DuplicateKeyError(f"{path}:{lineno}: duplicate key {key!r}")
            records[key] = (val, test)
    if not records:
        raise BenchmarkParseError(f"{path}: no records")
    table = BenchmarkTable(space, records, dataset_label or path.stem)
    if not space.is_pruned and not table.complete:
        warnings.warn(
            f"{path}: {len(records)} of {space.size} architectures present",
            IncompleteTableWarning,
            stacklevel=2,
        )
    return table


def write_benchmark(table: BenchmarkTable, path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for key, (val, test) in table.records.items():
            writer.writerow((key, f"{val:.6f}", f"{test:.6f}"))


class TabularOracle:
    kind = "tabular"

    def __init__(self, table: BenchmarkTable):
        self.table = table
        self.space = table.space

    def _record(self, arch):
        key = arch if isinstance(arch, str) else arch.key
        try:
            return self.table.records[key]
        except KeyError:
            raise OracleLookupError(key) from None

    def evaluate(self, arch: DiscreteArchitecture, generation: int = 0) -> float:
        return self._record(arch)[0] / 100.0

    def true_score(self, arch: DiscreteArchitecture) -> float:
        return self.evaluate(arch)

    def test_score(self, arch: DiscreteArchitecture) -> float:
        return self._record(arch)[1] / 100.0

    def describe(self) -> dict:
        return {"kind": self.kind, "dataset": self.table.dataset_label, "records": len(self.table)}


@dataclass
class SyntheticOracle:
    """Exhaustively tabulated S2 landscape.

    ``scores[i]`` is the validation score of the ``i``-th architecture in
    enumeration order; ``test_scores`` add a small independent jitter.
    """

    space: OperationSpace
    seed: int
    scores: np.ndarray
    test_scores: np.ndarray
    interaction_scale: float
    metadata: dict = field(default_factory=dict)
    kind = "synthetic"

    @property
    def optimum_key(self) -> str:
        return self.metadata["optimum_key"]

    def evaluate(self, arch: DiscreteArchitecture, generation: int = 0) -> float:
        if arch.space != self.space:
            raise OracleLookupError(arch.key)
        return float(self.scores[s2_index(arch)])

    def true_score(self, arch: DiscreteArchitecture) -> float:
        return self.evaluate(arch)

    def test_score(self, arch: DiscreteArchitecture) -> float:
        return float(self.test_scores[s2_index(arch)])

    def to_table(self, dataset_label: str | None = None) -> BenchmarkTable:
        records = {
            a.key: (100.0 * v, 100.0 * t)
            for a, v, t in zip(enumerate_space(self.space), self.scores, self.test_scores)
        }
        return BenchmarkTable(self.space, records, dataset_label or f"synthetic-{self.seed}")

    def describe(self) -> dict:
        return {"kind": self.kind, "seed": self.seed, **self.metadata}


def _choice_matrix(space: OperationSpace) -> np.ndarray:
    n_ops, n_edges = len(space.ops), len(space.edges)
    return np.array(list(itertools.product(range(n_ops), repeat=n_edges)), dtype=np.intp)


def make_synthetic(
    space="S2",
    rng_seed: int = 0,
    interaction_scale: float = 0.35,
    op_scale: float = 1.0,
    low: float = 0.60,
    high: float = 0.95,
) -> SyntheticOracle:
    """Seeded S2 landscape ``base + sum(edge utilities) + sum(pair interactions)``.

    An edge utility is a per-operation quality shared by all edges (spread
    ``op_scale``, mimicking how operation type dominates accuracy in real
    cell benchmarks) plus an independent per-edge term. Raw scores are
    mapped affinely onto ``[low, high]`` over the whole space, so the
    planted optimum scores exactly ``high``.
    """
    space = get_space(space)
    if space.is_pruned:
        raise UnsupportedSpaceError(f"synthetic landscapes need an enumerable space, not {space.name}")
    rng = np.random.default_rng(rng_seed)
    n_ops, n_edges = len(space.ops), len(space.edges)
    op_quality = rng.normal(0.0, op_scale, size=n_ops)
    utilities = op_quality[None, :] + rng.normal(0.0, 1.0, size=(n_edges, n_ops))
    pairs = list(itertools.combinations(range(n_edges), 2))
    interactions = rng.normal(0.0, interaction_scale, size=(len(pairs), n_ops, n_ops))
    base = rng.normal()

    choices = _choice_matrix(space)
    raw = np.full(choices.shape[0], base)
    for e in range(n_edges):
        raw += utilities[e, choices[:, e]]
    for p, (e1, e2) in enumerate(pairs):
        raw += interactions[p, choices[:, e1], choices[:, e2]]

    lo, hi = raw.min(), raw.max()
    scores = np.clip(low + (high - low) * (raw - lo) / (hi - lo), low, high)
    scores[np.argmax(raw)] = high
    test = np.clip(scores + rng.normal(0.0, 0.003, size=scores.shape), 0.0, 1.0)

    best = int(np.argmax(scores))
    optimum = architecture_from_choices(space, choices[best])
    runner_up = float(np.partition(scores, -2)[-2])
    metadata = {
        "optimum_key": canonical_key(optimum),
        "optimum_score": float(scores[best]),
        "runner_up_score": runner_up,
        "local_optima": count_local_optima(scores, space),
        "interaction_scale": interaction_scale,
        "op_scale": op_scale,
        "score_range": [low, high],
    }
    return SyntheticOracle(space, rng_seed, scores, test, interaction_scale, metadata)


def count_local_optima(scores: np.ndarray, space: OperationSpace) -> int:
    """Architectures no single-edge operation change can improve."""
    grid = np.asarray(scores).reshape((len(space.ops),) * len(space.edges))
    is_peak = np.ones(grid.shape, dtype=bool)
    for axis in range(grid.ndim):
        is_peak &= grid >= grid.max(axis=axis, keepdims=True)
    return int(is_peak.sum())


def _key_hash(key: str) -> int:
    return int.from_bytes(hashlib.blake2b(key.encode("utf-8"), digest_size=8).digest(), "little")


class NoisyOracle:
    """Adds ``N(0, sigma)`` to an inner oracle, clamped to ``[0, 1]``.

    With ``per_generation=False`` every architecture keeps a single fixed
    offset for the whole run.
    """

    kind = "noisy"

    def __init__(self, inner, sigma: float = 0.03, seed: int = 0, per_generation: bool = True):
        if sigma < 0:
            raise ValueError("noise sigma must be non-negative")
        self.inner = inner
        self.sigma = float(sigma)
        self.seed = int(seed)
        self.per_generation = per_generation
        self.space = inner.space

    def noise(self, key: str, generation: int) -> float:
        stamp = generation if self.per_generation else 0
        rng = np.random.default_rng([self.seed, stamp, _key_hash(key)])
        return float(rng.normal(0.0, self.sigma))

    def evaluate(self, arch: DiscreteArchitecture, generation: int = 0) -> float:
        value = self.inner.evaluate(arch, generation)
        if self.sigma == 0.0:
            return value
        return min(1.0, max(0.0, value + self.noise(arch.key, generation)))

    def true_score(self, arch: DiscreteArchitecture) -> float:
        return true_score(self.inner, arch)

    def test_score(self, arch: DiscreteArchitecture) -> float:
        return self.inner.test_score(arch)

    @property
    def metadata(self) -> dict:
        return getattr(self.inner, "metadata", {})

    def describe(self) -> dict:
        return {
            "kind": self.kind,
            "sigma": self.sigma,
            "seed": self.seed,
            "per_generation": self.per_generation,
            "inner": self.inner.describe(),
        }


def evaluate(oracle, arch: DiscreteArchitecture, generation: int = 0) -> float:
    return oracle.evaluate(arch, generation)


def true_score(oracle, arch: DiscreteArchitecture) -> float:
    """Noiseless score: unwraps noise layers, falls back to ``evaluate``."""
    fn = getattr(oracle, "true_score", None)
    return fn(arch) if fn is not None else oracle.evaluate(arch)


def oracle_from_spec(
    spec: str,
    space="S2",
    noise_sigma: float = 0.0,
    noise_seed: int = 0,
    per_generation: bool = True,
):
    """Build an oracle from ``tabular:PATH`` or ``synthetic:SEED``.

    A positive ``noise_sigma`` wraps the result in :class:`NoisyOracle`.
    """
    space = get_space(space)
    kind, sep, arg = spec.partition(":")
    if not sep or not arg:
        raise ValueError(f"oracle spec {spec!r} must look like tabular:PATH or synthetic:SEED")
    if kind == "tabular":
        oracle = TabularOracle(load_benchmark(arg, space))
    elif kind == "synthetic":
        try:
            seed = int(arg)
        except ValueError:
            raise ValueError(f"synthetic oracle seed must be an integer, got {arg!r}") from None
        oracle = make_synthetic(space, seed)
    else:
        raise ValueError(f"unknown oracle kind {kind!r}")
    if noise_sigma > 0:
        oracle = NoisyOracle(oracle, noise_sigma, noise_seed, per_generation)
    return oracle


def write_metadata(oracle, path) -> None:
    Path(path).write_text(json.dumps(oracle.describe(), indent=2, sort_keys=True) + "\n", encoding="utf-8")

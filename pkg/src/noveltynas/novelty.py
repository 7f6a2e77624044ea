"""Architecture similarity, dissimilarity and k-nearest-neighbour novelty.

Similarity is the Jaccard index over ``(cell, source, target, operation)``
edge sets::

    sim(a, b) = |a & b| / (|a| + |b| - |a & b|)

Architectures are represented internally by their one-hot genotype, so the
intersection count of many pairs is one matrix product.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .arch_space import DiscreteArchitecture
from .exceptions import DomainError

__all__ = [
    "NoveltyConfig",
    "Archive",
    "similarity",
    "dissimilarity",
    "dissimilarity_matrix",
    "novelty",
    "reference_pool",
    "population_novelty",
    "archive_update",
]


@dataclass(frozen=True)
class NoveltyConfig:
    k: int = 5

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise ValueError(f"k must be a positive integer, got {self.k!r}")


def _check_same_space(a1: DiscreteArchitecture, a2: DiscreteArchitecture):
    if a1.space != a2.space:
        raise DomainError(f"cannot compare {a1.space.name} and {a2.space.name} architectures")


def similarity(a1: DiscreteArchitecture, a2: DiscreteArchitecture) -> float:
    _check_same_space(a1, a2)
    common = len(a1.edges & a2.edges)
    union = len(a1.edges) + len(a2.edges) - common
    if union == 0:
        return 1.0
    return common / union


def dissimilarity(a1: DiscreteArchitecture, a2: DiscreteArchitecture) -> float:
    return 1.0 - similarity(a1, a2)


def dissimilarity_matrix(left: np.ndarray, right: np.ndarray) -> np.ndarray:
    """Pairwise dissimilarities between rows of two one-hot matrices."""
    left = np.atleast_2d(left)
    right = np.atleast_2d(right)
    common = left @ right.T
    sizes = left.sum(axis=1)[:, None] + right.sum(axis=1)[None, :]
    union = sizes - common
    with np.errstate(invalid="ignore", divide="ignore"):
        sim = np.where(union > 0, common / union, 1.0)
    return 1.0 - sim


def _knn_mean(distances: np.ndarray, k: int) -> float:
    if distances.size == 0:
        return 1.0
    if distances.size > k:
        distances = np.partition(distances, k - 1)[:k]
    return float(np.mean(distances))


def novelty(
    arch: DiscreteArchitecture,
    pool: Sequence[DiscreteArchitecture],
    cfg: NoveltyConfig = NoveltyConfig(),
    exclude_self: bool = True,
) -> float:
    """Mean dissimilarity to the ``cfg.k`` nearest members of ``pool``.

    ``pool`` is a multiset. When ``exclude_self`` is set, one entry with the
    same key as ``arch`` is dropped before the neighbour search; any further
    copies stay and pull the score towards 0. With fewer than ``k``
    candidates the mean runs over what is available, and an empty pool
    scores 1.
    """
    candidates = list(pool)
    if exclude_self:
        key = arch.key
        for i, other in enumerate(candidates):
            if other.key == key:
                del candidates[i]
                break
    if not candidates:
        return 1.0
    for other in candidates:
        _check_same_space(arch, other)
    dists = dissimilarity_matrix(arch.one_hot(), np.stack([c.one_hot() for c in candidates]))[0]
    return _knn_mean(dists, cfg.k)


class Archive:
    """Insertion-ordered, de-duplicated store of every architecture seen.

    ``cap`` bounds the size by evicting the oldest entries; the default
    (``None``) keeps everything.
    """

    def __init__(self, space=None, cap: int | None = None):
        if cap is not None and cap < 1:
            raise ValueError("archive cap must be positive")
        self.space = space
        self.cap = cap
        self._keys: list[str] = []
        self._index: dict[str, int] = {}
        self._rows: list[np.ndarray] = []
        self._matrix: np.ndarray | None = None

    def __len__(self):
        return len(self._keys)

    def __contains__(self, key) -> bool:
        if isinstance(key, DiscreteArchitecture):
            key = key.key
        return key in self._index

    def __iter__(self):
        return iter(self._keys)

    @property
    def keys(self) -> tuple[str, ...]:
        """Immutable snapshot of the keys in insertion order."""
        return tuple(self._keys)

    def matrix(self) -> np.ndarray:
        if self._matrix is None:
            width = self.space.genotype_length if self.space is not None else 0
            self._matrix = np.stack(self._rows) if self._rows else np.zeros((0, width))
        return self._matrix

    def add(self, arch: DiscreteArchitecture) -> bool:
        if self.space is None:
            self.space = arch.space
        elif arch.space != self.space:
            raise DomainError(f"archive holds {self.space.name}, got {arch.space.name}")
        key = arch.key
        if key in self._index:
            return False
        self._index[key] = len(self._keys)
        self._keys.append(key)
        self._rows.append(arch.one_hot())
        self._matrix = None
        if self.cap is not None and len(self._keys) > self.cap:
            self._evict(len(self._keys) - self.cap)
        return True

    def _evict(self, count: int):
        self._keys = self._keys[count:]
        self._rows = self._rows[count:]
        self._index = {k: i for i, k in enumerate(self._keys)}
        self._matrix = None

    def update(self, archs: Iterable[DiscreteArchitecture]) -> int:
        """Insert every architecture; returns how many were new."""
        return sum(self.add(a) for a in archs)


def archive_update(archive: Archive, population: Iterable[DiscreteArchitecture]) -> Archive:
    archive.update(population)
    return archive


def reference_pool(archive: Archive, population: Sequence[DiscreteArchitecture]):
    """Neighbour pool for scoring ``population``: archive united with it by key.

    Returns ``(matrix, keys)``. Archive entries whose key also occurs in the
    population are represented by the population copies only, so every key
    appears ``max(1, multiplicity in population)`` times.
    """
    in_pop = {a.key for a in population}
    arch_keys = [k for k in archive.keys if k not in in_pop]
    rows = []
    if arch_keys:
        full = archive.matrix()
        rows.append(full[[archive._index[k] for k in arch_keys]])
    if population:
        rows.append(np.stack([a.one_hot() for a in population]))
    if not rows:
        return np.zeros((0, 0)), []
    return np.concatenate(rows), arch_keys + [a.key for a in population]


def population_novelty(
    population: Sequence[DiscreteArchitecture],
    archive: Archive,
    cfg: NoveltyConfig = NoveltyConfig(),
) -> np.ndarray:
    """Novelty of each population member against ``archive`` plus the population.

    Each member is removed from its own neighbour set exactly once (its own
    slot in the pool); other copies of it remain as zero-distance neighbours.
    """
    if not population:
        return np.zeros(0)
    pool, _ = reference_pool(archive, population)
    offset = pool.shape[0] - len(population)
    pop_rows = pool[offset:]
    dists = dissimilarity_matrix(pop_rows, pool)
    scores = np.empty(len(population))
    for i in range(len(population)):
        row = np.delete(dists[i], offset + i)
        scores[i] = _knn_mean(row, cfg.k)
    return scores

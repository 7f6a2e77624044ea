"""NSGA-II building blocks for real-coded genotypes on ``[0, 1]``.

Objectives are passed as an ``(n, m)`` array and are always *maximized*.
Every tie is broken by population index so that a seeded run is
bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError, SelectionError

__all__ = [
    "EAConfig",
    "Individual",
    "dominates",
    "fast_nondominated_sort",
    "crowding_distance",
    "rank_and_crowding",
    "binary_tournament",
    "sbx_crossover",
    "polynomial_mutation",
    "environmental_selection",
    "make_offspring",
]


@dataclass(frozen=True)
class EAConfig:
    population_size: int = 20
    generations: int = 50
    crossover_eta: float = 15.0
    crossover_prob: float = 0.7
    mutation_eta: float = 20.0
    mutation_prob: float = 0.1
    rng_seed: int = 0

    def __post_init__(self):
        for name in ("crossover_prob", "mutation_prob"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {p}")
        for name in ("crossover_eta", "mutation_eta"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.population_size < 4 or self.population_size % 2:
            raise ValueError(f"population_size must be even and >= 4, got {self.population_size}")
        if self.generations < 0:
            raise ValueError("generations must be non-negative")


@dataclass
class Individual:
    """A genotype with its objectives and the sort data derived from them.

    ``stamp`` records the sort pass that produced ``rank``/``crowding``;
    reading them through :meth:`sort_info` with a different stamp raises.
    """

    genotype: np.ndarray
    key: str
    f_acc: float
    f_nov: float
    evaluated_at: int = 0
    rank: int = -1
    crowding: float = 0.0
    stamp: int = -1

    @property
    def objectives(self) -> tuple[float, float]:
        return (self.f_acc, self.f_nov)

    def sort_info(self, stamp: int) -> tuple[int, float]:
        if stamp != self.stamp:
            raise RuntimeError(f"rank/crowding are from sort pass {self.stamp}, not {stamp}")
        return self.rank, self.crowding


def dominates(p, q) -> bool:
    """``p`` is no worse than ``q`` in every objective and better in one."""
    p = np.asarray(getattr(p, "objectives", p), dtype=float)
    q = np.asarray(getattr(q, "objectives", q), dtype=float)
    return bool(np.all(p >= q) and np.any(p > q))


def fast_nondominated_sort(F) -> list[list[int]]:
    """Partition row indices of ``F`` into non-dominated fronts.

    Deb's bookkeeping algorithm: domination counts plus dominated sets.
    Indices within a front are ascending.
    """
    F = np.asarray(F, dtype=float)
    if F.ndim == 1:
        F = F[:, None]
    n = F.shape[0]
    if n == 0:
        return []
    geq = np.all(F[:, None, :] >= F[None, :, :], axis=2)
    gt = np.any(F[:, None, :] > F[None, :, :], axis=2)
    dom = geq & gt  # dom[i, j]: i dominates j
    counts = dom.sum(axis=0)
    fronts = []
    current = [i for i in range(n) if counts[i] == 0]
    while current:
        fronts.append(current)
        nxt = []
        for i in current:
            for j in np.flatnonzero(dom[i]):
                counts[j] -= 1
                if counts[j] == 0:
                    nxt.append(int(j))
        current = sorted(nxt)
    return fronts


def crowding_distance(F) -> np.ndarray:
    """Crowding distance of each row of a single front.

    Extremes of each objective get ``inf``; interior points add the
    normalized gap between their sorted neighbours. Objectives with zero
    range contribute nothing.
    """
    F = np.asarray(F, dtype=float)
    if F.ndim == 1:
        F = F[:, None]
    n, m = F.shape
    if n == 0:
        return np.zeros(0)
    dist = np.zeros(n)
    if n <= 2:
        dist[:] = np.inf
        return dist
    for obj in range(m):
        order = np.argsort(F[:, obj], kind="stable")
        vals = F[order, obj]
        span = vals[-1] - vals[0]
        dist[order[0]] = np.inf
        dist[order[-1]] = np.inf
        if span <= 0:
            continue
        dist[order[1:-1]] += (vals[2:] - vals[:-2]) / span
    return dist


def rank_and_crowding(F, use_crowding: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Front index and crowding distance for every row of ``F``."""
    F = np.asarray(F, dtype=float)
    n = F.shape[0]
    rank = np.zeros(n, dtype=int)
    crowd = np.zeros(n)
    for r, front in enumerate(fast_nondominated_sort(F)):
        rank[front] = r
        if use_crowding:
            crowd[front] = crowding_distance(F[front])
    return rank, crowd


def binary_tournament(rank, crowding, rng: np.random.Generator) -> int:
    """Index of the winner of one tournament between two distinct members.

    Lower rank wins, then larger crowding, then lower index.
    """
    n = len(rank)
    if n < 2:
        raise SelectionError("binary tournament needs at least two individuals")
    a, b = rng.choice(n, size=2, replace=False)
    a, b = int(min(a, b)), int(max(a, b))
    if rank[a] != rank[b]:
        return a if rank[a] < rank[b] else b
    if crowding[a] != crowding[b]:
        return a if crowding[a] > crowding[b] else b
    return a


def sbx_crossover(p1, p2, eta: float, prob: float, rng: np.random.Generator, clip: bool = True):
    """Simulated binary crossover on ``[0, 1]`` vectors.

    The whole pair crosses with probability ``prob``; each variable then
    crosses with probability 0.5 and the two resulting values are handed to
    the children in random order. Children keep the parents' midpoint;
    ``clip=False`` exposes the pre-clipping values.
    """
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    if p1.shape != p2.shape:
        raise DomainError(f"parent shapes differ: {p1.shape} vs {p2.shape}")
    c1, c2 = p1.copy(), p2.copy()
    if rng.random() >= prob:
        return c1, c2
    n = p1.shape[0]
    cross = rng.random(n) < 0.5
    u = rng.random(n)
    cross &= np.abs(p1 - p2) >= 1e-14
    beta = np.where(
        u <= 0.5,
        (2.0 * u) ** (1.0 / (eta + 1.0)),
        (1.0 / (2.0 * (1.0 - u))) ** (1.0 / (eta + 1.0)),
    )
    mid = 0.5 * (p1 + p2)
    half = 0.5 * np.abs(p2 - p1)
    lower = mid - beta * half
    upper = mid + beta * half
    # lower/upper children are exchanged per variable with probability 0.5
    swap = rng.random(n) < 0.5
    c1[cross] = np.where(swap, upper, lower)[cross]
    c2[cross] = np.where(swap, lower, upper)[cross]
    if clip:
        np.clip(c1, 0.0, 1.0, out=c1)
        np.clip(c2, 0.0, 1.0, out=c2)
    return c1, c2


def polynomial_mutation(g, eta: float, prob: float, rng: np.random.Generator) -> np.ndarray:
    """Deb's bounded polynomial mutation with bounds ``[0, 1]``.

    Each component mutates independently with probability ``prob``.
    """
    x = np.array(g, dtype=float)
    n = x.shape[0]
    mask = rng.random(n) < prob
    u = rng.random(n)
    if not mask.any():
        return x
    xm = x[mask]
    um = u[mask]
    delta1 = xm  # (x - lower) / (upper - lower)
    delta2 = 1.0 - xm
    power = 1.0 / (eta + 1.0)
    low = um < 0.5
    val_low = 2.0 * um + (1.0 - 2.0 * um) * (1.0 - delta1) ** (eta + 1.0)
    val_high = 2.0 * (1.0 - um) + 2.0 * (um - 0.5) * (1.0 - delta2) ** (eta + 1.0)
    deltaq = np.where(low, val_low ** power - 1.0, 1.0 - val_high ** power)
    x[mask] = np.clip(xm + deltaq, 0.0, 1.0)
    return x


def environmental_selection(F, target_size: int, use_crowding: bool = True):
    """Elitist NSGA-II survival.

    Whole fronts are admitted in rank order; the front that overflows is
    truncated by descending crowding distance (ties to the lower index).

    Returns ``(selected, rank, crowding)`` where ``selected`` holds pool
    indices in ascending order and ``rank``/``crowding`` are computed over
    the full pool.
    """
    F = np.asarray(F, dtype=float)
    n = F.shape[0]
    if target_size > n:
        raise SelectionError(f"cannot select {target_size} from a pool of {n}")
    rank = np.zeros(n, dtype=int)
    crowd = np.zeros(n)
    chosen: list[int] = []
    for r, front in enumerate(fast_nondominated_sort(F)):
        rank[front] = r
        if use_crowding:
            crowd[front] = crowding_distance(F[front])
        if len(chosen) >= target_size:
            continue
        room = target_size - len(chosen)
        if len(front) <= room:
            chosen.extend(front)
        else:
            ordered = sorted(front, key=lambda i: (-crowd[i], i))
            chosen.extend(ordered[:room])
    return np.array(sorted(chosen), dtype=int), rank, crowd


def make_offspring(genotypes, rank, crowding, cfg: EAConfig, rng: np.random.Generator):
    """``len(genotypes)`` children via tournament, SBX and polynomial mutation."""
    n = len(genotypes)
    children = []
    while len(children) < n:
        a = binary_tournament(rank, crowding, rng)
        b = binary_tournament(rank, crowding, rng)
        c1, c2 = sbx_crossover(genotypes[a], genotypes[b], cfg.crossover_eta, cfg.crossover_prob, rng)
        children.append(polynomial_mutation(c1, cfg.mutation_eta, cfg.mutation_prob, rng))
        children.append(polynomial_mutation(c2, cfg.mutation_eta, cfg.mutation_prob, rng))
    return children[:n]

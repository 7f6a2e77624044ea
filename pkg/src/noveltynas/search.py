"""The novelty-driven evolutionary search loop.

Each generation the current batch of genotypes is decoded and scored for
accuracy (through the oracle, stamped with the generation index) and for
novelty (against the archive plus the batch). The batch then enters the
archive, competes with the previous survivors in NSGA-II environmental
selection, and the survivors breed the next batch. Survivors keep the
scores they were given when evaluated, so every generation costs exactly
``population_size`` oracle calls.

``mode`` picks the objectives used for selection:

``multi``
    (accuracy, novelty), full NSGA-II with crowding distance.
``accuracy-only`` / ``novelty-only``
    a single objective; ranks come from the scalar order and crowding is
    not used. Variation operators are unchanged.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .arch_space import OperationSpace, decode, get_space, random_genotype
from .evaluator import true_score
from .exceptions import ConfigError
from .moea import (
    EAConfig,
    Individual,
    environmental_selection,
    fast_nondominated_sort,
    make_offspring,
)
from .novelty import Archive, NoveltyConfig, population_novelty

__all__ = [
    "MODES",
    "SearchConfig",
    "GenerationRecord",
    "SearchResult",
    "run_search",
    "diversity_series",
    "exploration_set",
    "TELEMETRY_HEADER",
]

MODES = ("multi", "accuracy-only", "novelty-only")
TELEMETRY_HEADER = ("gen", "key", "f_acc", "f_nov", "rank", "crowding")


@dataclass(frozen=True)
class SearchConfig:
    oracle: Any
    space: OperationSpace | str = "S2"
    ea: EAConfig = field(default_factory=EAConfig)
    novelty: NoveltyConfig = field(default_factory=NoveltyConfig)
    mode: str = "multi"
    telemetry_path: str | Path | None = None
    workers: int = 1
    archive_cap: int | None = None
    oracle_spec: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "space", get_space(self.space))
        if self.mode not in MODES:
            raise ConfigError("mode", f"expected one of {', '.join(MODES)}, got {self.mode!r}")
        if self.oracle is None or not hasattr(self.oracle, "evaluate"):
            raise ConfigError("oracle", "an oracle with an evaluate() method is required")
        oracle_space = getattr(self.oracle, "space", self.space)
        if oracle_space != self.space:
            raise ConfigError("space", f"oracle covers {oracle_space.name}, search uses {self.space.name}")
        if self.workers < 1:
            raise ConfigError("workers", "must be at least 1")

    def to_dict(self) -> dict:
        describe = getattr(self.oracle, "describe", None)
        return {
            "space": self.space.name,
            "mode": self.mode,
            "population_size": self.ea.population_size,
            "generations": self.ea.generations,
            "crossover_eta": self.ea.crossover_eta,
            "crossover_prob": self.ea.crossover_prob,
            "mutation_eta": self.ea.mutation_eta,
            "mutation_prob": self.ea.mutation_prob,
            "seed": self.ea.rng_seed,
            "k": self.novelty.k,
            "archive_cap": self.archive_cap,
            "oracle": self.oracle_spec,
            "oracle_info": describe() if describe else type(self.oracle).__name__,
        }


@dataclass
class GenerationRecord:
    generation: int
    individuals: list[tuple[str, float, float, int, float]]
    unique_count: int
    archive_size: int
    cumulative: int

    def to_dict(self) -> dict:
        return {
            "generation": self.generation,
            "unique_count": self.unique_count,
            "archive_size": self.archive_size,
            "cumulative": self.cumulative,
            "individuals": [
                {"key": k, "f_acc": a, "f_nov": n, "rank": r, "crowding": _enc(c)}
                for k, a, n, r, c in self.individuals
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GenerationRecord":
        inds = [
            (i["key"], i["f_acc"], i["f_nov"], i["rank"], _dec(i["crowding"]))
            for i in d["individuals"]
        ]
        return cls(d["generation"], inds, d["unique_count"], d["archive_size"], d["cumulative"])


def _enc(x: float):
    return "inf" if math.isinf(x) else x


def _dec(x):
    return math.inf if x == "inf" else float(x)


@dataclass
class SearchResult:
    pareto_front: list[dict]
    best: dict
    history: list[GenerationRecord]
    config: dict
    seed: int
    mode: str
    explored: list[str]

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "seed": self.seed,
            "config": self.config,
            "best": self.best,
            "pareto_front": self.pareto_front,
            "explored": self.explored,
            "history": [r.to_dict() for r in self.history],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, allow_nan=False) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "SearchResult":
        return cls(
            pareto_front=d["pareto_front"],
            best=d["best"],
            history=[GenerationRecord.from_dict(r) for r in d["history"]],
            config=d["config"],
            seed=d["seed"],
            mode=d["mode"],
            explored=d["explored"],
        )

    @classmethod
    def load(cls, path) -> "SearchResult":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def _objectives(batch: list[Individual], mode: str) -> np.ndarray:
    if mode == "multi":
        return np.array([[i.f_acc, i.f_nov] for i in batch])
    if mode == "accuracy-only":
        return np.array([[i.f_acc] for i in batch])
    return np.array([[i.f_nov] for i in batch])


def _front_entry(ind: Individual, oracle, space) -> dict:
    return {
        "key": ind.key,
        "f_acc": ind.f_acc,
        "f_nov": ind.f_nov,
        "true_score": true_score(oracle, decode(ind.genotype, space)),
    }


def _pareto_front(survivors: list[Individual]) -> list[Individual]:
    F = np.array([[i.f_acc, i.f_nov] for i in survivors])
    front, seen = [], set()
    for i in fast_nondominated_sort(F)[0]:
        ident = (survivors[i].key, survivors[i].f_acc, survivors[i].f_nov)
        if ident not in seen:
            seen.add(ident)
            front.append(survivors[i])
    return front


def _best(front: list[Individual]) -> Individual:
    return min(front, key=lambda i: (-i.f_acc, -i.f_nov, i.key))


def _telemetry_rows(record: GenerationRecord):
    for key, f_acc, f_nov, rank, crowd in record.individuals:
        yield (record.generation, key, repr(f_acc), repr(f_nov), rank, repr(crowd))


def run_search(cfg: SearchConfig) -> SearchResult:
    """Run the search described by ``cfg``; deterministic given its seed."""
    space, ea, oracle = cfg.space, cfg.ea, cfg.oracle
    n = ea.population_size
    rng = np.random.default_rng(ea.rng_seed)
    genotypes = [random_genotype(space, rng) for _ in range(n)]
    archive = Archive(space, cfg.archive_cap)
    discovered: dict[str, None] = {}
    survivors: list[Individual] = []
    history: list[GenerationRecord] = []
    use_crowding = cfg.mode == "multi"

    telemetry = None
    if cfg.telemetry_path is not None:
        telemetry = open(cfg.telemetry_path, "w", newline="", encoding="utf-8")
        writer = csv.writer(telemetry, lineterminator="\n")
        writer.writerow(TELEMETRY_HEADER)
    pool_exec = ThreadPoolExecutor(cfg.workers) if cfg.workers > 1 else None

    try:
        n_iter = max(ea.generations, 1)
        for gen in range(n_iter):
            archs = [decode(g, space) for g in genotypes]
            if pool_exec is not None:
                f_acc = list(pool_exec.map(lambda a: oracle.evaluate(a, gen), archs))
            else:
                f_acc = [oracle.evaluate(a, gen) for a in archs]
            f_nov = population_novelty(archs, archive, cfg.novelty)
            archive.update(archs)
            for a in archs:
                discovered.setdefault(a.key)

            batch = [
                Individual(g, a.key, float(acc), float(nov), evaluated_at=gen)
                for g, a, acc, nov in zip(genotypes, archs, f_acc, f_nov)
            ]
            pool = survivors + batch
            chosen, rank, crowd = environmental_selection(
                _objectives(pool, cfg.mode), n, use_crowding=use_crowding
            )
            survivors = []
            for i in chosen:
                ind = pool[i]
                ind.rank, ind.crowding, ind.stamp = int(rank[i]), float(crowd[i]), gen
                survivors.append(ind)

            record = GenerationRecord(
                generation=gen,
                individuals=[(s.key, s.f_acc, s.f_nov, s.rank, s.crowding) for s in survivors],
                unique_count=len({s.key for s in survivors}),
                archive_size=len(archive),
                cumulative=len(discovered),
            )
            history.append(record)
            if telemetry is not None:
                writer.writerows(_telemetry_rows(record))
                telemetry.flush()

            if gen + 1 < n_iter:
                info = [s.sort_info(gen) for s in survivors]
                genotypes = make_offspring(
                    [s.genotype for s in survivors],
                    [r for r, _ in info],
                    [c for _, c in info],
                    ea,
                    rng,
                )
    finally:
        if telemetry is not None:
            telemetry.close()
        if pool_exec is not None:
            pool_exec.shutdown()

    front = _pareto_front(survivors)
    best = _best(front)
    return SearchResult(
        pareto_front=[_front_entry(i, oracle, space) for i in front],
        best=_front_entry(best, oracle, space),
        history=history,
        config=cfg.to_dict(),
        seed=ea.rng_seed,
        mode=cfg.mode,
        explored=list(discovered),
    )


def diversity_series(result: SearchResult) -> list[int]:
    """Distinct architectures among the survivors of each generation."""
    return [r.unique_count for r in result.history]


def exploration_set(result: SearchResult) -> set[str]:
    """Every architecture key evaluated during the run."""
    return set(result.explored)

"""Novelty-driven multi-objective evolutionary neural architecture search."""

from .arch_space import (
    S1,
    S2,
    DiscreteArchitecture,
    OperationSpace,
    canonical_key,
    decode,
    enumerate_space,
    get_space,
    parse_key,
    random_genotype,
)
from .evaluator import (
    BenchmarkTable,
    NoisyOracle,
    SyntheticOracle,
    TabularOracle,
    load_benchmark,
    make_synthetic,
    oracle_from_spec,
)
from .moea import EAConfig
from .novelty import Archive, NoveltyConfig, dissimilarity, similarity
from .search import SearchConfig, SearchResult, diversity_series, exploration_set, run_search

__version__ = "0.1.0"

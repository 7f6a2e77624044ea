"""Cell-based search spaces, continuous genotypes and discrete architectures.

Two spaces are provided:

``S1``
    DARTS-style cells with 7 nodes (2 inputs, 4 intermediate, 1 output) and
    8 candidate operations. Intermediate node ``m`` has ``m`` candidate
    incoming edges, giving 14 edges per cell. Both a normal and a reduction
    cell are searched, so a genotype holds ``2 * 14 * 8 = 224`` weights.

``S2``
    NAS-Bench-201 cells with 4 nodes, every pair ``i < j`` connected, and 5
    operations. Only the normal cell is searched: ``6 * 5 = 30`` weights.

A genotype is a flat ``float`` array in ``[0, 1]`` laid out as
``[cell][edge][op]`` (row-major). Decoding takes the argmax operation per
edge row; ties go to the lowest operation index. In S1 each intermediate
node additionally keeps only its two strongest incoming edges, ranked by the
row maximum, ties going to the lower source node.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .exceptions import EncodingError, UnsupportedSpaceError

__all__ = [
    "OperationSpace",
    "DiscreteArchitecture",
    "S1",
    "S2",
    "SPACES",
    "get_space",
    "validate_genotype",
    "decode",
    "canonical_key",
    "parse_key",
    "enumerate_space",
    "random_genotype",
    "one_hot_genotype",
    "architecture_from_choices",
    "s2_index",
]

DARTS_OPS = (
    "none",
    "max_pool_3x3",
    "avg_pool_3x3",
    "skip_connect",
    "sep_conv_3x3",
    "sep_conv_5x5",
    "dil_conv_3x3",
    "dil_conv_5x5",
)

NB201_OPS = (
    "none",
    "skip_connect",
    "nor_conv_1x1",
    "nor_conv_3x3",
    "avg_pool_3x3",
)


@dataclass(frozen=True)
class OperationSpace:
    """Static description of a cell search space.

    ``edges`` is ordered by target node, then source node; that order fixes
    the genotype row layout.
    """

    name: str
    ops: tuple[str, ...]
    num_nodes: int
    edges: tuple[tuple[int, int], ...]
    cells_per_genotype: int
    # S1 only: nodes whose incoming edges are pruned to the strongest two.
    edges_per_node: int | None = None
    _edge_index: dict = field(init=False, repr=False, compare=False, hash=False)
    _op_index: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "_edge_index", {e: i for i, e in enumerate(self.edges)})
        object.__setattr__(self, "_op_index", {o: i for i, o in enumerate(self.ops)})

    @property
    def genotype_length(self) -> int:
        return self.cells_per_genotype * len(self.edges) * len(self.ops)

    @property
    def cell_shape(self) -> tuple[int, int, int]:
        return (self.cells_per_genotype, len(self.edges), len(self.ops))

    @property
    def is_pruned(self) -> bool:
        return self.edges_per_node is not None

    @property
    def size(self) -> int:
        """Number of distinct discrete architectures (S2 only is enumerable)."""
        return len(self.ops) ** len(self.edges)

    def edge_index(self, src: int, dst: int) -> int:
        return self._edge_index[(src, dst)]

    def op_index(self, op: str) -> int:
        return self._op_index[op]

    def intermediate_nodes(self) -> list[int]:
        return sorted({dst for _, dst in self.edges})


def _s1_edges() -> tuple[tuple[int, int], ...]:
    return tuple((src, dst) for dst in range(2, 6) for src in range(dst))


def _s2_edges() -> tuple[tuple[int, int], ...]:
    return tuple((src, dst) for dst in range(1, 4) for src in range(dst))


S1 = OperationSpace(
    name="S1",
    ops=DARTS_OPS,
    num_nodes=7,
    edges=_s1_edges(),
    cells_per_genotype=2,
    edges_per_node=2,
)

S2 = OperationSpace(
    name="S2",
    ops=NB201_OPS,
    num_nodes=4,
    edges=_s2_edges(),
    cells_per_genotype=1,
)

SPACES = {"S1": S1, "S2": S2}


def get_space(name: str | OperationSpace) -> OperationSpace:
    if isinstance(name, OperationSpace):
        return name
    try:
        return SPACES[name.upper()]
    except KeyError:
        raise UnsupportedSpaceError(f"unknown search space {name!r}; expected S1 or S2") from None


@dataclass(frozen=True)
class DiscreteArchitecture:
    """A set of ``(cell, source, target, operation)`` edges.

    Two architectures compare equal iff they hold the same edge set in the
    same space, which is also exactly when their canonical keys match.
    """

    space: OperationSpace
    edges: frozenset

    def __len__(self):
        return len(self.edges)

    @functools.cached_property
    def key(self) -> str:
        return canonical_key(self)

    @functools.cached_property
    def _one_hot(self) -> np.ndarray:
        vec = one_hot_genotype(self)
        vec.flags.writeable = False
        return vec

    def one_hot(self) -> np.ndarray:
        """Binary indicator vector in genotype layout (read-only)."""
        return self._one_hot

    def __str__(self):
        return self.key


def validate_genotype(values, space: OperationSpace) -> np.ndarray:
    g = np.asarray(values, dtype=float)
    if g.ndim != 1 or g.shape[0] != space.genotype_length:
        raise EncodingError(
            f"{space.name} genotype must be a flat vector of length "
            f"{space.genotype_length}, got shape {g.shape}"
        )
    if not np.all(np.isfinite(g)) or g.min() < 0.0 or g.max() > 1.0:
        bad = int(np.flatnonzero(~((g >= 0.0) & (g <= 1.0)))[0])
        raise EncodingError(f"genotype component {bad} = {g[bad]!r} outside [0, 1]")
    return g


def decode(values, space: OperationSpace) -> DiscreteArchitecture:
    """Discretize a genotype into an architecture.

    ``np.argmax`` returns the first maximal index, which gives the
    lowest-index tie-break for free.
    """
    g = validate_genotype(values, space).reshape(space.cell_shape)
    best_op = np.argmax(g, axis=2)
    strength = np.max(g, axis=2)
    edges = []
    for cell in range(space.cells_per_genotype):
        if not space.is_pruned:
            for e, (src, dst) in enumerate(space.edges):
                edges.append((cell, src, dst, space.ops[best_op[cell, e]]))
            continue
        for node in space.intermediate_nodes():
            candidates = [e for e, (_, dst) in enumerate(space.edges) if dst == node]
            # sort key: strongest first, then lower source node
            ranked = sorted(candidates, key=lambda e: (-strength[cell, e], space.edges[e][0]))
            for e in ranked[: space.edges_per_node]:
                src, dst = space.edges[e]
                edges.append((cell, src, dst, space.ops[best_op[cell, e]]))
    return DiscreteArchitecture(space, frozenset(edges))


def canonical_key(arch: DiscreteArchitecture) -> str:
    """Stable string identifier.

    S2 uses the NAS-Bench-201 string, e.g.
    ``|none~0|+|none~0|none~1|+|none~0|none~1|none~2|``. S1 joins
    ``src-dst:op`` tuples with ``;`` sorted by (dst, src), cells with ``//``.
    """
    space = arch.space
    if not space.is_pruned:
        by_edge = {(src, dst): op for _, src, dst, op in arch.edges}
        groups = []
        for dst in range(1, space.num_nodes):
            ops = [f"{by_edge[(src, dst)]}~{src}" for src in range(dst)]
            groups.append("|" + "|".join(ops) + "|")
        return "+".join(groups)
    cells = []
    for cell in range(space.cells_per_genotype):
        items = sorted(
            ((dst, src, op) for c, src, dst, op in arch.edges if c == cell),
        )
        cells.append(";".join(f"{src}-{dst}:{op}" for dst, src, op in items))
    return "//".join(cells)


def parse_key(key: str, space: OperationSpace) -> DiscreteArchitecture:
    """Inverse of :func:`canonical_key`; raises ``ValueError`` on anything malformed."""
    edges = set()
    if not space.is_pruned:
        groups = key.split("+")
        if len(groups) != space.num_nodes - 1:
            raise ValueError(f"expected {space.num_nodes - 1} node groups, got {len(groups)}")
        for dst, group in enumerate(groups, start=1):
            if not (group.startswith("|") and group.endswith("|")) or len(group) < 2:
                raise ValueError(f"malformed node group {group!r}")
            items = group[1:-1].split("|")
            if len(items) != dst:
                raise ValueError(f"node {dst} needs {dst} inputs, got {len(items)}")
            for item in items:
                op, _, src = item.rpartition("~")
                if op not in space.ops:
                    raise ValueError(f"operation {op!r} not in {space.name}")
                if not src.isdigit() or int(src) >= dst:
                    raise ValueError(f"bad source node in {item!r}")
                edges.add((0, int(src), dst, op))
        if len(edges) != len(space.edges):
            raise ValueError("duplicate edges in key")
    else:
        cells = key.split("//")
        if len(cells) != space.cells_per_genotype:
            raise ValueError(f"expected {space.cells_per_genotype} cells, got {len(cells)}")
        for cell, text in enumerate(cells):
            incoming = {}
            for item in text.split(";"):
                pair, sep, op = item.partition(":")
                src, dash, dst = pair.partition("-")
                if not (sep and dash and src.isdigit() and dst.isdigit()):
                    raise ValueError(f"malformed edge {item!r}")
                src, dst = int(src), int(dst)
                if (src, dst) not in space._edge_index:
                    raise ValueError(f"edge {src}-{dst} not in {space.name}")
                if op not in space.ops:
                    raise ValueError(f"operation {op!r} not in {space.name}")
                if (cell, src, dst) in {(c, s, d) for c, s, d, _ in edges}:
                    raise ValueError(f"duplicate edge {src}-{dst}")
                edges.add((cell, src, dst, op))
                incoming[dst] = incoming.get(dst, 0) + 1
            for node in space.intermediate_nodes():
                if incoming.get(node, 0) != space.edges_per_node:
                    raise ValueError(
                        f"node {node} in cell {cell} needs {space.edges_per_node} inputs"
                    )
    arch = DiscreteArchitecture(space, frozenset(edges))
    if canonical_key(arch) != key:
        raise ValueError(f"key {key!r} is not in canonical form")
    return arch


def one_hot_genotype(arch: DiscreteArchitecture) -> np.ndarray:
    space = arch.space
    vec = np.zeros(space.cell_shape)
    for cell, src, dst, op in arch.edges:
        vec[cell, space.edge_index(src, dst), space.op_index(op)] = 1.0
    return vec.ravel()


def architecture_from_choices(space: OperationSpace, choices: Sequence[int]) -> DiscreteArchitecture:
    """Build an S2 architecture from one operation index per edge."""
    if space.is_pruned:
        raise UnsupportedSpaceError("choice vectors only describe unpruned spaces such as S2")
    if len(choices) != len(space.edges):
        raise EncodingError(f"need {len(space.edges)} choices, got {len(choices)}")
    return DiscreteArchitecture(
        space,
        frozenset((0, src, dst, space.ops[c]) for (src, dst), c in zip(space.edges, choices)),
    )


def s2_index(arch: DiscreteArchitecture) -> int:
    """Position of ``arch`` in :func:`enumerate_space` order (base-|ops| digits per edge)."""
    space = arch.space
    if space.is_pruned:
        raise UnsupportedSpaceError(f"{space.name} has no enumeration index")
    by_edge = {(src, dst): space.op_index(op) for _, src, dst, op in arch.edges}
    idx = 0
    for edge in space.edges:
        idx = idx * len(space.ops) + by_edge[edge]
    return idx


def enumerate_space(space: OperationSpace) -> Iterator[DiscreteArchitecture]:
    space = get_space(space)
    if space.is_pruned:
        raise UnsupportedSpaceError(f"exhaustive enumeration of {space.name} is not supported")
    for choices in itertools.product(range(len(space.ops)), repeat=len(space.edges)):
        yield architecture_from_choices(space, choices)


def random_genotype(space: OperationSpace, rng_seed=None) -> np.ndarray:
    """Uniform genotype; ``rng_seed`` may be an int or a ``numpy.random.Generator``."""
    rng = np.random.default_rng(rng_seed)
    return rng.random(space.genotype_length)

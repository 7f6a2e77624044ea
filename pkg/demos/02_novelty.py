"""Jaccard dissimilarity and k-nearest-neighbour novelty.

Run: python demos/02_novelty.py
"""

import numpy as np

from noveltynas import S2, Archive, NoveltyConfig, dissimilarity, similarity
from noveltynas.arch_space import architecture_from_choices
from noveltynas.novelty import population_novelty

ops = {name: i for i, name in enumerate(S2.ops)}
conv, pool = ops["nor_conv_3x3"], ops["avg_pool_3x3"]
shared = [ops["skip_connect"], ops["nor_conv_1x1"]]

# Two cells that agree on two of their six edges.
a1 = architecture_from_choices(S2, [conv, conv, conv, *shared, conv])
a2 = architecture_from_choices(S2, [pool, pool, pool, *shared, pool])
print(a1.key)
print(a2.key)
print(f"similarity {similarity(a1, a2):.2f}  dissimilarity {dissimilarity(a1, a2):.2f}")

# Novelty drops as the archive fills up with neighbours.
rng = np.random.default_rng(1)
archive = Archive(S2)
for round_ in range(5):
    batch = [architecture_from_choices(S2, rng.integers(0, 5, 6)) for _ in range(20)]
    scores = population_novelty(batch, archive, NoveltyConfig(k=5))
    archive.update(batch)
    print(f"round {round_}: archive {len(archive):3d}  mean novelty {scores.mean():.3f}")

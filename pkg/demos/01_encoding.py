"""Genotypes, decoding and canonical keys in both search spaces.

Run: python demos/01_encoding.py
"""

import numpy as np

from noveltynas import S1, S2, decode, enumerate_space, parse_key, random_genotype

rng = np.random.default_rng(0)

# A cell-based genotype is a flat vector of per-edge operation weights.
g = random_genotype(S2, rng)
print("S2 genotype", g.shape, "-> rows of", len(S2.ops), "weights per edge")
print(np.round(g.reshape(S2.cell_shape), 2))

arch = decode(g, S2)
print("decoded key:", arch.key)
assert parse_key(arch.key, S2) == arch

# S1 keeps only the two strongest inputs of each intermediate node.
big = decode(random_genotype(S1, rng), S1)
normal, reduction = big.key.split("//")
print("\nS1 normal cell   :", normal)
print("S1 reduction cell:", reduction)

print("\nS2 holds", sum(1 for _ in enumerate_space(S2)), "architectures")

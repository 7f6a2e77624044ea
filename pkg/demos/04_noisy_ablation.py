"""Accuracy-only search versus novelty-assisted search under a noisy oracle.

A noisy fitness estimate lets a lucky architecture take over an
accuracy-only population; the novelty objective keeps it spread out.

Run: python demos/04_noisy_ablation.py
"""

import numpy as np

from noveltynas import EAConfig, NoisyOracle, SearchConfig, make_synthetic, run_search
from noveltynas.search import diversity_series

base = make_synthetic("S2", rng_seed=0)
rows = []
for seed in range(5):
    oracle = NoisyOracle(base, sigma=0.03, seed=seed)
    for mode in ("multi", "accuracy-only", "novelty-only"):
        cfg = SearchConfig(oracle=oracle, mode=mode, ea=EAConfig(rng_seed=seed))
        res = run_search(cfg)
        div = diversity_series(res)
        rows.append((mode, seed, len(res.explored), np.mean(div[:10]), np.mean(div[-10:]), res.best["true_score"]))

print(f"{'mode':14s} {'explored':>8s} {'uniq first10':>12s} {'uniq last10':>11s} {'best true':>9s}")
for mode in ("multi", "accuracy-only", "novelty-only"):
    sel = np.array([r[2:] for r in rows if r[0] == mode])
    ex, first, last, best = sel.mean(axis=0)
    print(f"{mode:14s} {ex:8.1f} {first:12.1f} {last:11.1f} {best:9.4f}")

"""A complete multi-objective search on a synthetic landscape.

Run: python demos/03_search.py
"""

from noveltynas import EAConfig, SearchConfig, make_synthetic, run_search

oracle = make_synthetic("S2", rng_seed=0)
print("planted optimum", oracle.optimum_key, "score", oracle.metadata["optimum_score"])
print("local optima in the landscape:", oracle.metadata["local_optima"])

cfg = SearchConfig(oracle=oracle, ea=EAConfig(population_size=20, generations=50, rng_seed=0))
result = run_search(cfg)

print("\nfinal Pareto front (accuracy, novelty):")
for entry in sorted(result.pareto_front, key=lambda e: -e["f_acc"]):
    print(f"  {entry['f_acc']:.4f}  {entry['f_nov']:.3f}  {entry['key']}")
print("\nbest:", result.best["key"], f"true score {result.best['true_score']:.4f}")
print("architectures evaluated:", len(result.explored))

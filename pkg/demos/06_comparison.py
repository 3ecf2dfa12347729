"""Switching costs convergence speed.  How much, on dense digraphs?"""
# %%
from surplus_consensus import fig3_family
from surplus_consensus.harness import comparison_csv, run_comparison

g = fig3_family(5)
print("5-node member has", len(g.edges), "links; node 5 sends only to", sorted(j for i, j in g.edges if i == 5))

# %%
# 20 random starts on [-50, 50] per size; both variants share the starts.
rows = run_comparison([5, 10, 20], {"repetitions": 20})
print(comparison_csv(rows))
for r in rows:
    print(f"n={r['n']}: the switching variant needs {r['ratio']:.2f}x the steps")

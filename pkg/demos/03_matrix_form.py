"""The same round written as one 2n x 2n matrix acting on (x, s)."""
# %%
import numpy as np

from surplus_consensus import NetworkState, WeightPolicy, build_matrices, check_stochasticity, step, step_matrix
from surplus_consensus.graph import complete_digraph
from surplus_consensus.protocol import neighbor_terms

np.set_printoptions(precision=3, suppress=True)
g = complete_digraph(3)
policy = WeightPolicy.uniform(0.2, 0.2, 0.5)
st = NetworkState([3.0, -1.0, 7.0], [0.5, 0.0, 1.0])

# %%
# The switch pattern comes from the current states.
a, _, _ = policy.weights(g)
c = neighbor_terms(a, st.x) <= 0
print("switch pattern c:", c.astype(int))
m = build_matrices(g, policy, c)
print("M =\n", m.M)

# %%
# Columns of M sum to one, which is why the total of x and s is conserved.
print(check_stochasticity(m))
print("column sums:", m.M.sum(axis=0))

# %%
out = step_matrix(m, st)
rec = step(g, policy, st)
print("matrix step:", out.x, out.s)
print("agent step: ", rec.x_next, rec.s_next)
print("largest gap:", max(np.abs(out.x - rec.x_next).max(), np.abs(out.s - rec.s_next).max()))

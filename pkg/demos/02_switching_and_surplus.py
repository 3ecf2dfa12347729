"""One round of the update on two agents, with and without the switch."""
# %%
from surplus_consensus import Digraph, NetworkState, WeightPolicy, step, step_baseline, switching_decision

# Agent 2 sends to agent 1.  Agent 1 sits below its neighbor.
g = Digraph(2, {(2, 1)})
policy = WeightPolicy.uniform(0.25, 0.25, 0.25)
x = [0.0, 1.0]

# %%
# Agent 1 would be pulled upward (positive neighbor term), so it holds its
# state this round and lets its surplus absorb nothing.
print("agent 1 decision:", switching_decision(g, policy, x, 1))
rec = step(g, policy, NetworkState(x))
print("switching: x' =", rec.x_next, " s' =", rec.s_next)

# %%
# Without the switch the same round moves agent 1 up and debits its surplus,
# which goes negative.
rec = step_baseline(g, policy, NetworkState(x))
print("baseline:  x' =", rec.x_next, " s' =", rec.s_next)

# %%
# Stored surplus is spent gradually: a fraction eps per round goes into the state.
rec = step(g, policy, NetworkState([0.0, 1.0], [0.0, 0.4]))
print("with surplus at agent 2: x' =", rec.x_next, " s' =", rec.s_next,
      " total =", rec.x_next.sum() + rec.s_next.sum())

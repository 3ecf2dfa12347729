"""Strong components, closed components and joint connectivity of schedules."""
# %%
from surplus_consensus import (
    Digraph,
    TopologySchedule,
    closed_components,
    globally_reachable_nodes,
    is_jointly_strongly_connected,
    random_schedule,
    strong_components,
    union_digraph,
)

g = Digraph(5, {(1, 2), (2, 1), (2, 3), (3, 4), (4, 3), (5, 4)})
print("strong components:", [sorted(c) for c in strong_components(g)])
print("closed components:", [sorted(c) for c in closed_components(g)])
print("globally reachable:", sorted(globally_reachable_nodes(g)))

# %%
# Two half-rings that alternate.  Neither is strongly connected alone.
left = Digraph(4, {(1, 2), (2, 3)})
right = Digraph(4, {(3, 4), (4, 1)})
sched = TopologySchedule.periodic([left, right])
print("union of steps 0..1:", sorted(union_digraph(sched, 0, 1).edges))
for window in range(3):
    print(f"window {window}: jointly strongly connected = {is_jointly_strongly_connected(sched, window)}")

# %%
# Random schedules have no period, so the check runs up to a horizon.
rnd = random_schedule(6, 0.15, seed=4)
for window in (0, 2, 5, 10):
    print(f"random, window {window:2d}:", is_jointly_strongly_connected(rnd, window, horizon=500))

"""Without joint strong connectivity the network can stall away from the average."""
# %%
from surplus_consensus import (
    WeightPolicy,
    closed_components,
    conserved_average,
    convergence_time,
    counterexample_reachable_only,
    counterexample_two_components,
    globally_reachable_nodes,
    run,
)
from surplus_consensus.analysis import distances

policy = WeightPolicy.uniform(0.25, 0.25, 0.25)

# %%
# Two isolated cycles, one at +1 and one at -1.  Each is already in local
# agreement, so nothing ever moves.
sched, st0 = counterexample_two_components(3, 2)
traj = run(sched, policy, st0, 100)
print("closed components:", [sorted(c) for c in closed_components(sched.graph(0))])
x_a = conserved_average(st0)
print("average", x_a, " final x", traj.final.x, " dist_inf", distances(traj.final.x, traj.final.s, x_a, "linf"))
print("converged:", convergence_time(traj, x_a, 0.05) is not None)

# %%
# A core cycle feeds two outsiders that never talk back.  The core is
# globally reachable but it never hears the outsiders' values.
sched, st0 = counterexample_reachable_only(6, 2)
traj = run(sched, policy, st0, 100)
print("globally reachable:", sorted(globally_reachable_nodes(sched.graph(0))))
x_a = conserved_average(st0)
print("average", round(x_a, 4), " final x", traj.final.x)
print("dist_inf", distances(traj.final.x, traj.final.s, x_a, "linf"))

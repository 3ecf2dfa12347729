"""Topology generators for the experiments and the failure constructions."""

from __future__ import annotations

import numpy as np

from .graph import Digraph, TopologySchedule, cycle_digraph
from .protocol import NetworkState


def periodic_ring_4() -> TopologySchedule:
    """Four nodes, period four, one edge per phase: 1->2, 2->3, 3->4, 4->1.

    No phase is strongly connected, but any four consecutive phases form the
    directed 4-cycle.
    """
    return TopologySchedule.periodic(Digraph(4, {e}) for e in [(1, 2), (2, 3), (3, 4), (4, 1)])


def fig3_family(n: int, orientation: str = "matrix") -> Digraph:
    """Complete digraph on ``n`` nodes with the pairs ``(h, n)``, ``2 <= h <= n-1``, removed.

    With ``orientation="matrix"`` (default) the pair ``(h, n)`` is read as the
    weight entry ``a_hn``, i.e. the link ``n -> h`` is cut: node ``n`` keeps
    out-degree 1 (to node 1) and in-degree ``n - 1``.  With ``"edge"`` the
    link ``h -> n`` is cut instead, leaving node ``n`` with in-degree 1.
    Either way the result is strongly connected and not balanced.
    """
    if n < 3:
        raise ValueError(f"need n >= 3, got {n}")
    if orientation not in ("matrix", "edge"):
        raise ValueError(f"orientation must be 'matrix' or 'edge', got {orientation!r}")
    removed = {(n, h) if orientation == "matrix" else (h, n) for h in range(2, n)}
    return Digraph(n, frozenset((j, i) for j in range(1, n + 1) for i in range(1, n + 1)
                                if j != i and (j, i) not in removed))


def counterexample_two_components(n1: int, n2: int, a: float = 1.0, b: float = -1.0):
    """Two disjoint directed cycles, values ``a`` on the first and ``b`` on the second.

    Neither component hears from the other and each starts at agreement, so
    nothing ever moves.
    """
    if n1 < 1 or n2 < 1:
        raise ValueError("component sizes must be >= 1")
    n = n1 + n2
    first = cycle_digraph(range(1, n1 + 1), n)
    second = cycle_digraph(range(n1 + 1, n + 1), n)
    sched = TopologySchedule.static(Digraph(n, first.edges | second.edges))
    x = np.concatenate([np.full(n1, float(a)), np.full(n2, float(b))])
    return sched, NetworkState(x, np.zeros(n))


def counterexample_reachable_only(n: int, r: int, a: float = 1.0, b: float = -1.0):
    """Nodes ``1..n-r`` on a directed cycle feeding the other ``r`` nodes, never fed back.

    Every node is reachable from the cycle, yet the cycle's states never move.
    Each outside node ``v`` receives from cycle node ``1 + (v mod (n - r))``.
    """
    if not 1 <= r < n:
        raise ValueError(f"need 1 <= r < n, got r={r}, n={n}")
    m = n - r
    core = cycle_digraph(range(1, m + 1), n)
    feed = {(1 + (v % m), v) for v in range(m + 1, n + 1)}
    sched = TopologySchedule.static(Digraph(n, core.edges | feed))
    x = np.concatenate([np.full(m, float(a)), np.full(r, float(b))])
    return sched, NetworkState(x, np.zeros(n))


def random_schedule(n: int, p: float, seed: int) -> TopologySchedule:
    """Each ordered pair present independently with probability ``p`` at each step."""
    return TopologySchedule.random(n, p, seed)


GENERATORS = {
    "periodic_ring_4": periodic_ring_4,
    "fig3_family": fig3_family,
    "counterexample_two_components": counterexample_two_components,
    "counterexample_reachable_only": counterexample_reachable_only,
    "random_schedule": random_schedule,
}

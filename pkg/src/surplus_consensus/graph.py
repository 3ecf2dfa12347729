"""Digraphs, time-varying topologies and the connectivity notions built on them.

Nodes are numbered ``1..n`` everywhere in the public interface.  An edge
``(j, i)`` means that agent ``j`` sends to agent ``i``, so ``j`` is an
in-neighbor of ``i`` and ``i`` an out-neighbor of ``j``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable

import numpy as np

from . import rng

SCHEDULE_KINDS = ("static", "periodic", "scripted", "random")


@dataclass(frozen=True)
class Digraph:
    """One topology snapshot: ``n`` nodes and a set of directed edges."""

    n: int
    edges: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if int(self.n) < 1:
            raise ValueError(f"node count must be >= 1, got {self.n}")
        edges = frozenset((int(j), int(i)) for j, i in self.edges)
        for j, i in edges:
            if j == i:
                raise ValueError(f"self-loop ({j},{i}) is not allowed")
            if not (1 <= j <= self.n and 1 <= i <= self.n):
                raise ValueError(f"edge ({j},{i}) has an endpoint outside 1..{self.n}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "edges", edges)

    @classmethod
    def from_in_adjacency(cls, adj) -> "Digraph":
        """Build from a boolean matrix with ``adj[i, j]`` set iff ``j -> i`` (0-based)."""
        adj = np.asarray(adj, dtype=bool)
        rows, cols = np.nonzero(adj)
        return cls(adj.shape[0], frozenset(zip((cols + 1).tolist(), (rows + 1).tolist())))

    @classmethod
    def _from_checked(cls, adj: np.ndarray) -> "Digraph":
        # trusted fast path: adj is a fresh loop-free boolean matrix
        rows, cols = np.nonzero(adj)
        g = object.__new__(cls)
        object.__setattr__(g, "n", adj.shape[0])
        object.__setattr__(g, "edges", frozenset(zip((cols + 1).tolist(), (rows + 1).tolist())))
        adj.flags.writeable = False
        g.__dict__["in_adjacency"] = adj
        return g

    @cached_property
    def in_adjacency(self) -> np.ndarray:
        """Read-only boolean matrix, ``[i-1, j-1]`` true iff edge ``(j, i)``."""
        adj = np.zeros((self.n, self.n), dtype=bool)
        if self.edges:
            e = np.array(sorted(self.edges)) - 1
            adj[e[:, 1], e[:, 0]] = True
        adj.flags.writeable = False
        return adj

    @cached_property
    def _successors(self):
        succ = {v: [] for v in range(1, self.n + 1)}
        for j, i in sorted(self.edges):
            succ[j].append(i)
        return succ

    def to_dict(self):
        return {"n": self.n, "edges": [list(e) for e in sorted(self.edges)]}

    @classmethod
    def from_dict(cls, d) -> "Digraph":
        return cls(int(d["n"]), frozenset(tuple(e) for e in d.get("edges", [])))

    def __repr__(self):
        return f"Digraph(n={self.n}, edges={sorted(self.edges)})"


def _check_node(g: Digraph, i: int):
    if not 1 <= i <= g.n:
        raise ValueError(f"node {i} outside 1..{g.n}")


def in_neighbors(g: Digraph, i: int) -> set:
    _check_node(g, i)
    return {j for j, t in g.edges if t == i}


def out_neighbors(g: Digraph, i: int) -> set:
    _check_node(g, i)
    return {h for s, h in g.edges if s == i}


def complete_digraph(n: int) -> Digraph:
    return Digraph(n, frozenset((j, i) for j in range(1, n + 1) for i in range(1, n + 1) if j != i))


def cycle_digraph(nodes: Iterable[int], n: int) -> Digraph:
    """Directed cycle through ``nodes`` in order, embedded in an ``n``-node digraph."""
    nodes = list(nodes)
    if len(nodes) < 2:
        return Digraph(n)
    return Digraph(n, frozenset(zip(nodes, nodes[1:] + nodes[:1])))


def reachable_from(g: Digraph, v: int) -> set:
    """Nodes reachable from ``v`` by a directed path, ``v`` itself included."""
    _check_node(g, v)
    seen = {v}
    stack = [v]
    succ = g._successors
    while stack:
        u = stack.pop()
        for w in succ[u]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return seen


def is_strongly_connected(g: Digraph) -> bool:
    if g.n == 1:
        return True
    # strongly connected iff 1 reaches everyone in g and in its reverse
    if len(reachable_from(g, 1)) < g.n:
        return False
    rev = Digraph(g.n, frozenset((i, j) for j, i in g.edges))
    return len(reachable_from(rev, 1)) == g.n


def strong_components(g: Digraph) -> list:
    """Strong components (Tarjan, iterative), sorted by smallest member."""
    succ = g._successors
    index = {}
    low = {}
    on_stack = set()
    stack = []
    comps = []
    counter = 0

    for root in range(1, g.n + 1):
        if root in index:
            continue
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        work = [(root, iter(succ[root]))]
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(succ[w])))
                    advanced = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == index[v]:
                comp = set()
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.add(w)
                    if w == v:
                        break
                comps.append(frozenset(comp))
    return sorted(comps, key=min)


def closed_components(g: Digraph) -> list:
    """Strong components that receive no edge from outside themselves."""
    comps = strong_components(g)
    owner = {v: idx for idx, comp in enumerate(comps) for v in comp}
    fed = {owner[i] for j, i in g.edges if owner[j] != owner[i]}
    return [comp for idx, comp in enumerate(comps) if idx not in fed]


def globally_reachable_nodes(g: Digraph) -> set:
    # a globally reachable node exists iff there is exactly one closed component,
    # and then that component is precisely the set of such nodes
    closed = closed_components(g)
    if len(closed) != 1:
        return set()
    return set(closed[0])


@dataclass(frozen=True)
class TopologySchedule:
    """Rule producing the digraph ``G(k)`` for every time ``k >= 0``.

    ``static`` and ``periodic`` repeat ``graphs`` with period ``len(graphs)``;
    ``scripted`` plays ``graphs`` once and is undefined afterwards; ``random``
    draws each ordered pair independently with probability ``p`` from a
    SplitMix64 stream keyed by ``(seed, k)``.
    """

    kind: str
    n: int
    graphs: tuple = ()
    p: float | None = None
    seed: int | None = None

    def __post_init__(self):
        if self.kind not in SCHEDULE_KINDS:
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        object.__setattr__(self, "graphs", tuple(self.graphs))
        if self.kind == "random":
            if self.p is None or not 0.0 < self.p <= 1.0:
                raise ValueError(f"edge probability must be in (0, 1], got {self.p}")
            if self.seed is None:
                raise ValueError("random schedule needs a seed")
            return
        if not self.graphs:
            raise ValueError(f"{self.kind} schedule needs at least one graph")
        if self.kind == "static" and len(self.graphs) != 1:
            raise ValueError("static schedule takes exactly one graph")
        for g in self.graphs:
            if g.n != self.n:
                raise ValueError(f"graph with n={g.n} in a schedule with n={self.n}")

    @classmethod
    def static(cls, g: Digraph) -> "TopologySchedule":
        return cls("static", g.n, (g,))

    @classmethod
    def periodic(cls, graphs) -> "TopologySchedule":
        graphs = tuple(graphs)
        return cls("periodic", graphs[0].n, graphs)

    @classmethod
    def scripted(cls, graphs) -> "TopologySchedule":
        graphs = tuple(graphs)
        return cls("scripted", graphs[0].n, graphs)

    @classmethod
    def random(cls, n: int, p: float, seed: int) -> "TopologySchedule":
        return cls("random", n, (), float(p), int(seed))

    @property
    def period(self) -> int | None:
        """Period for static/periodic schedules, ``None`` otherwise."""
        if self.kind in ("static", "periodic"):
            return len(self.graphs)
        return None

    def graph(self, k: int) -> Digraph:
        if k < 0:
            raise ValueError(f"time must be >= 0, got {k}")
        if self.kind in ("static", "periodic"):
            return self.graphs[k % len(self.graphs)]
        if self.kind == "scripted":
            if k >= len(self.graphs):
                raise IndexError(f"scripted schedule has {len(self.graphs)} steps, asked for k={k}")
            return self.graphs[k]
        return _random_graph(self.n, self.p, rng.derive_seed(self.seed, k))

    def distinct_graphs(self, horizon: int) -> list:
        """The distinct digraphs appearing at times ``0..horizon-1``."""
        if self.kind in ("static", "periodic"):
            return list(dict.fromkeys(self.graphs[: min(horizon, len(self.graphs))]))
        return list(dict.fromkeys(self.graph(k) for k in range(horizon)))

    def to_dict(self):
        if self.kind == "random":
            return {"kind": "random", "n": self.n, "p": self.p, "seed": self.seed}
        d = {"kind": self.kind, "graphs": [g.to_dict() for g in self.graphs]}
        if self.kind == "static":
            d = {"kind": "static", "graph": self.graphs[0].to_dict()}
        return d

    @classmethod
    def from_dict(cls, d) -> "TopologySchedule":
        kind = d.get("kind")
        if kind == "random":
            return cls.random(int(d["n"]), float(d["p"]), int(d["seed"]))
        if kind == "static":
            g = d["graph"] if "graph" in d else d["graphs"][0]
            return cls.static(Digraph.from_dict(g))
        if kind in ("periodic", "scripted"):
            graphs = tuple(Digraph.from_dict(g) for g in d["graphs"])
            return cls(kind, graphs[0].n, graphs)
        raise ValueError(f"unknown schedule kind {kind!r}")


def _random_graph(n, p, seed):
    # draw u for ordered pairs (j, i), j != i, in lexicographic order
    if n == 1:
        return Digraph(1)
    off = ~np.eye(n, dtype=bool)
    keep = np.zeros((n, n), dtype=bool)
    keep[off] = rng.uniform01(seed, n * (n - 1)) < p
    return Digraph._from_checked(np.ascontiguousarray(keep.T))


def union_digraph(sched: TopologySchedule, k1: int, k2: int) -> Digraph:
    """Digraph whose edge set is the union of ``G(k)`` for ``k`` in ``[k1, k2]``."""
    if k1 > k2:
        raise ValueError(f"empty interval [{k1}, {k2}]")
    period = sched.period
    if period is not None and k2 - k1 + 1 > period:
        ks = range(period)
    else:
        ks = range(k1, k2 + 1)
    edges = set()
    for k in ks:
        edges |= sched.graph(k).edges
    return Digraph(sched.n, frozenset(edges))


def _window_starts(sched, window, horizon):
    if sched.period is not None:
        return range(sched.period)
    if horizon is None:
        if sched.kind == "scripted":
            horizon = len(sched.graphs) - 1
        else:
            raise ValueError("random schedules need a finite horizon")
    if sched.kind == "scripted":
        horizon = min(horizon, len(sched.graphs) - 1)
    if horizon - window < 0:
        raise ValueError(f"window {window} does not fit in horizon {horizon}")
    return range(horizon - window + 1)


def is_jointly_strongly_connected(sched: TopologySchedule, window: int, horizon: int | None = None) -> bool:
    """Whether every union ``G([k0, k0 + window])`` is strongly connected.

    Exact for static and periodic schedules.  For scripted and random ones
    only start times ``k0`` in ``[0, horizon - window]`` are checked, so a
    ``True`` answer means "holds over the horizon", not a proof.
    """
    if window < 0:
        raise ValueError("window must be >= 0")
    return all(is_strongly_connected(union_digraph(sched, k0, k0 + window))
               for k0 in _window_starts(sched, window, horizon))


def jointly_has_globally_reachable(sched: TopologySchedule, window: int, horizon: int | None = None) -> bool:
    """Whether every union ``G([k0, k0 + window])`` has a globally reachable node."""
    if window < 0:
        raise ValueError("window must be >= 0")
    return all(globally_reachable_nodes(union_digraph(sched, k0, k0 + window))
               for k0 in _window_starts(sched, window, horizon))

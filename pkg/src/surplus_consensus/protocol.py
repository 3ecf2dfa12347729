"""Agent-level surplus-based averaging.

Each agent ``i`` keeps a state ``x_i`` and a nonnegative surplus ``s_i``.  At
time ``k`` it computes the neighbor term ``y_i = sum_j a_ij (x_j - x_i)`` over
its in-neighbors and then, synchronously with everyone else::

    c_i    = 1 if y_i <= 0 else 0
    x_i'   = x_i + c_i * y_i + eps_i * s_i
    s_i'   = (1 - sum_h b_ih) * s_i + sum_j b_ji * s_j - (x_i' - x_i)

so an agent that would move *up* may only do so by spending surplus.  The
baseline (non-switching) variant forces ``c_i = 1``.

Weights are admissible for a digraph when

* ``eps_i`` lies in (0, 1);
* ``a_ij`` lies in (0, 1) exactly on in-edges ``(j, i)``, is 0 elsewhere, and
  each row sums to less than 1;
* ``b_ih`` lies in (0, 1) exactly on out-edges ``(i, h)``, is 0 elsewhere, and
  each row sums to less than ``1 - eps_i``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, WeightViolation
from .graph import Digraph, TopologySchedule

SURPLUS = "surplus"
BASELINE = "baseline"


@dataclass
class NetworkState:
    """Agent states ``x`` and surpluses ``s``."""

    x: np.ndarray
    s: np.ndarray = None

    def __post_init__(self):
        self.x = np.array(self.x, dtype=float)
        self.s = np.zeros_like(self.x) if self.s is None else np.array(self.s, dtype=float)
        if self.x.ndim != 1 or self.x.shape != self.s.shape:
            raise DimensionError(f"x and s must be vectors of equal length, got {self.x.shape} and {self.s.shape}")

    @property
    def n(self) -> int:
        return self.x.size

    @classmethod
    def consensus(cls, value: float, n: int) -> "NetworkState":
        return cls(np.full(n, float(value)), np.zeros(n))

    def copy(self) -> "NetworkState":
        return NetworkState(self.x.copy(), self.s.copy())

    def to_dict(self):
        return {"x": self.x.tolist(), "s": self.s.tolist()}

    @classmethod
    def from_dict(cls, d) -> "NetworkState":
        return cls(d["x"], d.get("s"))


@dataclass(frozen=True)
class Violation:
    rule: str  # "epsilon", "update_weight" or "send_weight"
    node: int  # 1-based
    detail: str

    def __str__(self):
        return f"node {self.node}: {self.rule}: {self.detail}"


@dataclass
class WeightPolicy:
    """Source of ``a_ij(k)``, ``b_ih(k)`` and ``eps_i(k)``.

    ``uniform``: every in-edge gets ``a``, every out-edge gets ``b`` and every
    agent uses ``eps``.  ``explicit``: ``a`` and ``b`` are ``n x n`` tables
    (``a[i, j]`` = a_ij, ``b[i, h]`` = b_ih, 0-based) and ``eps`` a length-``n``
    vector; a leading time axis of length ``T`` makes them time-keyed, cycled
    with period ``T``.  Explicit tables are used verbatim, so they must match
    the digraph of every step they are applied to.
    """

    mode: str
    a: object
    b: object
    eps: object

    def __post_init__(self):
        if self.mode == "uniform":
            self.a, self.b, self.eps = float(self.a), float(self.b), float(self.eps)
        elif self.mode == "explicit":
            self.a = np.asarray(self.a, dtype=float)
            self.b = np.asarray(self.b, dtype=float)
            self.eps = np.asarray(self.eps, dtype=float)
            if self.a.ndim not in (2, 3) or self.a.shape != self.b.shape:
                raise DimensionError("explicit a and b must be equal-shape (n,n) or (T,n,n) arrays")
            if self.a.shape[-1] != self.a.shape[-2] or self.eps.shape[-1] != self.a.shape[-1]:
                raise DimensionError("explicit tables disagree on n")
        else:
            raise ValueError(f"unknown weight mode {self.mode!r}")

    @classmethod
    def uniform(cls, a: float, b: float, eps: float) -> "WeightPolicy":
        return cls("uniform", a, b, eps)

    @classmethod
    def explicit(cls, a, b, eps) -> "WeightPolicy":
        return cls("explicit", a, b, eps)

    @property
    def n(self) -> int | None:
        return None if self.mode == "uniform" else self.a.shape[-1]

    @property
    def time_varying(self) -> bool:
        return self.mode == "explicit" and (self.a.ndim == 3 or self.eps.ndim == 2)

    def weights(self, g: Digraph, k: int = 0):
        """``(a, b, eps)`` arrays for digraph ``g`` at time ``k``."""
        if self.mode == "uniform":
            adj = g.in_adjacency
            return self.a * adj, self.b * adj.T, np.full(g.n, self.eps)
        if self.n != g.n:
            raise DimensionError(f"weight tables are for n={self.n}, digraph has n={g.n}")
        a = self.a[k % self.a.shape[0]] if self.a.ndim == 3 else self.a
        b = self.b[k % self.b.shape[0]] if self.b.ndim == 3 else self.b
        eps = self.eps[k % self.eps.shape[0]] if self.eps.ndim == 2 else self.eps
        return a, b, eps

    def to_dict(self):
        if self.mode == "uniform":
            return {"mode": "uniform", "a": self.a, "b": self.b, "eps": self.eps}
        return {"mode": "explicit", "a": self.a.tolist(), "b": self.b.tolist(), "eps": self.eps.tolist()}

    @classmethod
    def from_dict(cls, d) -> "WeightPolicy":
        return cls(d["mode"], d["a"], d["b"], d["eps"])


def check_weights(g: Digraph, a, b, eps) -> list:
    """Every admissibility violation of the given weight arrays on ``g``."""
    n = g.n
    a, b, eps = np.asarray(a, float), np.asarray(b, float), np.asarray(eps, float)
    if a.shape != (n, n) or b.shape != (n, n) or eps.shape != (n,):
        raise DimensionError(f"weights of shapes {a.shape}, {b.shape}, {eps.shape} for n={n}")
    inn = g.in_adjacency
    out = inn.T
    a_bad = np.where(inn, (a <= 0.0) | (a >= 1.0), a != 0.0)
    b_bad = np.where(out, (b <= 0.0) | (b >= 1.0), b != 0.0)
    asum, bsum = a.sum(axis=1), b.sum(axis=1)
    eps_bad = ~((eps > 0.0) & (eps < 1.0))
    asum_bad = ~(asum < 1.0)
    bsum_bad = ~(bsum < 1.0 - eps)
    report = []
    if not (a_bad.any() or b_bad.any() or eps_bad.any() or asum_bad.any() or bsum_bad.any()):
        return report
    for i in range(n):
        node = i + 1
        if eps_bad[i]:
            report.append(Violation("epsilon", node, f"eps={float(eps[i])!r} not in (0,1)"))
        for j in np.flatnonzero(a_bad[i]):
            where = "not in (0,1)" if inn[i, j] else "on a non-edge"
            report.append(Violation("update_weight", node, f"a[{node},{j + 1}]={float(a[i, j])!r} {where}"))
        for h in np.flatnonzero(b_bad[i]):
            where = "not in (0,1)" if out[i, h] else "on a non-edge"
            report.append(Violation("send_weight", node, f"b[{node},{h + 1}]={float(b[i, h])!r} {where}"))
        if asum_bad[i]:
            report.append(Violation("update_weight", node, f"sum of a = {float(asum[i])!r} >= 1"))
        if bsum_bad[i]:
            report.append(Violation("send_weight", node, f"sum of b = {float(bsum[i])!r} >= 1 - eps = {float(1.0 - eps[i])!r}"))
    return report


def validate_weights(policy: WeightPolicy, g: Digraph, k: int = 0) -> list:
    """Violations of ``policy`` on ``g`` at time ``k``; empty means admissible."""
    if policy.n is not None and policy.n != g.n:
        raise DimensionError(f"policy is for n={policy.n}, digraph has n={g.n}")
    return check_weights(g, *policy.weights(g, k))


def neighbor_terms(a, x):
    """``sum_j a_ij (x_j - x_i)`` for every agent; ``x`` may carry batch axes."""
    x = np.asarray(x, dtype=float)
    return (a * (x[..., None, :] - x[..., :, None])).sum(axis=-1)


def switching_decision(g: Digraph, policy: WeightPolicy, x, i: int, k: int = 0):
    """``(c_i, neighbor_term_i)`` for 1-based node ``i``."""
    if not 1 <= i <= g.n:
        raise ValueError(f"node {i} outside 1..{g.n}")
    a, _, _ = policy.weights(g, k)
    x = np.asarray(x, dtype=float)
    term = float(np.sum(a[i - 1] * (x - x[i - 1])))
    return int(term <= 0.0), term


def advance(a, b, eps, x, s, switching=True):
    """One synchronous round on raw weight arrays.

    ``x`` and ``s`` have shape ``(..., n)``; returns ``(x_next, s_next, c, term)``.
    """
    term = neighbor_terms(a, x)
    c = term <= 0.0 if switching else np.ones(term.shape, dtype=bool)
    dx = np.where(c, term, 0.0) + eps * s
    s_next = (1.0 - b.sum(axis=1)) * s + s @ b - dx
    return x + dx, s_next, c, term


@dataclass
class StepRecord:
    k: int
    c: np.ndarray
    x_next: np.ndarray
    s_next: np.ndarray
    neighbor_term: np.ndarray

    @property
    def state(self) -> NetworkState:
        return NetworkState(self.x_next, self.s_next)


def _checked_weights(g, policy, k):
    if policy.n is not None and policy.n != g.n:
        raise DimensionError(f"policy is for n={policy.n}, digraph has n={g.n}")
    a, b, eps = policy.weights(g, k)
    report = check_weights(g, a, b, eps)
    if report:
        raise WeightViolation(report, k)
    return a, b, eps


def step(g: Digraph, policy: WeightPolicy, st: NetworkState, k: int = 0, switching: bool = True) -> StepRecord:
    """Advance ``st`` by one round on ``g``; raises :class:`WeightViolation` on bad weights."""
    if st.n != g.n:
        raise DimensionError(f"state has n={st.n}, digraph has n={g.n}")
    a, b, eps = _checked_weights(g, policy, k)
    x_next, s_next, c, term = advance(a, b, eps, st.x, st.s, switching)
    return StepRecord(k, c, x_next, s_next, term)


def step_baseline(g: Digraph, policy: WeightPolicy, st: NetworkState, k: int = 0) -> StepRecord:
    """Same round with switching disabled; surpluses may go negative."""
    return step(g, policy, st, k, switching=False)


@dataclass
class Trajectory:
    """States ``x[0..steps]``, ``s[0..steps]`` plus per-step decisions.

    Indexing yields :class:`StepRecord` objects, so a trajectory behaves like
    the list of its steps; ``x`` and ``s`` include the initial state.
    """

    k0: int
    x: np.ndarray
    s: np.ndarray
    c: np.ndarray
    neighbor_term: np.ndarray
    algorithm: str = SURPLUS

    def __len__(self):
        return self.c.shape[0]

    def __getitem__(self, idx):
        if isinstance(idx, slice):
            return [self[i] for i in range(*idx.indices(len(self)))]
        if idx < 0:
            idx += len(self)
        if not 0 <= idx < len(self):
            raise IndexError(idx)
        return StepRecord(self.k0 + idx, self.c[idx], self.x[idx + 1], self.s[idx + 1], self.neighbor_term[idx])

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    @property
    def n(self) -> int:
        return self.x.shape[1]

    def state(self, idx: int) -> NetworkState:
        return NetworkState(self.x[idx], self.s[idx])

    @property
    def final(self) -> NetworkState:
        return self.state(-1)


def _complete(n):
    return Digraph.from_in_adjacency(~np.eye(n, dtype=bool))


def run(sched: TopologySchedule, policy: WeightPolicy, st0: NetworkState, steps: int,
        k0: int = 0, switching: bool = True) -> Trajectory:
    """Simulate ``steps`` rounds starting at time ``k0``."""
    if st0.n != sched.n:
        raise DimensionError(f"state has n={st0.n}, schedule has n={sched.n}")
    if np.any(st0.s < 0) and switching:
        raise ValueError("initial surpluses must be nonnegative")
    n = st0.n
    xs = np.empty((steps + 1, n))
    ss = np.empty((steps + 1, n))
    cs = np.empty((steps, n), dtype=bool)
    terms = np.empty((steps, n))
    xs[0], ss[0] = st0.x, st0.s
    cache = {}
    # uniform weights admissible on the complete digraph are admissible on every
    # digraph with the same nodes, since the row sums only shrink
    trusted = policy.mode == "uniform" and not check_weights(_complete(n), *policy.weights(_complete(n)))
    for t in range(steps):
        k = k0 + t
        g = sched.graph(k)
        if trusted:
            w = policy.weights(g, k)
        elif policy.time_varying:
            w = _checked_weights(g, policy, k)
        else:
            w = cache.get(g)
            if w is None:
                w = cache[g] = _checked_weights(g, policy, k)
        xs[t + 1], ss[t + 1], cs[t], terms[t] = advance(*w, xs[t], ss[t], switching)
    return Trajectory(k0, xs, ss, cs, terms, SURPLUS if switching else BASELINE)


def run_baseline(sched, policy, st0, steps, k0=0) -> Trajectory:
    return run(sched, policy, st0, steps, k0, switching=False)

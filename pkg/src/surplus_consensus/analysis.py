"""Trajectory instrumentation: Lyapunov value, distances to consensus, step bounds."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from . import rng
from .graph import TopologySchedule
from .protocol import BASELINE, NetworkState, Trajectory, WeightPolicy, run

NORMS = ("l1", "linf")
METRICS_COLUMNS = ["k", "min_state", "max_state", "V", "conserved_sum", "dist_l1", "dist_inf", "switch_count"]


def min_state(x) -> float:
    return float(np.min(x))


def max_state(x) -> float:
    return float(np.max(x))


def conserved_average(st: NetworkState) -> float:
    """``sum(x + s) / n``, the value the network must agree on."""
    return float(np.sum(st.x + st.s) / st.n)


def lyapunov(st: NetworkState) -> float:
    """Conserved average minus the smallest state."""
    return conserved_average(st) - min_state(st.x)


def distances(x, s, x_a: float, norm: str = "linf"):
    """Norm of ``(x - x_a, s)`` along the last axis; accepts stacked states."""
    dev_x = np.abs(np.asarray(x) - x_a)
    dev_s = np.abs(np.asarray(s))
    if norm == "l1":
        return dev_x.sum(axis=-1) + dev_s.sum(axis=-1)
    if norm == "linf":
        return np.maximum(dev_x.max(axis=-1), dev_s.max(axis=-1))
    raise ValueError(f"norm must be one of {NORMS}, got {norm!r}")


@dataclass
class TrajectoryMetrics:
    """Per-state series; index ``t`` refers to time ``k0 + t``.

    ``switch_count`` has one entry fewer than the others: it counts agents
    with ``c_i = 0`` during the step leaving each state.
    """

    k: np.ndarray
    min_state: np.ndarray
    max_state: np.ndarray
    V: np.ndarray
    conserved_sum: np.ndarray
    dist_l1: np.ndarray
    dist_inf: np.ndarray
    switch_count: np.ndarray
    x_a: float

    def rows(self):
        for t in range(len(self.k)):
            sc = int(self.switch_count[t]) if t < len(self.switch_count) else ""
            yield [int(self.k[t]), float(self.min_state[t]), float(self.max_state[t]), float(self.V[t]),
                   float(self.conserved_sum[t]), float(self.dist_l1[t]), float(self.dist_inf[t]), sc]


def trajectory_metrics(traj: Trajectory, x_a: float | None = None) -> TrajectoryMetrics:
    if x_a is None:
        x_a = conserved_average(traj.state(0))
    totals = (traj.x + traj.s).sum(axis=1)
    mins = traj.x.min(axis=1)
    return TrajectoryMetrics(
        k=traj.k0 + np.arange(traj.x.shape[0]),
        min_state=mins,
        max_state=traj.x.max(axis=1),
        V=totals / traj.n - mins,
        conserved_sum=totals,
        dist_l1=distances(traj.x, traj.s, x_a, "l1"),
        dist_inf=distances(traj.x, traj.s, x_a, "linf"),
        switch_count=(~traj.c).sum(axis=1),
        x_a=x_a,
    )


def metrics_csv(metrics: TrajectoryMetrics) -> str:
    """CSV text with a header row and one row per state."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(METRICS_COLUMNS)
    w.writerows(metrics.rows())
    return buf.getvalue()


def write_metrics_csv(path, metrics: TrajectoryMetrics):
    with open(path, "w", newline="") as fh:
        fh.write(metrics_csv(metrics))


def convergence_time(traj, x_a: float, threshold: float, norm: str = "l1"):
    """First state index whose distance to ``(x_a 1, 0)`` is below ``threshold``.

    ``traj`` is a :class:`Trajectory` or an ``(x, s)`` pair of stacked
    states.  Returns ``None`` when the threshold is never met.
    """
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    x, s = (traj.x, traj.s) if isinstance(traj, Trajectory) else traj
    hits = np.flatnonzero(distances(x, s, x_a, norm) < threshold)
    return int(hits[0]) if hits.size else None


def kappa_bound(n: int, K: int) -> int:
    """Steps after which the minimum state must have strictly increased."""
    if n < 1 or K < 1:
        raise ValueError("need n >= 1 and K >= 1")
    return (n - 1) * (n + 1) * K


@dataclass
class MinIncreaseReport:
    kappa: int
    checked: list = field(default_factory=list)
    violations: list = field(default_factory=list)  # (k0, min at k0, min at k0 + kappa)

    @property
    def ok(self) -> bool:
        return not self.violations


def min_increase_check(traj: Trajectory, K: int, n: int | None = None, starts=None,
                       x_a: float | None = None) -> MinIncreaseReport:
    """Check ``min x(k0 + kappa) > min x(k0)`` wherever ``min x(k0) < x_a``.

    ``starts`` are state indices (default: every index with a full window).
    """
    if traj.algorithm == BASELINE:
        raise ValueError("min-increase bound does not apply to baseline trajectories")
    n = traj.n if n is None else n
    kappa = kappa_bound(n, K)
    if len(traj) < kappa:
        raise ValueError(f"trajectory of {len(traj)} steps is shorter than kappa={kappa}")
    if x_a is None:
        x_a = conserved_average(traj.state(0))
    mins = traj.x.min(axis=1)
    if starts is None:
        starts = range(len(traj) - kappa + 1)
    report = MinIncreaseReport(kappa)
    for k0 in starts:
        if k0 + kappa > len(traj):
            raise ValueError(f"start {k0} + kappa {kappa} runs past the trajectory")
        if mins[k0] < x_a:
            report.checked.append(k0)
            if not mins[k0 + kappa] > mins[k0]:
                report.violations.append((k0, float(mins[k0]), float(mins[k0 + kappa])))
    return report


def lyapunov_drop(traj: Trajectory, kappa: int) -> np.ndarray:
    """``V(k) - V(k + kappa)`` along one trajectory.

    This is the decrease actually realised from each visited state, an upper
    bound on the worst-case decrease over all reachable sequences.
    """
    v = (traj.x + traj.s).sum(axis=1) / traj.n - traj.x.min(axis=1)
    return v[: len(v) - kappa] - v[kappa:]


def sample_ball(x_a: float, c1: float, n: int, seed: int) -> NetworkState:
    """A state with the given conserved average, ``s >= 0`` and sup-distance < ``c1``."""
    u = rng.uniform01(seed, 2 * n)
    x_dev = (u[:n] - 0.5) * (c1 / 2.0)
    s = u[n:] * (c1 / 4.0)
    # after this shift x_dev lies in (-3 c1 / 4, c1 / 2]
    x_dev -= (x_dev + s).sum() / n
    return NetworkState(x_a + x_dev, s)


@dataclass
class UniformConsensusReport:
    c1: float
    c2: float
    k1: int
    runs: int = 0
    failures: list = field(default_factory=list)  # (k0, sample, worst distance after k0 + k1)

    @property
    def ok(self) -> bool:
        return not self.failures


def uniform_consensus_check(sched: TopologySchedule, policy: WeightPolicy, *, c1: float, c2: float, k1: int,
                            starts, samples: int, horizon: int, seed: int = 0, x_a: float = 0.0,
                            switching: bool = True) -> UniformConsensusReport:
    """Sampled test of the uniform convergence definition.

    For each start time ``k0`` in ``starts`` and ``samples`` initial states
    within sup-distance ``c1`` of consensus, simulate ``horizon`` steps and
    require the distance to stay below ``c2`` from ``k0 + k1`` onward.
    """
    if horizon <= k1:
        raise ValueError("horizon must exceed k1")
    report = UniformConsensusReport(c1, c2, k1)
    for k0 in starts:
        for j in range(samples):
            st = sample_ball(x_a, c1, sched.n, rng.derive_seed(seed, k0 * samples + j))
            traj = run(sched, policy, st, horizon, k0=k0, switching=switching)
            tail = distances(traj.x[k1:], traj.s[k1:], x_a, "linf")
            report.runs += 1
            if tail.max() >= c2:
                report.failures.append((k0, j, float(tail.max())))
    return report

"""Experiment configs, batch runs, output files and the command line.

A config is a JSON object::

    {
      "schedule": {"kind": "periodic", "graphs": [...]}
                  | {"generator": "fig3_family", "n": 10},
      "weights": {"mode": "uniform", "a": 0.25, "b": 0.25, "eps": 0.25},
      "initial_state": {"x": [...], "s": [...]}
                  | {"random_uniform": {"low": -50, "high": 50, "seed": 1}},
      "algorithm": "surplus" | "baseline",
      "horizon": 2000,
      "convergence": {"threshold": 0.05, "norm": "l1"},
      "repetitions": 1,
      "output": {"dir": "out"}
    }

``initial_state`` may be omitted for the counterexample generators, which
supply their own.  Random initial states for repetition ``r`` use SplitMix64
with seed ``seed + r``; ``s(0)`` is zero unless given.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import tempfile
import time
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import rng
from .analysis import NORMS, convergence_time, distances, metrics_csv, trajectory_metrics
from .errors import ConfigError, DimensionError, WeightViolation
from .graph import TopologySchedule, is_jointly_strongly_connected, jointly_has_globally_reachable
from .matrix import build_matrices
from .protocol import BASELINE, SURPLUS, NetworkState, WeightPolicy, advance, check_weights, run
from .schedule import GENERATORS, fig3_family

log = logging.getLogger(__name__)

OUTPUT_ENV = "SURPLUS_CONSENSUS_OUTPUT_DIR"

EXIT_OK = 0
EXIT_UNREADABLE = 3
EXIT_CONFIG = 4
EXIT_WEIGHTS = 5
EXIT_DIMENSION = 6


@dataclass
class ExperimentConfig:
    schedule: TopologySchedule
    weights: WeightPolicy
    x0: np.ndarray | None = None
    s0: np.ndarray | None = None
    random_init: dict | None = None
    algorithm: str = SURPLUS
    horizon: int = 1000
    threshold: float = 0.05
    norm: str = "l1"
    repetitions: int = 1
    output_dir: str = "out"
    raw: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.schedule.n

    def initial_state(self, rep: int = 0):
        """``(state, seed)`` for repetition ``rep``; seed is ``None`` for fixed states."""
        s0 = np.zeros(self.n) if self.s0 is None else self.s0
        if self.random_init is None:
            return NetworkState(self.x0, s0), None
        seed = int(self.random_init.get("seed", 0)) + rep
        x = rng.uniform(seed, float(self.random_init["low"]), float(self.random_init["high"]), self.n)
        return NetworkState(x, s0), seed


def _require(d, key, where):
    if key not in d:
        raise ConfigError(f"{where}.{key}" if where else key, "missing")
    return d[key]


def load_schedule(d):
    """Schedule from its JSON form or a ``{"generator": ...}`` reference.

    Returns ``(schedule, generated_state_or_None)``.
    """
    if not isinstance(d, dict):
        raise ConfigError("schedule", "must be an object")
    if "generator" in d:
        name = d["generator"]
        if name not in GENERATORS:
            raise ConfigError("schedule.generator", f"unknown generator {name!r}")
        params = {k: v for k, v in d.items() if k != "generator"}
        try:
            out = GENERATORS[name](**params)
        except TypeError as exc:
            raise ConfigError("schedule", str(exc)) from None
        except ValueError as exc:
            raise ConfigError("schedule", str(exc)) from None
        if isinstance(out, tuple):
            return out
        if name == "fig3_family":
            out = TopologySchedule.static(out)
        return out, None
    try:
        return TopologySchedule.from_dict(d), None
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigError("schedule", str(exc)) from None


def parse_config(d) -> ExperimentConfig:
    if not isinstance(d, dict):
        raise ConfigError("<root>", "config must be a JSON object")
    sched, generated = load_schedule(_require(d, "schedule", ""))
    try:
        weights = WeightPolicy.from_dict(_require(d, "weights", ""))
    except DimensionError:
        raise
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigError("weights", str(exc)) from None

    x0 = s0 = random_init = None
    init = d.get("initial_state")
    if init is None:
        if generated is None:
            raise ConfigError("initial_state", "missing (only counterexample generators supply one)")
        x0, s0 = generated.x, generated.s
    elif "random_uniform" in init:
        random_init = dict(init["random_uniform"])
        for key in ("low", "high"):
            _require(random_init, key, "initial_state.random_uniform")
        if not float(random_init["low"]) < float(random_init["high"]):
            raise ConfigError("initial_state.random_uniform", "low must be < high")
        if "s" in init:
            s0 = np.asarray(init["s"], dtype=float)
    else:
        x0 = np.asarray(_require(init, "x", "initial_state"), dtype=float)
        if "s" in init:
            s0 = np.asarray(init["s"], dtype=float)
        if x0.shape != (sched.n,):
            raise DimensionError(f"initial_state.x has {x0.size} entries, schedule has n={sched.n}")
    if s0 is not None:
        if s0.shape != (sched.n,):
            raise DimensionError(f"initial_state.s has {s0.size} entries, schedule has n={sched.n}")
        if np.any(s0 < 0):
            raise ConfigError("initial_state.s", "surpluses must be nonnegative")
    if weights.n is not None and weights.n != sched.n:
        raise DimensionError(f"weights are for n={weights.n}, schedule has n={sched.n}")

    algorithm = d.get("algorithm", SURPLUS)
    if algorithm not in (SURPLUS, BASELINE):
        raise ConfigError("algorithm", f"must be {SURPLUS!r} or {BASELINE!r}")
    horizon = d.get("horizon", 1000)
    if not isinstance(horizon, int) or horizon < 1:
        raise ConfigError("horizon", "must be an integer >= 1")
    conv = d.get("convergence", {})
    threshold = float(conv.get("threshold", 0.05))
    if not threshold > 0:
        raise ConfigError("convergence.threshold", "must be > 0")
    norm = conv.get("norm", "l1")
    if norm not in NORMS:
        raise ConfigError("convergence.norm", f"must be one of {NORMS}")
    reps = d.get("repetitions", 1)
    if not isinstance(reps, int) or reps < 1:
        raise ConfigError("repetitions", "must be an integer >= 1")
    if reps > 1 and random_init is None:
        log.warning("repetitions=%d with a fixed initial state; all runs will be identical", reps)
    output_dir = os.environ.get(OUTPUT_ENV) or d.get("output", {}).get("dir", "out")
    return ExperimentConfig(sched, weights, x0, s0, random_init, algorithm, horizon, threshold, norm,
                            reps, output_dir, d)


def load_config(path) -> ExperimentConfig:
    with open(path) as fh:
        return parse_config(json.load(fh))


def validate_config(cfg: ExperimentConfig):
    """Check the weights on every distinct graph the run will see; raise on the first bad one."""
    if cfg.weights.time_varying:
        for k in range(cfg.horizon):
            g = cfg.schedule.graph(k)
            report = check_weights(g, *cfg.weights.weights(g, k))
            if report:
                raise WeightViolation(report, k)
        return
    period = cfg.schedule.period
    ks = range(min(cfg.horizon, period)) if period is not None else range(cfg.horizon)
    seen = set()
    for k in ks:
        g = cfg.schedule.graph(k)
        if g in seen:
            continue
        seen.add(g)
        report = check_weights(g, *cfg.weights.weights(g, k))
        if report:
            raise WeightViolation(report, k)


def trajectory_csv(traj) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    n = traj.n
    w.writerow(["k"] + [f"x{i}" for i in range(1, n + 1)] + [f"s{i}" for i in range(1, n + 1)])
    for t in range(traj.x.shape[0]):
        w.writerow([traj.k0 + t] + [repr(float(v)) for v in traj.x[t]] + [repr(float(v)) for v in traj.s[t]])
    return buf.getvalue()


def read_trajectory_csv(path):
    """``(k, x, s)`` arrays from a trajectory CSV."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], np.array(rows[1:], dtype=float)
    n = (len(header) - 1) // 2
    return body[:, 0].astype(int), body[:, 1:1 + n], body[:, 1 + n:]


class OutputCollector:
    """Buffers every output file and writes each one atomically on :meth:`flush`."""

    def __init__(self, directory):
        self.directory = Path(directory)
        self.files = {}

    def add(self, name, text):
        self.files[name] = text

    def flush(self):
        self.directory.mkdir(parents=True, exist_ok=True)
        for name, text in self.files.items():
            fd, tmp = tempfile.mkstemp(dir=self.directory, prefix=f".{name}.")
            with os.fdopen(fd, "w", newline="") as fh:
                fh.write(text)
            os.replace(tmp, self.directory / name)
        return [self.directory / name for name in self.files]


def run_experiment(cfg: ExperimentConfig, output_dir=None, write=True, dump_matrix=None) -> dict:
    """Simulate every repetition; return the summary and (optionally) write files.

    Files: ``trajectory.csv`` / ``metrics.csv`` (suffixed ``_r000`` etc. when
    there are several repetitions), ``summary.csv`` and ``summary.json``.
    """
    validate_config(cfg)
    switching = cfg.algorithm == SURPLUS
    out = OutputCollector(output_dir or cfg.output_dir)
    runs = []
    for rep in range(cfg.repetitions):
        st0, seed = cfg.initial_state(rep)
        x_a = float(np.sum(st0.x + st0.s) / cfg.n)
        t0 = time.perf_counter()
        traj = run(cfg.schedule, cfg.weights, st0, cfg.horizon, switching=switching)
        wall = time.perf_counter() - t0
        step_hit = convergence_time(traj, x_a, cfg.threshold, cfg.norm)
        runs.append({
            "repetition": rep,
            "seed": seed,
            "converged": step_hit is not None,
            "convergence_step": step_hit,
            "final_dist": float(distances(traj.x[-1], traj.s[-1], x_a, cfg.norm)),
            "wall_time": wall,
        })
        suffix = "" if cfg.repetitions == 1 else f"_r{rep:03d}"
        out.add(f"trajectory{suffix}.csv", trajectory_csv(traj))
        out.add(f"metrics{suffix}.csv", metrics_csv(trajectory_metrics(traj, x_a)))
        if dump_matrix is not None and rep == 0:
            k = int(dump_matrix)
            if not 0 <= k < cfg.horizon:
                raise ConfigError("--dump-matrix", f"step {k} outside [0, {cfg.horizon})")
            g = cfg.schedule.graph(k)
            c = traj.c[k] if switching else np.ones(cfg.n, dtype=bool)
            buf = io.StringIO()
            for row in build_matrices(g, cfg.weights, c, k).M:
                buf.write(",".join(repr(float(v)) for v in row) + "\n")
            out.add(f"M_k{k}.csv", buf.getvalue())

    not_converged = sum(not r["converged"] for r in runs)
    if not_converged:
        log.warning("%d of %d runs did not converge within %d steps", not_converged, len(runs), cfg.horizon)
    steps = [r["convergence_step"] for r in runs if r["converged"]]
    summary = {
        "algorithm": cfg.algorithm,
        "n": cfg.n,
        "horizon": cfg.horizon,
        "threshold": cfg.threshold,
        "norm": cfg.norm,
        "rng": rng.ALGORITHM,
        "converged": not_converged == 0,
        "convergence_step": runs[0]["convergence_step"] if len(runs) == 1 else (
            float(np.mean(steps)) if steps else None),
        "final_dist": runs[0]["final_dist"] if len(runs) == 1 else float(np.max([r["final_dist"] for r in runs])),
        "wall_time": float(sum(r["wall_time"] for r in runs)),
        "not_converged": not_converged,
        "runs": runs,
    }
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    cols = ["repetition", "seed", "converged", "convergence_step", "final_dist", "wall_time"]
    w.writerow(cols)
    for r in runs:
        w.writerow(["" if r[c] is None else r[c] for c in cols])
    out.add("summary.csv", buf.getvalue())
    out.add("summary.json", json.dumps(summary, indent=2) + "\n")
    if write:
        out.flush()
    return summary


def convergence_steps(sched, policy, x0, s0, horizon, threshold, norm="l1", switching=True):
    """Vectorised runs of many initial states; first hitting step per row (-1 if never).

    Stops as soon as every row has hit the threshold.
    """
    x = np.array(x0, dtype=float)
    s = np.zeros_like(x) if s0 is None else np.array(s0, dtype=float)
    x_a = (x + s).sum(axis=1, keepdims=True) / x.shape[1]
    hit = np.full(x.shape[0], -1)
    cache = {}
    for k in range(horizon + 1):
        fresh = (hit < 0) & (distances(x, s, x_a, norm) < threshold)
        hit[fresh] = k
        if (hit >= 0).all() or k == horizon:
            break
        g = sched.graph(k)
        w = cache.get(g)
        if w is None:
            w = policy.weights(g, k)
            report = check_weights(g, *w)
            if report:
                raise WeightViolation(report, k)
            cache[g] = w
        x, s, _, _ = advance(*w, x, s, switching)
    return hit


def run_comparison(n_list, template: dict | None = None):
    """Surplus vs. baseline mean convergence steps on :func:`fig3_family` digraphs.

    ``template`` keys (all optional): ``repetitions`` (50), ``low``/``high``
    (-50/50), ``seed`` (0), ``threshold`` (0.05), ``norm`` ("l1"),
    ``horizon`` (1_000_000), ``orientation`` ("matrix").  Weights are
    ``a = b = 1/n`` and ``eps = 1/(2n)``; both algorithms share initial states.
    """
    t = dict(template or {})
    reps = int(t.get("repetitions", 50))
    low, high = float(t.get("low", -50.0)), float(t.get("high", 50.0))
    seed = int(t.get("seed", 0))
    threshold = float(t.get("threshold", 0.05))
    norm = t.get("norm", "l1")
    horizon = int(t.get("horizon", 1_000_000))
    orientation = t.get("orientation", "matrix")
    rows = []
    for n in n_list:
        if n < 3:
            raise ConfigError("n", f"comparison needs n >= 3, got {n}")
        sched = TopologySchedule.static(fig3_family(n, orientation))
        policy = WeightPolicy.uniform(1.0 / n, 1.0 / n, 1.0 / (2 * n))
        x0 = np.stack([rng.uniform(seed + r, low, high, n) for r in range(reps)])
        row = {"n": n}
        for name, switching in ((SURPLUS, True), (BASELINE, False)):
            hit = convergence_steps(sched, policy, x0, None, horizon, threshold, norm, switching)
            missed = int((hit < 0).sum())
            if missed:
                warnings.warn(f"n={n} {name}: {missed} of {reps} runs did not converge in {horizon} steps")
            row[f"mean_steps_{name}"] = float(hit[hit >= 0].mean()) if missed < reps else float("nan")
            row[f"not_converged_{name}"] = missed
        row["ratio"] = row["mean_steps_surplus"] / row["mean_steps_baseline"]
        rows.append(row)
    return rows


COMPARISON_COLUMNS = ["n", "mean_steps_surplus", "mean_steps_baseline", "ratio",
                      "not_converged_surplus", "not_converged_baseline"]


def comparison_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COMPARISON_COLUMNS)
    for r in rows:
        w.writerow([r[c] for c in COMPARISON_COLUMNS])
    return buf.getvalue()


def _read_json(path):
    with open(path) as fh:
        return json.load(fh)


def _cmd_run(args):
    cfg = load_config(args.config)
    out_dir = os.environ.get(OUTPUT_ENV) or args.out or cfg.output_dir
    summary = run_experiment(cfg, out_dir, dump_matrix=args.dump_matrix)
    brief = {k: summary[k] for k in ("converged", "convergence_step", "final_dist", "wall_time", "not_converged")}
    print(json.dumps(brief))
    return EXIT_OK


def _cmd_compare(args):
    template = _read_json(args.template) if args.template else {}
    try:
        n_list = [int(v) for v in args.n.split(",") if v.strip()]
    except ValueError:
        raise ConfigError("--n", f"expected comma-separated integers, got {args.n!r}") from None
    rows = run_comparison(n_list, template)
    text = comparison_csv(rows)
    out_dir = os.environ.get(OUTPUT_ENV) or args.out or template.get("output", {}).get("dir", "out")
    coll = OutputCollector(out_dir)
    coll.add("comparison.csv", text)
    coll.flush()
    sys.stdout.write(text)
    return EXIT_OK


def _cmd_check(args):
    d = _read_json(args.schedule)
    sched, _ = load_schedule(d.get("schedule", d))
    exact = sched.period is not None
    result = {
        "window": args.window,
        "horizon": None if exact else args.horizon,
        "exact": exact,
        "jointly_strongly_connected": is_jointly_strongly_connected(sched, args.window, args.horizon),
        "jointly_has_globally_reachable": jointly_has_globally_reachable(sched, args.window, args.horizon),
    }
    print(json.dumps(result))
    return EXIT_OK


def _cmd_validate(args):
    cfg = load_config(args.config)
    validate_config(cfg)
    print(json.dumps({"valid": True, "n": cfg.n, "algorithm": cfg.algorithm}))
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="surplus-consensus", description="Surplus-based average consensus simulator")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run an experiment config")
    r.add_argument("config")
    r.add_argument("--out", help=f"output directory (overridden by ${OUTPUT_ENV})")
    r.add_argument("--dump-matrix", type=int, metavar="K", help="also write the 2n x 2n update matrix of step K")
    r.set_defaults(func=_cmd_run)

    c = sub.add_parser("compare", help="surplus vs. baseline convergence times")
    c.add_argument("template", nargs="?")
    c.add_argument("--n", default="10,20,40", help="comma-separated node counts")
    c.add_argument("--out")
    c.set_defaults(func=_cmd_compare)

    k = sub.add_parser("check-connectivity", help="joint strong connectivity of a schedule")
    k.add_argument("schedule")
    k.add_argument("--window", type=int, required=True)
    k.add_argument("--horizon", type=int)
    k.set_defaults(func=_cmd_check)

    v = sub.add_parser("validate", help="validate a config without running it")
    v.add_argument("config")
    v.set_defaults(func=_cmd_validate)
    return p


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: cannot read input: {exc}", file=sys.stderr)
        return EXIT_UNREADABLE
    except WeightViolation as exc:
        print(f"error: weights: {exc}", file=sys.stderr)
        return EXIT_WEIGHTS
    except DimensionError as exc:
        print(f"error: dimension mismatch: {exc}", file=sys.stderr)
        return EXIT_DIMENSION
    except ConfigError as exc:
        print(f"error: config field {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, IndexError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

"""Driving the simulator from a JSON config and reading back its files."""
# %%
import csv
import json
import tempfile
from pathlib import Path

from surplus_consensus.harness import main, read_trajectory_csv

work = Path(tempfile.mkdtemp(prefix="surplus-demo-"))
config = {
    "schedule": {"kind": "random", "n": 6, "p": 0.3, "seed": 11},
    "weights": {"mode": "uniform", "a": 0.15, "b": 0.15, "eps": 0.2},
    "initial_state": {"random_uniform": {"low": -50, "high": 50, "seed": 1}},
    "algorithm": "surplus",
    "horizon": 1500,
    "convergence": {"threshold": 0.05, "norm": "l1"},
    "repetitions": 3,
    "output": {"dir": str(work / "out")},
}
(work / "cfg.json").write_text(json.dumps(config, indent=2))

# %%
print("validate exit code:", main(["validate", str(work / "cfg.json")]))
print("run exit code:", main(["run", str(work / "cfg.json"), "--dump-matrix", "0"]))
print(sorted(p.name for p in (work / "out").iterdir()))

# %%
with open(work / "out" / "summary.csv") as fh:
    for row in csv.DictReader(fh):
        print(row)
k, x, s = read_trajectory_csv(work / "out" / "trajectory_r000.csv")
print("steps stored:", len(k) - 1, " final spread:", x[-1].max() - x[-1].min())

# %%
# A bad config fails before anything is simulated, with its own exit code.
config["weights"]["b"] = 0.9
(work / "bad.json").write_text(json.dumps(config))
print("invalid weights exit code:", main(["validate", str(work / "bad.json")]))

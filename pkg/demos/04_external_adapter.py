"""
Plugging in an objective written in any language
================================================

The optimizer talks to external objectives over a one-line-JSON subprocess
protocol: it writes {"x": [...]} to the adapter's stdin and reads
{"components": [...]} back.  This demo generates a tiny adapter script plus
its descriptor file, then drives the full benchmark CLI against it.
"""

import json
import subprocess
import sys
import tempfile
from pathlib import Path

ADAPTER = '''\
import json
import sys

point = json.loads(sys.stdin.readline())["x"]
smooth = -sum((v - 0.3) ** 2 for v in point)
drift = -sum(0.1 * v for v in point)
print(json.dumps({"components": [smooth, drift]}))
'''

with tempfile.TemporaryDirectory() as tmp:
    tmp = Path(tmp)
    (tmp / "adapter.py").write_text(ADAPTER)

    # The descriptor tells the optimizer the dimension, the per-coordinate
    # monotonicity signs of each component, and how to launch the adapter.
    descriptor = {
        "name": "quadratic-demo",
        "dimension": 2,
        "components": [
            {"name": "smooth", "signs": [0, 0]},
            {"name": "drift", "signs": [-1, -1]},
        ],
        "command": [sys.executable, str(tmp / "adapter.py")],
        "timeout_s": 30,
    }
    (tmp / "problem.json").write_text(json.dumps(descriptor, indent=2))

    out = tmp / "results"
    argv = [
        sys.executable, "-m", "monobo.cli", "run",
        "--problem", f"external:{tmp / 'problem.json'}",
        "--strategies", "standard",
        "--trials", "2", "--init", "3", "--budget", "3",
        "--baseline", "20", "--seed", "7", "--out", str(out),
    ]
    print("running:", " ".join(argv[4:]))
    subprocess.run(argv, check=True)

    lines = (out / "results.csv").read_text().strip().split("\n")
    print(f"\nresults.csv ({len(lines) - 1} rows):")
    for line in lines[:4]:
        print(" ", line)
    summary = json.loads((out / "summary.json").read_text())
    best = summary["strategies"]["standard"]["mean_best_so_far"]
    print(f"\nmean best total: first evaluation {best[0]:+.4f} -> final {best[-1]:+.4f}")

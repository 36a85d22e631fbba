"""Certification suites and the command line.

Run with ``python demos/04_certification.py``.
"""
import json
import subprocess
import sys

from hardykernels import GridSpec, check_regimes, check_sandwich, check_threeg
from hardykernels.certifier import geometric

# Each check evaluates a ratio on a grid, fits the smallest and largest
# value, and repeats on the refined grid to see whether the constants move.
grid = GridSpec((1.0,), (1.0, 1.5), (0.0,), rs_values=geometric(-4, 4, 0.5))
rep = check_sandwich("free", grid)
c = rep.constants
print(f"free sandwich: status {rep.status}, constants [{c.c_lower:.3g}, {c.c_upper:.3g}], drift {c.refinement_drift:.2%}")

rep = check_threeg(GridSpec((1.0, -0.25), (1.0,), (0.0,)))
print(f"3G inequality: status {rep.status}, constant {rep.constants.c_upper:.3g}")

rep = check_regimes(GridSpec((1.0,), (1.0,), (0.0,), rs_values=geometric(-5, 5, 1.0)))
for d in rep.details:
    q = d["params"]
    print(f"regime delta = {q['delta']}: ratio window [{q['c_lower']:.3g}, {q['c_upper']:.3g}]")

# The same checks are available from the command line and produce JSON.
cmd = [sys.executable, "-m", "hardykernels"]
out = subprocess.run(cmd + ["eval", "--zeta", "1", "--alpha", "1.5", "--t", "1", "--r", "1", "--s", "2", "--format", "json"],
                     capture_output=True, text=True, check=True)
print("eval:", json.loads(out.stdout))
out = subprocess.run(cmd + ["certify", "--suite", "threeg"], capture_output=True, text=True)
print("certify --suite threeg: exit", out.returncode, "status", json.loads(out.stdout)["status"])

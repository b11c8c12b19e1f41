"""Exchange problems as plain-text QCQP files, then solve one via the CLI path.

The file format is line-oriented and diff-friendly: a 'dim n m' line, the
objective data Q and q, per-constraint blocks Qj / qj / bj, and a final
projection line.  Anything after '#' is a comment.
"""

import os
import subprocess
import sys

import numpy as np

from pplad import QcqpSpec, WholeSpace, from_qcqp
from pplad.cli import load_qcqp, save_qcqp
from pplad.problems import example2_spec

OUT_DIR = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(OUT_DIR, exist_ok=True)

# 1) serialize the built-in QCQP and read it back: identical evaluations
path = os.path.join(OUT_DIR, "builtin_qcqp.txt")
save_qcqp(example2_spec(), path)
print(f"wrote {path}:")
with open(path) as fh:
    for line in list(fh)[:6]:
        print("  " + line.rstrip())
print("  ...")

reloaded = load_qcqp(path)
original = from_qcqp(example2_spec())
x = np.array([4.0, 4.0, 4.0])
print(f"objective at (4,4,4): file {reloaded.objective(x)!r} "
      f"vs builtin {original.objective(x)!r}\n")

# 2) a custom problem: equality-constrained least squares written as a QCQP
#    min 0.5 ||x||^2  s.t.  <a, x> = 1  with a = (1, 2)
spec = QcqpSpec(
    Q=np.eye(2), q=np.zeros(2),
    Qj=(np.zeros((2, 2)),),
    qj=(np.array([1.0, 2.0]),),
    bj=(-1.0,),
    projection=WholeSpace())
custom_path = os.path.join(OUT_DIR, "least_norm.txt")
save_qcqp(spec, custom_path)

# 3) solve it through the command-line interface
trace = os.path.join(OUT_DIR, "least_norm_trace.csv")
report = os.path.join(OUT_DIR, "least_norm_report.txt")
cmd = [sys.executable, "-m", "pplad", "solve",
       "--problem", custom_path, "--x0", "1,1", "--step-size", "0.05",
       "--tol-opt", "1e-9", "--tol-feas", "1e-9",
       "--trace", trace, "--report", report, "--check-invariants"]
print("running:", " ".join(cmd[2:]))
proc = subprocess.run(cmd, capture_output=True, text=True)
print(proc.stdout.strip())
print(f"exit code {proc.returncode}\n")

print("report file:")
with open(report) as fh:
    print("  " + "  ".join(fh.readlines()))

# analytic solution of the least-norm problem: x* = a / ||a||^2 = (0.2, 0.4)
print("analytic solution: (0.2, 0.4)")

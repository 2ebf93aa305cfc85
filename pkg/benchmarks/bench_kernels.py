"""Numba kernels against the pure-Python fallback.

Each path runs in its own interpreter because the switch is read at import:

    python3 benchmarks/bench_kernels.py            # both paths, summary table
    python3 benchmarks/bench_kernels.py --returns 20

The workload is a batch of first returns on the left ray of a two-cycle
configuration plus a vectorized field evaluation. Both paths must agree to
within integrator tolerance; the script exits nonzero if they do not.
"""
import argparse
import json
import os
import subprocess
import sys
import time

WORKER = r"""
import json, sys, time
import numpy as np
from hollingbif import NUMBA
from hollingbif.continuation import left_ray, nearest_antisaddle
from hollingbif.cycles import displacement
from hollingbif.vectorfield import SystemParams, eval_field_array

n = int(sys.argv[1])
p = SystemParams(1.2505625, -1.1339144168133268, 0.83524, 0.13094, 0.05553)
sec = left_ray(nearest_antisaddle(p, (1.0, 1.0)).location)
ss = np.linspace(0.05, 0.6, n)
displacement(p, sec, 0.3)  # compile / warm up
t0 = time.perf_counter()
ds = [displacement(p, sec, s) for s in ss]
t_ret = time.perf_counter() - t0
xs, ys = np.meshgrid(np.linspace(0.1, 8, 300), np.linspace(0.1, 8, 300))
eval_field_array(p, xs[:2], ys[:2])
t0 = time.perf_counter()
F = eval_field_array(p, xs, ys)
t_grid = time.perf_counter() - t0
print(json.dumps({"numba": NUMBA, "returns_s": t_ret, "grid_s": t_grid,
                  "d": [float(v) for v in ds], "grid_sum": float(np.sum(F))}))
"""


def run(disable: bool, n: int) -> dict:
    env = dict(os.environ)
    env["HOLLINGBIF_DISABLE_NUMBA"] = "1" if disable else "0"
    out = subprocess.run([sys.executable, "-c", WORKER, str(n)], env=env, check=True,
                         capture_output=True, text=True)
    return json.loads(out.stdout.strip().splitlines()[-1])


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--returns", type=int, default=12)
    args = ap.parse_args()
    fast = run(False, args.returns)
    slow = run(True, args.returns)
    diff = max(abs(a - b) for a, b in zip(fast["d"], slow["d"]))
    print(f"{'path':<8}{'returns [s]':>14}{'grid 90k [s]':>14}")
    for name, r in (("numba", fast), ("python", slow)):
        print(f"{name:<8}{r['returns_s']:>14.4f}{r['grid_s']:>14.4f}")
    print(f"speedup  returns x{slow['returns_s'] / fast['returns_s']:.1f}, "
          f"grid x{slow['grid_s'] / fast['grid_s']:.1f}")
    print(f"max |d_numba - d_python| = {diff:.3e}")
    if not fast["numba"]:
        print("warning: numba unavailable, both runs used the fallback")
    return 0 if diff < 1e-8 else 1


if __name__ == "__main__":
    sys.exit(main())

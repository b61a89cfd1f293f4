"""Time the hot kernels with numba on and off.

    python3 benchmarks/bench_kernels.py [--repeat 3]

Each backend runs in its own interpreter because MORSELAB_NUMBA is read at
import time. Numba timings exclude the first (compiling) call.
"""
import argparse
import json
import os
import subprocess
import sys

WORKLOAD = r"""
import json, sys, time
import numpy as np
from morselab import backend_name
from morselab.acceptance import main_system, main_kernel
from morselab.integrator import integrate
from morselab.segment import from_function
from morselab.kernels import count_alternations
from morselab.difference import DiscreteSystemSpec, discrete_scan, seed_grid
from morselab.system import Nonlinearity

repeat = int(sys.argv[1])
seg = from_function(lambda s: 0.6*np.cos(7*s), lambda s: -4.2*np.sin(7*s))
rng = np.random.default_rng(0)
samples = rng.standard_normal((2000, 201))
spec = DiscreteSystemSpec(2, Nonlinearity("general", {"a": 0.5, "g": -1.0, "c": 1.0}), -1)
seeds = seed_grid(2, 10)

jobs = {
    "integrate_20": lambda: integrate(main_system(), main_kernel(), seg, 20.0, 1/400),
    "sign_changes_2000": lambda: [count_alternations(x, 1e-9) for x in samples],
    "discrete_scan_1000x200": lambda: discrete_scan(spec, seeds, 200, threads=1),
}
out = {"backend": backend_name()}
for name, job in jobs.items():
    job()
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        job()
        best = min(best, time.perf_counter() - t0)
    out[name] = best
print(json.dumps(out))
"""


def run(flag, repeat):
    env = dict(os.environ, MORSELAB_NUMBA=flag)
    proc = subprocess.run([sys.executable, "-c", WORKLOAD, str(repeat)], env=env,
                          capture_output=True, text=True, check=True)
    return json.loads(proc.stdout.strip().splitlines()[-1])


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    fast, slow = run("1", args.repeat), run("0", args.repeat)
    print(f"{'kernel':<26}{fast['backend']:>12}{slow['backend']:>12}{'speedup':>10}")
    for name in fast:
        if name == "backend":
            continue
        print(f"{name:<26}{fast[name]:>11.4f}s{slow[name]:>11.4f}s{slow[name] / fast[name]:>9.1f}x")


if __name__ == "__main__":
    main()

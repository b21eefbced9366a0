"""
Time the explicit stepping loop with and without numba.

Each backend runs in its own interpreter (the backend is fixed at import time
by ``STEFAN_DISABLE_NUMBA``).  Reported numbers are wall time per explicit
step, best of ``--repeat`` runs, after one warm-up run that also absorbs JIT
compilation.

    python benchmarks/bench_stepping.py [--n 200] [--repeat 3]
"""
import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, time
from stefan_control import ZINC, ControlLaw, ObserverInit, ObserverConfig, SimConfig, linear_scenario, run_scenario, backend

n, repeat, t_plant, t_obs = int(sys.argv[1]), int(sys.argv[2]), float(sys.argv[3]), float(sys.argv[4])
cases = {
    "state feedback (plant only)": (ControlLaw("state-feedback", "neumann", c=0.001, s_r=0.35), None, t_plant),
    "output feedback (plant + observer)": (ControlLaw("output-feedback", "neumann", c=0.001, s_r=0.35),
                                           ObserverConfig(0.001, ObserverInit(2e4)), t_obs),
}
out = {"backend": backend(), "cases": {}}
for name, (law, obs, t_end) in cases.items():
    sim = SimConfig(t_end=t_end, n=n, sample_every=t_end / 10)
    sc = linear_scenario(ZINC, law, sim, s0=0.01, H=1e4, observer=obs)
    run_scenario(sc)
    best = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        traj = run_scenario(sc)
        dt = time.perf_counter() - t0
        best = dt if best is None else min(best, dt)
    out["cases"][name] = {"steps": traj.steps, "seconds": best, "us_per_step": 1e6 * best / traj.steps}
print(json.dumps(out))
"""


def run_backend(disable_numba: bool, args) -> dict:
    env = dict(os.environ, STEFAN_DISABLE_NUMBA="1" if disable_numba else "0")
    proc = subprocess.run(
        [sys.executable, "-c", WORKER, str(args.n), str(args.repeat), str(args.t_plant), str(args.t_obs)],
        env=env, capture_output=True, text=True, check=True,
    )
    return json.loads(proc.stdout.strip().splitlines()[-1])


def main():
    ap = argparse.ArgumentParser(description=__doc__.strip().splitlines()[0])
    ap.add_argument("--n", type=int, default=200, help="grid intervals")
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--t-plant", type=float, default=200.0, help="simulated seconds, plant-only case")
    ap.add_argument("--t-obs", type=float, default=100.0, help="simulated seconds, observer case")
    args = ap.parse_args()

    fast = run_backend(False, args)
    slow = run_backend(True, args)
    print(f"N = {args.n}, best of {args.repeat}")
    print(f"{'case':<36} {'steps':>8} {fast['backend']:>12} {slow['backend']:>12} {'speedup':>8}")
    for name, f in fast["cases"].items():
        s = slow["cases"][name]
        print(f"{name:<36} {f['steps']:>8d} {f['us_per_step']:>9.2f} us {s['us_per_step']:>9.2f} us "
              f"{s['us_per_step'] / f['us_per_step']:>7.1f}x")


if __name__ == "__main__":
    main()

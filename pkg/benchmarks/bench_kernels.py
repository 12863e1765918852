"""Wall-clock comparison of the compiled and pure-Python integrator kernels.

Usage: python benchmarks/bench_kernels.py [--repeat N] [--cases fig3:3 fig2:3 ...]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from noonsim.harness import preset, simulate
from noonsim.kernels import available_backends


def time_case(name: str, M: int, backend: str, repeat: int) -> tuple[float, np.ndarray]:
    cfg = preset(name, M)
    cfg = cfg.with_(integrator={**cfg.integrator, "backend": backend})
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        traj = simulate(cfg)
        best = min(best, time.perf_counter() - t0)
    return best, traj.final_state.merged()[1]


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--cases", nargs="*", default=["fig3:3", "fig3:5", "fig2:3"])
    args = ap.parse_args(argv)

    backends = available_backends()
    if "cython" not in backends:
        print("compiled extension not built; only the Python kernel is timed")
    print(f"{'case':<10}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}{'max diff':>12}")
    for case in args.cases:
        name, M = case.split(":")
        res = {b: time_case(name, int(M), b, args.repeat) for b in backends}
        row = f"{case:<10}" + "".join(f"{res[b][0]:>11.3f}s" for b in backends)
        if len(res) == 2:
            diff = float(np.max(np.abs(res["cython"][1] - res["python"][1])))
            row += f"{res['python'][0] / res['cython'][0]:>9.1f}x{diff:>12.1e}"
        print(row)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

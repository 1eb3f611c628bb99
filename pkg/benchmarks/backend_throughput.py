"""Throughput comparison of the snapshot kernels.

Runs the baseline scenario for a fixed snapshot budget on each available
backend and reports per-snapshot cost plus the projected wall time of a
full 163 840-snapshot study, serial and at the machine's core count.

Usage: python3 benchmarks/backend_throughput.py [snapshots]
"""

import os
import sys
import time

from imtsar import _kernels, engine


def measure(backend: str, snapshots: int) -> float:
    cfg = engine.ScenarioConfig(snapshots=snapshots, backend=backend)
    engine.run_snapshot(cfg, 0)          # warm the scenario context cache
    t0 = time.perf_counter()
    engine.scenario_samples(cfg)
    return (time.perf_counter() - t0) / snapshots


def main() -> None:
    snapshots = int(sys.argv[1]) if len(sys.argv) > 1 else 512
    cores = os.cpu_count() or 1
    backends = ["python"]
    if _kernels.cython_available():
        backends.append("cython")
    else:
        print("compiled kernel not installed; benchmarking NumPy only")

    print(f"{snapshots} snapshots per backend, baseline scenario "
          f"(468 stations), {cores} cores for the parallel projection")
    ref = None
    for backend in backends:
        per = measure(backend, snapshots)
        full = per * 163840
        line = (f"{backend:7s} {per * 1e3:8.3f} ms/snapshot   "
                f"full run {full / 60.0:5.1f} min serial, "
                f"~{full / 60.0 / cores:4.1f} min on {cores} workers")
        if ref is None:
            ref = per
        else:
            line += f"   ({ref / per:.1f}x the NumPy kernel)"
        print(line)


if __name__ == "__main__":
    main()

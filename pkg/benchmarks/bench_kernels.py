"""Compare the numba and pure-numpy RK4 loops on the nominal drives.

Usage: python3 benchmarks/bench_kernels.py [--repeat N] [--pulses N]
"""

import argparse
import time

import numpy as np

from plasmadce.squeezing import DriveSpec, integrate, intermode_pair_schedule


def best_of(func, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        result = func()
        times.append(time.perf_counter() - start)
    return min(times), result


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--pulses", type=int, default=300)
    args = parser.parse_args()

    drive = DriveSpec(1.0, 0.02, 0.005j, 0.0, args.pulses)
    single = drive.schedule()
    pair = intermode_pair_schedule(1.0, 0.01j, 0.01, Omega=2.0)
    cases = [
        ("single mode", single, drive.t1),
        ("two modes", pair, args.pulses * 2.0 * np.pi / 2.0),
    ]
    print(f"{'case':<12} {'numba (s)':>10} {'numpy (s)':>10} {'speed-up':>9} {'max |dn|/n':>11}")
    for name, schedule, t_end in cases:
        # warm-up compiles (or loads the cached) numba kernels
        integrate(schedule, t_end, backend="numba")
        t_nb, traj_nb = best_of(lambda: integrate(schedule, t_end, backend="numba"), args.repeat)
        t_np, traj_np = best_of(lambda: integrate(schedule, t_end, backend="numpy"), 1)
        n_nb, n_np = traj_nb.photon_number(), traj_np.photon_number()
        diff = np.max(np.abs(n_nb - n_np) / np.maximum(n_np, 1e-300))
        print(f"{name:<12} {t_nb:10.4f} {t_np:10.4f} {t_np / t_nb:9.1f} {diff:11.2e}")


if __name__ == "__main__":
    main()

"""Time the atom-series kernel with numba and with the numpy fallback.

Usage: python3 benchmarks/bench_kernels.py [--dim 41] [--points 5001] [--repeat 3]

Each backend is run once untimed (numba compiles or loads its cache), then
timed ``--repeat`` times; the best time is reported together with the largest
difference between the two backends' outputs.
"""
import argparse
import math
import time

import numpy as np

from kerrqed import _accel, _kernels, hilbert


def _state(dim):
    amp = hilbert.coherent_amplitudes(math.sqrt(10.0), dim - 1).amplitudes
    return hilbert.tensor_state(hilbert.atom_vector("e"), amp, amp)


def _best(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - start)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dim", type=int, default=41)
    ap.add_argument("--points", type=int, default=5001)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    ce, cg = (np.ascontiguousarray(x) for x in _state(args.dim).tensor)
    times = np.linspace(0.0, 100.0, args.points)
    params = (0.0, 0.01, math.sqrt(1.01))
    t_np, out_np = _best(lambda: _kernels.atom_series_numpy(ce, cg, times, *params), args.repeat)
    print(f"numpy : {t_np:8.3f} s  ({args.dim}x{args.dim} modes, {args.points} times)")
    if not _accel.HAVE_NUMBA:
        print("numba : not installed")
        return
    t_nb, out_nb = _best(lambda: _kernels.atom_series_loop(ce, cg, times, *params), args.repeat)
    diff = max(np.max(np.abs(out_np[0] - out_nb[0])), np.max(np.abs(out_np[1] - out_nb[1])))
    print(f"numba : {t_nb:8.3f} s  speed-up x{t_np / t_nb:.1f}, max backend difference {diff:.2e}")


if __name__ == "__main__":
    main()

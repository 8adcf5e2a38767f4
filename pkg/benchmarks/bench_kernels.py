"""Time the batch kernels with numba and with the numpy fallback.

    python3 benchmarks/bench_kernels.py [--batch 20000] [--repeat 5]

The fallback is selected per call through EMAT_DISABLE_NUMBA, so both paths run
in one process.  The first compiled call is made before timing.
"""

import argparse
import os
import timeit

import numpy as np

from emat._backend import HAS_NUMBA
from emat.kernels import acoustic_tensor_batch, contract_a_batch, push_forward_a_batch


def inputs(batch, rng):
    A = rng.standard_normal((batch, 3, 3, 3, 3))
    F = np.eye(3) + 0.1 * rng.standard_normal((batch, 3, 3))
    G = rng.standard_normal((batch, 3, 3))
    n = rng.standard_normal((batch, 3))
    n /= np.linalg.norm(n, axis=1, keepdims=True)
    return A, F, G, n


def best_time(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--batch", type=int, default=20000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    A, F, G, n = inputs(args.batch, np.random.default_rng(0))
    cases = {
        "push_forward_a_batch": lambda: push_forward_a_batch(A, F),
        "acoustic_tensor_batch": lambda: acoustic_tensor_batch(A[0], n),
        "contract_a_batch": lambda: contract_a_batch(A, G),
    }
    if not HAS_NUMBA:
        print("numba is not installed; only the numpy path is timed")

    print(f"batch = {args.batch}, best of {args.repeat}")
    print(f"{'kernel':24s} {'numba (ms)':>12s} {'numpy (ms)':>12s} {'speedup':>8s} {'max diff':>10s}")
    for name, fn in cases.items():
        os.environ.pop("EMAT_DISABLE_NUMBA", None)
        fast = fn()  # compile outside the timed region
        t_nb = best_time(fn, args.repeat) if HAS_NUMBA else float("nan")
        os.environ["EMAT_DISABLE_NUMBA"] = "1"
        slow = fn()
        t_np = best_time(fn, args.repeat)
        os.environ.pop("EMAT_DISABLE_NUMBA", None)
        diff = float(np.max(np.abs(fast - slow)))
        print(f"{name:24s} {1e3 * t_nb:12.3f} {1e3 * t_np:12.3f} {t_np / t_nb:8.2f} {diff:10.2e}")


if __name__ == "__main__":
    main()

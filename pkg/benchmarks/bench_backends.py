"""Compare the compiled kernels against the pure-Python fallback.

Run from the repository root:

    python3 benchmarks/bench_backends.py

Two kernels are timed: the carry-less (GF(2) polynomial) multiply used
by privacy amplification, over a range of operand widths, and the
per-pulse exchange-outcome kernel used by the protocol simulator.  The
compiled path is what `import qkdsim` selects when the extension is
built; the reference path is the numpy/bigint implementation that the
compiled code must match bit for bit.
"""

import time

import numpy as np

from qkdsim import backend, _pykernels
from qkdsim.gf2 import bits_to_int


def _time(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_clmul():
    print("carry-less multiply (best of 5)")
    print(f"{'bits':>9} {'compiled':>12} {'python':>12} {'speedup':>9}")
    rng = np.random.default_rng(0)
    for bits in (512, 2048, 8192, 40_000, 354_294):
        a = bits_to_int(rng.integers(0, 2, size=bits, dtype=np.uint8))
        b = bits_to_int(rng.integers(0, 2, size=bits, dtype=np.uint8))
        assert backend.clmul_int(a, b) == _pykernels.clmul_int(a, b)
        t_c = _time(lambda: backend.clmul_int(a, b), 5)
        t_py = _time(lambda: _pykernels.clmul_int(a, b), 5)
        print(f"{bits:>9} {t_c * 1e3:>10.3f}ms {t_py * 1e3:>10.3f}ms "
              f"{t_py / t_c:>8.1f}x")


def bench_exchange():
    print()
    print("exchange-outcome kernel (best of 5)")
    print(f"{'pulses':>9} {'compiled':>12} {'python':>12} {'speedup':>9}")
    rng = np.random.default_rng(1)
    for m in (1 << 18, 1 << 20, 1 << 22):
        args = (rng.integers(0, 2, m, dtype=np.uint8),
                rng.integers(0, 2, m, dtype=np.uint8),
                rng.integers(0, 2, m, dtype=np.uint8),
                rng.random(m), rng.random(m), rng.random(m), rng.random(m),
                rng.integers(0, 2, m, dtype=np.uint8))
        got = backend.exchange_outcomes(*args, 1e-6, 0.01)
        want = _pykernels.exchange_outcomes(*args, 1e-6, 0.01)
        for g, w in zip(got, want):
            assert np.array_equal(np.asarray(g), np.asarray(w))
        t_c = _time(lambda: backend.exchange_outcomes(*args, 1e-6, 0.01), 5)
        t_py = _time(lambda: _pykernels.exchange_outcomes(*args, 1e-6, 0.01),
                     5)
        print(f"{m:>9} {t_c * 1e3:>10.3f}ms {t_py * 1e3:>10.3f}ms "
              f"{t_py / t_c:>8.1f}x")


if __name__ == "__main__":
    print(f"active backend: {backend.BACKEND_NAME}")
    if backend.BACKEND_NAME == "python":
        print("note: compiled extension not built; comparing python "
              "against itself")
    bench_clmul()
    bench_exchange()

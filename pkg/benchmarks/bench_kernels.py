"""Timing comparison of the compiled and pure-numpy kernel backends.

Runs each hot kernel on representative workload shapes with both
backends and prints a table of per-call times and the speedup of the
compiled extension.  Usage::

    python3 benchmarks/bench_kernels.py [--repeats 7] [--inner 200]

The numbers are medians over ``--repeats`` timing rounds, each round
averaging ``--inner`` calls.
"""

from __future__ import annotations

import argparse
import time
from statistics import median

import numpy as np

from monodeg.backend import available_backends, get_kernels

# (label, kernel name, argument builder)
WORKLOADS = [
    ("lp_norm n=8", "lp_norm",
     lambda rng: (rng.standard_normal(8), 3.0)),
    ("lp_norm n=512", "lp_norm",
     lambda rng: (rng.standard_normal(512), 3.0)),
    ("duality_map n=8", "duality_map",
     lambda rng: (rng.standard_normal(8), 1.5)),
    ("duality_map n=512", "duality_map",
     lambda rng: (rng.standard_normal(512), 1.5)),
    ("embedded_duality n=8", "embedded_duality",
     lambda rng: (rng.standard_normal(8), rng.uniform(0.5, 2.0, 8), 3.0)),
    ("embedded_duality n=64", "embedded_duality",
     lambda rng: (rng.standard_normal(64), rng.uniform(0.5, 2.0, 64), 3.0)),
    ("batch 1000x8 p=2", "embedded_duality_batch",
     lambda rng: (rng.standard_normal((1000, 8)),
                  rng.uniform(0.5, 2.0, 8), 2.0)),
    ("batch 1000x8 p=3", "embedded_duality_batch",
     lambda rng: (rng.standard_normal((1000, 8)),
                  rng.uniform(0.5, 2.0, 8), 3.0)),
    ("winding 4096 samples", "winding_total",
     lambda rng: _loop_values(4096)),
]


def _loop_values(m: int):
    th = np.linspace(0.0, 2.0 * np.pi, m, endpoint=False)
    z = (np.cos(th) + 1j * np.sin(th)) ** 2 + 0.1
    return np.ascontiguousarray(z.real), np.ascontiguousarray(z.imag)


def time_call(fn, args, repeats: int, inner: int) -> float:
    rounds = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        for _ in range(inner):
            fn(*args)
        rounds.append((time.perf_counter() - t0) / inner)
    return median(rounds)


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=7)
    ap.add_argument("--inner", type=int, default=200)
    args = ap.parse_args()

    backends = available_backends()
    print(f"available backends: {', '.join(backends)}")
    if "compiled" not in backends:
        print("compiled extension not importable; timing python only")

    rng = np.random.default_rng(0)
    prepared = [(label, name, build(rng)) for label, name, build in WORKLOADS]

    kernel_sets = {b: get_kernels(b) for b in backends}
    header = f"{'workload':24s}" + "".join(f"{b:>14s}" for b in backends)
    if len(backends) > 1:
        header += f"{'speedup':>10s}"
    print(header)
    print("-" * len(header))
    for label, name, call_args in prepared:
        times = {}
        for b in backends:
            fn = getattr(kernel_sets[b], name)
            out_a = fn(*call_args)
            times[b] = time_call(fn, call_args, args.repeats, args.inner)
        # the backends must agree before their timings are comparable
        for b in backends[1:]:
            ref = getattr(kernel_sets[backends[0]], name)(*call_args)
            got = getattr(kernel_sets[b], name)(*call_args)
            np.testing.assert_allclose(got, ref, rtol=1e-12, atol=1e-13)
        row = f"{label:24s}" + "".join(
            f"{times[b] * 1e6:12.2f}us" for b in backends
        )
        if len(backends) > 1:
            row += f"{times['python'] / times['compiled']:9.1f}x"
        print(row)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

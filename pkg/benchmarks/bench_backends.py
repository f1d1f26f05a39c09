"""Timing comparison of the numba and pure-NumPy kernel backends.

Runs the hot kernels (Born probabilities, outcome selection, per-record
quadratic forms, moment projections, twirl accumulation) and one end-to-end
estimation pipeline under both backends on identical inputs, and prints a
table of per-call times and speedups.

Usage::

    python benchmarks/bench_backends.py [--dim 16] [--batch 4096] [--repeats 5]
"""

from __future__ import annotations

import argparse
import os
import time

import numpy as np

from symshadows.backend import BACKEND_ENV_VAR, get_kernels
from symshadows.haar import symplectic_pairing
from symshadows.rng import RngStream
from symshadows.shadows import random_observable, random_pure_state, shadow_estimates
from symshadows.spaces import make_space, sample_point


def _time(fn, repeats: int) -> float:
    fn()  # warmup (JIT compilation, allocation)
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def run(dim: int, batch: int, repeats: int) -> None:
    rng = RngStream(0)
    spec = make_space("U", dim)
    v = np.ascontiguousarray(sample_point(spec, rng.child(0), size=batch), dtype=np.complex128)
    rho = random_pure_state(dim, rng.child(1))
    obs = np.ascontiguousarray(random_observable(dim, 0.5, rng=rng.child(2)))
    uniforms = rng.child(3).generator().random(batch)
    rows = np.ascontiguousarray(v[:, 0, :])
    jperm, jsign = symplectic_pairing(dim if dim % 2 == 0 else dim + 1)
    herm = (obs + obs.conj().T) / 2

    cases = []
    for backend in ("numpy", "numba"):
        os.environ[BACKEND_ENV_VAR] = backend
        try:
            kern = get_kernels()
        except RuntimeError as exc:
            print(f"skipping backend {backend}: {exc}")
            continue
        probs = kern.born_probs(v, rho)
        timings = {
            "born_probs": _time(lambda: kern.born_probs(v, rho), repeats),
            "choose_outcomes": _time(lambda: kern.choose_outcomes(probs, uniforms), repeats),
            "row_quadratic": _time(lambda: kern.row_quadratic(rows, obs), repeats),
            "proj_unitary": _time(lambda: kern.proj_unitary(v), repeats),
            "proj_orthogonal": _time(lambda: kern.proj_orthogonal(v), repeats),
            "twirl1_accum": _time(lambda: kern.twirl1_accum(v, herm), repeats),
            "pipeline(16k shots)": _time(
                lambda: shadow_estimates(spec, rho, obs, 16384, rng=RngStream(7)), repeats
            ),
        }
        if dim % 2 == 0:
            vsp = np.ascontiguousarray(
                sample_point(make_space("SP", dim), rng.child(4), size=batch),
                dtype=np.complex128,
            )
            timings["proj_symplectic"] = _time(
                lambda: kern.proj_symplectic(vsp, jperm, jsign), repeats
            )
        cases.append((backend, timings))

    os.environ.pop(BACKEND_ENV_VAR, None)
    if len(cases) < 2:
        print("only one backend available; no comparison")
        for backend, timings in cases:
            for name, t in timings.items():
                print(f"{backend:6s} {name:22s} {t * 1e3:9.3f} ms")
        return
    (name_a, base), (name_b, fast) = cases
    width = max(len(k) for k in base)
    print(f"dim={dim} batch={batch} (best of {repeats})")
    print(f"{'kernel':{width}s} {name_a:>12s} {name_b:>12s} {'speedup':>9s}")
    for key in base:
        ta, tb = base[key], fast[key]
        print(f"{key:{width}s} {ta * 1e3:10.3f}ms {tb * 1e3:10.3f}ms {ta / tb:8.2f}x")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--dim", type=int, default=16)
    parser.add_argument("--batch", type=int, default=4096)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()
    run(args.dim, args.batch, args.repeats)


if __name__ == "__main__":
    main()

"""Backend micro-benchmark: compiled kernel vs pure-numpy fallback.

Runs the same solves on synthetic block graphs under both kernel backends
and prints wall-clock times side by side. Invoke as ``python -m l1ppr.bench``.
The first compiled-backend solve includes JIT compilation; a warmup solve is
done outside the timed region so the numbers compare steady-state work.
"""

from __future__ import annotations

import argparse
import os
import time

from .kernels import BACKEND_ENV_VAR, HAS_NUMBA
from .objective import ProblemParams
from .solver import SolverConfig, solve
from .synth import SynthParams, generate


def _time_solve(g, p, cfg, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        solve(g, p, cfg)
        best = min(best, time.perf_counter() - t0)
    return best


def run_benchmark(
    exterior_sizes: tuple[int, ...] = (1000, 4000, 16000),
    alpha: float = 0.2,
    rho: float = 1e-4,
    eps: float = 1e-8,
    repeats: int = 3,
) -> list[dict]:
    backends = ["numpy"] + (["numba"] if HAS_NUMBA else [])
    rows = []
    saved = os.environ.get(BACKEND_ENV_VAR)
    try:
        for ext in exterior_sizes:
            params = SynthParams(exterior_size=ext, deg_ext=min(998, ext - 1))
            g, _ = generate(params)
            p = ProblemParams(alpha=alpha, rho=rho, seed=0, reg_factor=1)
            cfg = SolverConfig(method="fista", eps=eps)
            row = {"n": g.n, "edges": g.edge_count}
            for backend in backends:
                os.environ[BACKEND_ENV_VAR] = backend
                solve(g, p, cfg)  # warmup (JIT compile / cache load)
                row[backend] = _time_solve(g, p, cfg, repeats)
            rows.append(row)
    finally:
        if saved is None:
            os.environ.pop(BACKEND_ENV_VAR, None)
        else:
            os.environ[BACKEND_ENV_VAR] = saved
    return rows


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(description="compare kernel backends")
    ap.add_argument("--exterior-sizes", default="1000,4000,16000")
    ap.add_argument("--alpha", type=float, default=0.2)
    ap.add_argument("--rho", type=float, default=1e-4)
    ap.add_argument("--eps", type=float, default=1e-8)
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args(argv)
    sizes = tuple(int(s) for s in args.exterior_sizes.split(","))
    if not HAS_NUMBA:
        print("numba not installed; timing the numpy backend only")
    rows = run_benchmark(sizes, args.alpha, args.rho, args.eps, args.repeats)
    header = f"{'n':>8} {'edges':>10} {'numpy [s]':>12}"
    if HAS_NUMBA:
        header += f" {'numba [s]':>12} {'speedup':>8}"
    print(header)
    for row in rows:
        line = f"{row['n']:>8} {row['edges']:>10} {row['numpy']:>12.4f}"
        if HAS_NUMBA:
            line += f" {row['numba']:>12.4f} {row['numpy'] / row['numba']:>8.2f}"
        print(line)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

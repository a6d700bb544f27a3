"""Parameter-sweep harness and CSV emission.

A sweep walks one axis (rho, alpha, epsilon, or boundary_size), runs both
solver methods for every (grid value, seed node) pair under an otherwise
identical setup, and collects one flat row per run. Everything is
deterministic: fresh per-point graphs draw their generator seeds from a
stable hash of (base_rng_seed, point index), and rerunning a spec produces a
byte-identical CSV.

Solver errors inside a run are recorded as a converged=false row plus an
entry in ``SweepResult.errors`` (so callers can distinguish "errored" from
"merely hit the iteration cap"); they never abort the sweep.
"""

from __future__ import annotations

import hashlib
import math
import warnings
from dataclasses import dataclass, replace
from typing import IO, Iterable, Sequence

import numpy as np

from .graph import Graph, NodeSet, parse_snap_edgelist, volume
from .objective import ProblemParams
from .solver import NumericalDivergenceError, SolverConfig, solve
from .synth import RegionPartition, SynthParams, generate, generate_alpha_sweep_instance

__all__ = [
    "SWEEP_AXES",
    "CSV_HEADER",
    "SweepSpec",
    "SweepRow",
    "SweepError",
    "SweepResult",
    "AggregateRow",
    "TradeoffRow",
    "AutotuneResult",
    "log_grid",
    "derive_rng_seed",
    "load_edgelist",
    "sample_seeds",
    "run_sweep",
    "aggregate",
    "tradeoff_ratios",
    "write_rows_csv",
    "autotune",
]

SWEEP_AXES = ("rho", "alpha", "epsilon", "boundary_size")
METHODS = ("ista", "fista")

CSV_HEADER = (
    "axis,value,method,seed,iters,total_work,converged,residual,"
    "vol_supp,spurious_vol,work_per_iter"
)


def log_grid(lo: float, hi: float, count: int) -> tuple[float, ...]:
    """Log-spaced grid endpoints included; lo must be positive."""
    if count < 1:
        raise ValueError("count must be at least 1")
    if lo <= 0.0:
        raise ValueError("log spacing requires lo > 0")
    return tuple(float(v) for v in np.geomspace(lo, hi, count))


def derive_rng_seed(base_rng_seed: int, point_index: int) -> int:
    """Stable per-point generator seed: first 8 bytes of sha256("base:index")."""
    digest = hashlib.sha256(f"{base_rng_seed}:{point_index}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def load_edgelist(path: str, max_nodes: int | None = None):
    """Parse a whitespace edge list, optionally truncated for smoke tests.

    With ``max_nodes`` set, only the first ``max_nodes`` distinct node ids in
    file order are kept, and edges touching any later id are dropped.
    """
    if max_nodes is None:
        with open(path, "r", encoding="utf-8") as fh:
            return parse_snap_edgelist(fh)
    kept: dict[int, None] = {}
    lines: list[str] = []
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                lines.append(line)  # let the parser produce its usual error
                continue
            u, v = int(parts[0]), int(parts[1])
            for node in (u, v):
                if node not in kept and len(kept) < max_nodes:
                    kept[node] = None
            if u in kept and v in kept:
                lines.append(line)
    return parse_snap_edgelist(iter(lines))


def sample_seeds(g: Graph, k: int, rng_seed: int) -> NodeSet:
    """k distinct nodes, uniform without replacement, fixed by rng_seed."""
    if k > g.n:
        raise ValueError(f"cannot sample {k} seeds from {g.n} nodes")
    if k < 0:
        raise ValueError("k must be non-negative")
    rng = np.random.default_rng(rng_seed)
    return NodeSet(rng.choice(g.n, size=k, replace=False))


@dataclass(frozen=True)
class SweepSpec:
    """One sweep: an axis, its grid, and everything held fixed."""

    sweep_axis: str
    grid: tuple[float, ...]
    alpha: float = 0.20
    rho: float = 1e-4
    eps: float = 1e-6
    reg_factor: int = 1
    synth: SynthParams | None = None
    edgelist_path: str | None = None
    max_nodes: int | None = None
    seeds: tuple[int, ...] | None = (0,)
    seed_count: int = 1
    per_point_fresh_graph: bool = False
    base_rng_seed: int = 0
    max_iter: int = 50000

    def __post_init__(self) -> None:
        if self.sweep_axis not in SWEEP_AXES:
            raise ValueError(f"sweep_axis must be one of {SWEEP_AXES}, got {self.sweep_axis!r}")
        if not self.grid:
            raise ValueError("grid must be nonempty")
        if (self.synth is None) == (self.edgelist_path is None):
            raise ValueError("exactly one of synth params or edgelist_path required")
        if self.sweep_axis == "boundary_size" and self.synth is None:
            raise ValueError("boundary_size sweeps require a synthetic graph source")
        if self.per_point_fresh_graph and self.synth is None:
            raise ValueError("fresh per-point graphs require a synthetic graph source")
        if self.sweep_axis in ("rho", "epsilon") and min(self.grid) <= 0.0:
            raise ValueError(f"{self.sweep_axis} grid values must be positive")
        if self.sweep_axis == "alpha" and not all(0.0 < v <= 1.0 for v in self.grid):
            raise ValueError("alpha grid values must lie in (0, 1]")


@dataclass(frozen=True)
class SweepRow:
    axis: str
    value: float
    method: str
    seed: int
    iters: int
    total_work: int
    converged: bool
    residual: float
    vol_supp: int
    spurious_vol: int
    work_per_iter: float


@dataclass(frozen=True)
class SweepError:
    value: float
    method: str
    seed: int
    message: str


@dataclass(frozen=True)
class SweepResult:
    rows: tuple[SweepRow, ...]
    errors: tuple[SweepError, ...]


def _prepare_points(spec: SweepSpec) -> list[tuple[float, Graph, RegionPartition | None]]:
    if spec.edgelist_path is not None:
        g, _ = load_edgelist(spec.edgelist_path, spec.max_nodes)
        return [(float(v), g, None) for v in spec.grid]
    out = []
    cached: tuple[Graph, RegionPartition] | None = None
    for idx, v in enumerate(spec.grid):
        sp = spec.synth
        if spec.sweep_axis == "boundary_size":
            sp = replace(sp, boundary_size=int(v))
        if spec.per_point_fresh_graph:
            sp = replace(sp, rng_seed=derive_rng_seed(spec.base_rng_seed, idx))
            g, part = generate(sp)
        elif spec.sweep_axis == "boundary_size":
            g, part = generate(sp)
        else:
            if cached is None:
                cached = generate(sp)
            g, part = cached
        out.append((float(v), g, part))
    return out


def run_sweep(spec: SweepSpec) -> SweepResult:
    """Run both methods over the grid x seed set; deterministic given spec."""
    points = _prepare_points(spec)
    if spec.seeds is not None:
        seeds = tuple(int(s) for s in spec.seeds)
    else:
        seeds = tuple(int(s) for s in sample_seeds(points[0][1], spec.seed_count, spec.base_rng_seed).ids)
    rows: list[SweepRow] = []
    errors: list[SweepError] = []
    for value, g, part in points:
        alpha, rho, eps = spec.alpha, spec.rho, spec.eps
        if spec.sweep_axis == "rho":
            rho = value
        elif spec.sweep_axis == "alpha":
            alpha = value
        elif spec.sweep_axis == "epsilon":
            eps = value
        baseline = part.core if part is not None else None
        for method in METHODS:
            for seed in seeds:
                try:
                    if not (0 <= seed < g.n):
                        raise ValueError(
                            f"seed node {seed} out of range for graph with {g.n} nodes"
                        )
                    p = ProblemParams(alpha=alpha, rho=rho, seed=seed, reg_factor=spec.reg_factor)
                    cfg = SolverConfig(method=method, eps=eps, max_iter=spec.max_iter)
                    sol = solve(g, p, cfg, spurious_baseline=baseline)
                    tr = sol.trace
                    wpi = tr.total_work / tr.iterations if tr.iterations else 0.0
                    rows.append(
                        SweepRow(
                            axis=spec.sweep_axis,
                            value=value,
                            method=method,
                            seed=seed,
                            iters=tr.iterations,
                            total_work=tr.total_work,
                            converged=tr.converged,
                            residual=tr.final_residual,
                            vol_supp=volume(g, sol.support),
                            spurious_vol=tr.spurious_total,
                            work_per_iter=wpi,
                        )
                    )
                except (ValueError, NumericalDivergenceError) as exc:
                    errors.append(SweepError(value, method, seed, str(exc)))
                    rows.append(
                        SweepRow(
                            axis=spec.sweep_axis,
                            value=value,
                            method=method,
                            seed=seed,
                            iters=0,
                            total_work=0,
                            converged=False,
                            residual=float("nan"),
                            vol_supp=0,
                            spurious_vol=0,
                            work_per_iter=0.0,
                        )
                    )
    rows.sort(key=lambda r: (r.value, r.method, r.seed))
    return SweepResult(tuple(rows), tuple(errors))


def _nearest_rank(sorted_vals: Sequence[float], pct: float) -> float:
    rank = max(1, math.ceil(pct / 100.0 * len(sorted_vals)))
    return sorted_vals[rank - 1]


@dataclass(frozen=True)
class AggregateRow:
    axis: str
    value: float
    method: str
    n: int
    mean_work: float
    p25_work: float
    p75_work: float
    mean_iters: float


def aggregate(rows: Iterable[SweepRow]) -> list[AggregateRow]:
    """Per (value, method) summary of total_work: mean plus nearest-rank
    25th/75th percentiles, and the mean iteration count."""
    groups: dict[tuple[float, str], list[SweepRow]] = {}
    axis = None
    for r in rows:
        axis = r.axis
        groups.setdefault((r.value, r.method), []).append(r)
    out = []
    for (value, method), rs in sorted(groups.items()):
        works = sorted(float(r.total_work) for r in rs)
        out.append(
            AggregateRow(
                axis=axis,
                value=value,
                method=method,
                n=len(rs),
                mean_work=sum(works) / len(works),
                p25_work=_nearest_rank(works, 25.0),
                p75_work=_nearest_rank(works, 75.0),
                mean_iters=sum(r.iters for r in rs) / len(rs),
            )
        )
    return out


@dataclass(frozen=True)
class TradeoffRow:
    value: float
    seed: int
    iter_ratio: float
    per_iter_ratio: float
    work_ratio: float


def tradeoff_ratios(rows: Iterable[SweepRow]) -> list[TradeoffRow]:
    """Per (value, seed) decomposition of the accelerated/plain work ratio
    into an iteration-count ratio times a per-iteration-work ratio.

    Pairs with a missing counterpart or a zero-iteration run are skipped with
    a warning. The identity work_ratio = iter_ratio * per_iter_ratio is
    checked to 1e-12 relative.
    """
    by_key: dict[tuple[float, int, str], SweepRow] = {}
    for r in rows:
        by_key[(r.value, r.seed, r.method)] = r
    pairs = sorted({(v, s) for (v, s, _) in by_key})
    out = []
    for value, seed in pairs:
        ri = by_key.get((value, seed, "ista"))
        rf = by_key.get((value, seed, "fista"))
        if ri is None or rf is None:
            warnings.warn(f"unmatched methods at value={value}, seed={seed}; skipping")
            continue
        if ri.iters == 0 or rf.iters == 0 or ri.total_work == 0:
            warnings.warn(
                f"degenerate run at value={value}, seed={seed} (zero iterations or work); skipping"
            )
            continue
        iter_ratio = rf.iters / ri.iters
        per_iter_ratio = (rf.total_work / rf.iters) / (ri.total_work / ri.iters)
        work_ratio = rf.total_work / ri.total_work
        if abs(work_ratio - iter_ratio * per_iter_ratio) > 1e-12 * abs(work_ratio):
            raise AssertionError(
                f"ratio identity broken at value={value}, seed={seed}"
            )
        out.append(TradeoffRow(value, seed, iter_ratio, per_iter_ratio, work_ratio))
    return out


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def write_rows_csv(rows: Iterable[SweepRow], out: IO[str]) -> None:
    """Fixed-header CSV, rows sorted by (value, method, seed), floats at 12
    significant digits; byte-identical across reruns of the same spec."""
    out.write(CSV_HEADER + "\n")
    for r in sorted(rows, key=lambda r: (r.value, r.method, r.seed)):
        out.write(
            ",".join(
                [
                    r.axis,
                    _fmt(r.value),
                    r.method,
                    str(r.seed),
                    str(r.iters),
                    str(r.total_work),
                    "true" if r.converged else "false",
                    _fmt(r.residual),
                    str(r.vol_supp),
                    str(r.spurious_vol),
                    _fmt(r.work_per_iter),
                ]
            )
            + "\n"
        )


@dataclass(frozen=True)
class AutotuneResult:
    best: tuple[int, int, int]
    score: float
    scores: tuple[float, ...]


def autotune(
    base: SynthParams,
    candidates: Sequence[tuple[int, int, int]],
    alpha_min: float,
    rho: float = 1e-4,
    eps: float = 1e-6,
    reg_factor: int = 1,
    ext_cap: int = 2048,
    max_iter: int = 50000,
) -> AutotuneResult:
    """Pick the (c_bnd, deg_b, m_ext_edges) candidate whose teleportation
    sweep most often makes the accelerated method do more work than the
    plain one.

    Each candidate is scored on 12 log-spaced alpha values in
    [alpha_min, 0.9]: the score is the fraction of points with
    FISTA total_work > ISTA total_work. Ties break toward the earliest
    candidate in the given order.
    """
    if not candidates:
        raise ValueError("candidates must be nonempty")
    alphas = log_grid(alpha_min, 0.9, 12)
    scores = []
    best_idx = 0
    for idx, (c_bnd, deg_b, m_ext) in enumerate(candidates):
        params = replace(base, c_bnd=c_bnd, deg_b=deg_b)
        g, _ = generate_alpha_sweep_instance(params, m_ext, alpha_min, rho, ext_cap)
        wins = 0
        for a in alphas:
            p = ProblemParams(alpha=a, rho=rho, seed=0, reg_factor=reg_factor)
            w = {}
            for method in METHODS:
                cfg = SolverConfig(method=method, eps=eps, max_iter=max_iter)
                w[method] = solve(g, p, cfg).trace.total_work
            if w["fista"] > w["ista"]:
                wins += 1
        score = wins / len(alphas)
        scores.append(score)
        if score > scores[best_idx]:
            best_idx = idx
    return AutotuneResult(tuple(candidates[best_idx]), scores[best_idx], tuple(scores))

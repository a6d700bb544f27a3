"""Command-line frontend.

Subcommands are thin wrappers over the library, with no numeric logic of
their own:

* ``gen``      — write a synthetic block graph as a SNAP-style edge list plus
                 a ``node,region`` partition sidecar;
* ``solve``    — run one solve on an edge-list graph and print a summary;
* ``check``    — evaluate the no-percolation condition for a core set;
* ``sweep``    — run a sweep described by a key=value spec file, write CSV;
* ``analytic`` — compare the closed-form star/path solutions and slacks
                 against the solver.

Exit codes: 0 success, 1 condition violated (check) or errored sweep runs,
2 usage/input error, 3 iteration cap hit. All floats print with 12
significant digits so outputs diff cleanly.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .diagnostics import check_no_percolation, slacks
from .graph import NodeSet, volume
from .objective import ProblemParams
from .solver import SolverConfig, solve
from .sweep import SweepSpec, load_edgelist, run_sweep, write_rows_csv
from .synth import SynthParams, generate, path_instance, star_instance

__all__ = ["main"]


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def _fail(msg: str, code: int = 2) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return code


def _load_graph(path: str, max_nodes: int | None = None):
    try:
        return load_edgelist(path, max_nodes)
    except OSError as exc:
        raise ValueError(f"cannot read graph file: {exc}") from exc


def _map_original_ids(remap: np.ndarray, nodes: list[int], what: str) -> list[int]:
    """Translate original edge-list ids to compact graph ids."""
    lookup = {int(orig): new for new, orig in enumerate(remap.tolist())}
    out = []
    for node in nodes:
        if node not in lookup:
            raise ValueError(f"{what} {node} not present in the graph")
        out.append(lookup[node])
    return out


# ---------------------------------------------------------------- gen

def _cmd_gen(args: argparse.Namespace) -> int:
    try:
        params = SynthParams(
            core_size=args.core_size,
            boundary_size=args.boundary_size,
            exterior_size=args.exterior_size,
            c_bnd=args.c_bnd,
            deg_b=args.deg_b,
            deg_ext=args.deg_ext,
            core_density=args.core_density,
            rng_seed=args.rng_seed,
        )
        g, part = generate(params)
    except ValueError as exc:
        return _fail(str(exc))
    partition_path = args.partition_out or args.out + ".partition.csv"
    try:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(f"# synthetic block graph: nodes={g.n} edges={g.edge_count}\n")
            fh.write(
                f"# core={params.core_size} boundary={params.boundary_size} "
                f"exterior={params.exterior_size}\n"
            )
            for u, v in g.iter_edges():
                fh.write(f"{u}\t{v}\n")
        with open(partition_path, "w", encoding="utf-8") as fh:
            fh.write("node,region\n")
            for name, ns in (("core", part.core), ("boundary", part.boundary), ("exterior", part.exterior)):
                for node in ns.ids.tolist():
                    fh.write(f"{node},{name}\n")
    except OSError as exc:
        return _fail(f"cannot write output: {exc}")
    print(f"wrote {g.n} nodes, {g.edge_count} edges to {args.out}")
    print(f"wrote partition to {partition_path}")
    return 0


# ---------------------------------------------------------------- solve

def _cmd_solve(args: argparse.Namespace) -> int:
    try:
        g, remap = _load_graph(args.graph, args.max_nodes)
        (seed,) = _map_original_ids(remap, [args.seed_node], "seed node")
        p = ProblemParams(alpha=args.alpha, rho=args.rho, seed=seed, reg_factor=args.reg_factor)
        cfg = SolverConfig(
            method=args.method,
            eps=args.eps,
            max_iter=args.max_iter,
            trace_level="full" if args.trace else "summary",
        )
    except ValueError as exc:
        return _fail(str(exc))
    sol = solve(g, p, cfg)
    tr = sol.trace
    print(
        f"method={args.method} alpha={_fmt(args.alpha)} rho={_fmt(args.rho)} "
        f"reg_factor={args.reg_factor} seed={args.seed_node}"
    )
    print(f"converged={'true' if tr.converged else 'false'} iterations={tr.iterations} total_work={tr.total_work}")
    print(f"residual={_fmt(tr.final_residual)}")
    print(f"support_size={len(sol.support)} support_volume={volume(g, sol.support)}")
    if args.trace:
        with open(args.trace, "w", encoding="utf-8") as fh:
            fh.write("k,vol_supp_y,vol_supp_x,work,residual,spurious_vol\n")
            for rec in tr.records:
                fh.write(
                    f"{rec.k},{rec.vol_supp_y},{rec.vol_supp_x_next},{rec.work},"
                    f"{_fmt(rec.residual)},{rec.spurious_vol}\n"
                )
    if args.solution_out:
        with open(args.solution_out, "w", encoding="utf-8") as fh:
            fh.write("node,value\n")
            for i, xi in sol.x.items():
                fh.write(f"{remap[i]},{_fmt(xi)}\n")
    return 0 if tr.converged else 3


# ---------------------------------------------------------------- check

def _read_core_set(path: str) -> list[int]:
    """Node ids, one per line; also accepts a node,region partition CSV
    (keeps the rows labeled core)."""
    nodes: list[int] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#") or line == "node,region":
                continue
            if "," in line:
                node_s, region = line.split(",", 1)
                if region.strip() == "core":
                    nodes.append(int(node_s))
                continue
            try:
                nodes.append(int(line))
            except ValueError as exc:
                raise ValueError(f"core-set file line {lineno}: not a node id: {line!r}") from exc
    return nodes


def _cmd_check(args: argparse.Namespace) -> int:
    try:
        g, remap = _load_graph(args.graph, args.max_nodes)
        core_orig = _read_core_set(args.core_set)
        core = NodeSet(_map_original_ids(remap, core_orig, "core node"))
        p = ProblemParams(alpha=args.alpha, rho=args.rho, seed=0, reg_factor=args.reg_factor)
    except (OSError, ValueError) as exc:
        return _fail(str(exc))
    if len(core) == 0:
        print("warning: empty core set; boundary is empty and the condition holds vacuously", file=sys.stderr)
    report = check_no_percolation(g, p, core)
    print(f"holds={'true' if report.holds else 'false'}")
    worst = "none" if report.worst_node is None else str(int(remap[report.worst_node]))
    print(f"worst_node={worst}")
    print(f"worst_ratio={_fmt(report.worst_ratio)}")
    return 0 if report.holds else 1


# ---------------------------------------------------------------- sweep

_SYNTH_KEYS = {
    "core_size": int,
    "boundary_size": int,
    "exterior_size": int,
    "c_bnd": int,
    "deg_b": int,
    "deg_ext": int,
    "core_density": float,
    "rng_seed": int,
}

_SPEC_KEYS = {
    "axis": str,
    "grid": str,
    "grid_log": str,
    "alpha": float,
    "rho": float,
    "eps": float,
    "reg_factor": int,
    "edgelist_path": str,
    "max_nodes": int,
    "seeds": str,
    "seed_count": int,
    "per_point_fresh_graph": str,
    "base_rng_seed": int,
    "max_iter": int,
}


def _parse_config(path: str) -> dict[str, str]:
    out: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"spec line {lineno}: expected key = value, got {line!r}")
            key, _, value = line.partition("=")
            key = key.strip()
            value = value.strip()
            if key in out:
                raise ValueError(f"spec line {lineno}: duplicate key {key!r}")
            out[key] = value
    return out


def _parse_bool(value: str) -> bool:
    low = value.lower()
    if low in ("true", "1", "yes"):
        return True
    if low in ("false", "0", "no"):
        return False
    raise ValueError(f"expected a boolean, got {value!r}")


def _spec_from_config(raw: dict[str, str]) -> SweepSpec:
    unknown = set(raw) - set(_SPEC_KEYS) - set(_SYNTH_KEYS)
    if unknown:
        raise ValueError(f"unknown spec keys: {sorted(unknown)}")
    if "axis" not in raw:
        raise ValueError("spec must set axis")
    if ("grid" in raw) == ("grid_log" in raw):
        raise ValueError("spec must set exactly one of grid, grid_log")
    if "grid" in raw:
        grid = tuple(float(v) for v in raw["grid"].split(","))
    else:
        from .sweep import log_grid

        lo_s, hi_s, count_s = (s.strip() for s in raw["grid_log"].split(","))
        grid = log_grid(float(lo_s), float(hi_s), int(count_s))
    kwargs = {"sweep_axis": raw["axis"], "grid": grid}
    for key in ("alpha", "rho", "eps"):
        if key in raw:
            kwargs[key] = float(raw[key])
    for key in ("reg_factor", "max_nodes", "seed_count", "base_rng_seed", "max_iter"):
        if key in raw:
            kwargs[key] = int(raw[key])
    if "per_point_fresh_graph" in raw:
        kwargs["per_point_fresh_graph"] = _parse_bool(raw["per_point_fresh_graph"])
    if "seeds" in raw:
        kwargs["seeds"] = tuple(int(v) for v in raw["seeds"].split(","))
    elif "seed_count" in raw:
        kwargs["seeds"] = None
    if "edgelist_path" in raw:
        kwargs["edgelist_path"] = raw["edgelist_path"]
    else:
        synth_kwargs = {k: conv(raw[k]) for k, conv in _SYNTH_KEYS.items() if k in raw}
        kwargs["synth"] = SynthParams(**synth_kwargs)
    return SweepSpec(**kwargs)


def _cmd_sweep(args: argparse.Namespace) -> int:
    try:
        spec = _spec_from_config(_parse_config(args.spec))
    except (OSError, ValueError) as exc:
        return _fail(str(exc))
    try:
        result = run_sweep(spec)
    except (OSError, ValueError) as exc:
        return _fail(str(exc))
    try:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            write_rows_csv(result.rows, fh)
    except OSError as exc:
        return _fail(f"cannot write CSV: {exc}")
    print(f"wrote {len(result.rows)} rows to {args.out}")
    if result.errors:
        for err in result.errors:
            print(
                f"run error at value={_fmt(err.value)} method={err.method} "
                f"seed={err.seed}: {err.message}",
                file=sys.stderr,
            )
        return 1
    return 0


# ---------------------------------------------------------------- analytic

def _cmd_analytic(args: argparse.Namespace) -> int:
    try:
        inst = star_instance(args.m) if args.family == "star" else path_instance(args.m)
        x_formula = inst.solution_formula(args.alpha, args.rho)
        gamma_formula = inst.slack_formula(args.alpha, args.rho)
    except ValueError as exc:
        return _fail(str(exc))
    g = inst.graph
    p = ProblemParams(alpha=args.alpha, rho=args.rho, seed=inst.seed, reg_factor=1)
    # plain iteration identifies the support exactly even at the breakpoint,
    # where momentum leaves dust on the zero-slack nodes
    cfg = SolverConfig(method="ista", eps=args.eps, max_iter=200000)
    sol = solve(g, p, cfg)
    report = slacks(g, p, sol.x)
    lo, hi = inst.valid_interval(args.alpha)
    print(f"family={inst.family} m={inst.m} alpha={_fmt(args.alpha)} rho={_fmt(args.rho)}")
    print(f"validity_interval=[{_fmt(lo)}, {_fmt(hi)})")
    print("node,x_closed_form,x_solver")
    x_dev = 0.0
    for node in sorted(set(x_formula.support()) | set(sol.x.support())):
        a = x_formula.get(node)
        b = sol.x.get(node)
        x_dev = max(x_dev, abs(a - b))
        print(f"{node},{_fmt(a)},{_fmt(b)}")
    print(f"max_x_deviation={_fmt(x_dev)}")
    print("node,gamma_closed_form,gamma_solver")
    g_dev = 0.0
    for node in sorted(gamma_formula):
        a = gamma_formula[node]
        b = report.slack_at(node)
        g_dev = max(g_dev, abs(a - b))
        print(f"{node},{_fmt(a)},{_fmt(b)}")
    print(f"max_slack_deviation={_fmt(g_dev)}")
    return 0


# ---------------------------------------------------------------- parser

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="l1ppr",
        description="Sparse personalized-PageRank solves, diagnostics, and sweeps.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a synthetic block graph")
    gen.add_argument("--core-size", type=int, default=60)
    gen.add_argument("--boundary-size", type=int, default=600)
    gen.add_argument("--exterior-size", type=int, default=1000)
    gen.add_argument("--c-bnd", type=int, default=20)
    gen.add_argument("--deg-b", type=int, default=82)
    gen.add_argument("--deg-ext", type=int, default=998)
    gen.add_argument("--core-density", type=float, default=1.0)
    gen.add_argument("--rng-seed", type=int, default=0)
    gen.add_argument("--out", required=True)
    gen.add_argument("--partition-out", default=None)
    gen.set_defaults(func=_cmd_gen)

    slv = sub.add_parser("solve", help="solve one problem on an edge-list graph")
    slv.add_argument("graph")
    slv.add_argument("--alpha", type=float, required=True)
    slv.add_argument("--rho", type=float, required=True)
    slv.add_argument("--eps", type=float, default=1e-6)
    slv.add_argument("--method", choices=("ista", "fista"), default="fista")
    slv.add_argument("--seed-node", type=int, required=True)
    slv.add_argument("--reg-factor", type=int, choices=(1, 2), default=1)
    slv.add_argument("--max-iter", type=int, default=50000)
    slv.add_argument("--max-nodes", type=int, default=None)
    slv.add_argument("--trace", default=None, help="write per-iteration CSV here")
    slv.add_argument("--solution-out", default=None, help="write node,value CSV here")
    slv.set_defaults(func=_cmd_solve)

    chk = sub.add_parser("check", help="no-percolation condition for a core set")
    chk.add_argument("graph")
    chk.add_argument("--core-set", required=True)
    chk.add_argument("--alpha", type=float, required=True)
    chk.add_argument("--rho", type=float, required=True)
    chk.add_argument("--reg-factor", type=int, choices=(1, 2), default=2)
    chk.add_argument("--max-nodes", type=int, default=None)
    chk.set_defaults(func=_cmd_check)

    swp = sub.add_parser("sweep", help="run a sweep from a key=value spec file")
    swp.add_argument("spec")
    swp.add_argument("--out", required=True)
    swp.set_defaults(func=_cmd_sweep)

    ana = sub.add_parser("analytic", help="closed form vs solver on star/path")
    ana.add_argument("--family", choices=("star", "path"), required=True)
    ana.add_argument("--m", type=int, required=True)
    ana.add_argument("--alpha", type=float, required=True)
    ana.add_argument("--rho", type=float, required=True)
    ana.add_argument("--eps", type=float, default=1e-12)
    ana.set_defaults(func=_cmd_analytic)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

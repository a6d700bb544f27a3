"""Optimality-slack and locality diagnostics.

Everything in here interrogates a solved problem or a running trace:

* ``slacks`` reports the degree-normalized distance of each inactive node
  from its activation threshold (gamma_i = (lambda_i - |grad_i|) / sqrt(d_i)),
  after verifying the supplied point actually satisfies the KKT conditions;
* ``two_tier_split`` solves the problem at the base penalty and at twice the
  base penalty and checks that the low-slack inactive nodes of the heavier
  problem are active in the lighter one;
* ``check_no_percolation`` evaluates, for every exterior node, the exposure
  inequality that certifies iterate supports stay inside S and its boundary;
* ``verify_confinement`` replays a full trace against a candidate set and
  ledgers every escape plus the spurious volume relative to that set;
* ``degree_cutoff`` gives the degree above which an (A)-inactive node can
  never activate under the doubled penalty;
* ``jump_audit`` re-derives, for every spurious activation in a trace, the
  strict jump inequality that any such activation must satisfy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from .graph import Graph, NodeSet, exterior, vertex_boundary
from .objective import ProblemParams, SparseVector, forward_map, gradient
from .solver import SolveTrace, SolverConfig, solve

__all__ = [
    "SlackReport",
    "TwoTierSplit",
    "NoPercolationReport",
    "ConfinementReport",
    "JumpViolation",
    "slacks",
    "two_tier_split",
    "check_no_percolation",
    "verify_confinement",
    "degree_cutoff",
    "conservative_degree_cutoff",
    "jump_audit",
]


@dataclass(frozen=True)
class SlackReport:
    """Degree-normalized activation slacks of the inactive nodes.

    ``gamma`` holds the explicitly computed entries (nodes with a nonzero
    gradient, i.e. within one hop of the support or the seed). Every other
    inactive node has a zero gradient, hence slack exactly ``far_slack``
    (= reg_factor * alpha * rho); they are only counted, not stored.
    ``threshold`` is alpha * rho at the base penalty, splitting the inactive
    nodes into ``i_small`` (slack below it) and the stored part of the rest.
    """

    active: NodeSet
    gamma: dict[int, float]
    far_slack: float
    far_count: int
    min_slack: float
    threshold: float
    i_small: NodeSet
    i_large_near: NodeSet

    def slack_at(self, i: int) -> float:
        if i in self.active:
            raise ValueError(f"node {i} is active; slack is defined for inactive nodes")
        return self.gamma.get(i, self.far_slack)


def slacks(g: Graph, p: ProblemParams, x_star: SparseVector, kkt_tol: float = 1e-6) -> SlackReport:
    """Slack report at ``x_star``; raises if it is not a minimizer.

    Active nodes must sit on their subgradient face (|grad_i + sign(x_i) *
    lambda_i| <= kkt_tol) and inactive ones inside the band
    [-lambda_i - kkt_tol, kkt_tol]; the one-sided upper bound reflects that
    minimizers here are nonnegative.
    """
    grad = gradient(g, p, x_star)
    sd = g.sqrt_degrees
    isd = g.inv_sqrt_degrees
    lvl = p.reg_level
    for i, xi in x_star.items():
        lam = lvl * float(sd[i])
        viol = abs(grad.get(i) + (lam if xi > 0.0 else -lam))
        if viol > kkt_tol:
            raise ValueError(
                f"not a minimizer: active node {i} violates stationarity by {viol:.3e}"
            )
    active_nodes = x_star.support()
    active = NodeSet(active_nodes)
    gamma: dict[int, float] = {}
    for i, gi in grad.items():
        if i in active:
            continue
        lam = lvl * float(sd[i])
        if gi > kkt_tol or gi < -lam - kkt_tol:
            raise ValueError(
                f"not a minimizer: inactive node {i} has gradient {gi:.3e} "
                f"outside [-{lam:.3e} - tol, tol]"
            )
        gamma[i] = lvl - abs(gi) * float(isd[i])
    far_count = g.n - len(active) - len(gamma)
    candidates = list(gamma.values())
    if far_count > 0:
        candidates.append(lvl)
    min_slack = min(candidates) if candidates else math.inf
    thr = p.alpha * p.rho
    i_small = NodeSet([i for i, ga in gamma.items() if ga < thr])
    i_large_near = NodeSet([i for i, ga in gamma.items() if ga >= thr])
    return SlackReport(
        active=active,
        gamma=gamma,
        far_slack=lvl,
        far_count=far_count,
        min_slack=min_slack,
        threshold=thr,
        i_small=i_small,
        i_large_near=i_large_near,
    )


class TwoTierSplit(NamedTuple):
    s_a: NodeSet
    i_small: NodeSet
    i_large: NodeSet
    witness: bool


def two_tier_split(
    g: Graph, p: ProblemParams, eps: float = 1e-11, max_iter: int = 50000
) -> TwoTierSplit:
    """Solve at the base and doubled penalty; split the heavier problem's
    inactive slacks at alpha*rho and check the small-slack set is contained
    in the lighter problem's support.

    ``i_large`` only lists the near nodes (nonzero gradient); all far nodes
    have slack exactly 2*alpha*rho, which is above the threshold whenever
    alpha*rho > 0, so they always belong to the large-slack side and are
    omitted from the returned set.
    """
    cfg = SolverConfig(method="fista", eps=eps, max_iter=max_iter)
    sol_a = solve(g, replace(p, reg_factor=1), cfg)
    sol_b = solve(g, replace(p, reg_factor=2), cfg)
    for tag, sol in (("base", sol_a), ("doubled", sol_b)):
        if not sol.trace.converged:
            raise RuntimeError(
                f"{tag}-penalty solve did not reach eps={eps} within {max_iter} iterations"
            )
    report = slacks(g, replace(p, reg_factor=2), sol_b.x)
    witness = report.i_small.issubset(sol_a.support)
    return TwoTierSplit(sol_a.support, report.i_small, report.i_large_near, witness)


class NoPercolationReport(NamedTuple):
    holds: bool
    worst_node: int | None
    worst_ratio: float


def check_no_percolation(g: Graph, p: ProblemParams, s: NodeSet) -> NoPercolationReport:
    """Exposure inequality over the exterior of ``s``.

    For every node i outside s and its boundary, the fraction of its
    neighbors lying on the boundary must satisfy
    |N(i) ∩ ∂s| / d_i <= (alpha*rho / (2(1-alpha)))^2 * d_i * min_{∂s} d.
    The report carries the largest LHS/RHS ratio; ``holds`` means it is <= 1.
    Degenerate cases: alpha = 1 makes the bound infinite, and an empty
    boundary or exterior leaves nothing to check — all treated as holding.
    """
    if p.alpha >= 1.0:
        return NoPercolationReport(True, None, 0.0)
    bnd = vertex_boundary(g, s)
    if len(bnd) == 0:
        return NoPercolationReport(True, None, 0.0)
    ext = exterior(g, s)
    if len(ext) == 0:
        return NoPercolationReport(True, None, 0.0)
    d_min_bnd = float(g.degrees[bnd.ids].min())
    coef = (p.alpha * p.rho / (2.0 * (1.0 - p.alpha))) ** 2
    bnd_mask = np.zeros(g.n, dtype=bool)
    bnd_mask[bnd.ids] = True
    ext_mask = np.zeros(g.n, dtype=bool)
    ext_mask[ext.ids] = True
    src = np.repeat(np.arange(g.n, dtype=np.int64), np.diff(g.row_offsets))
    sel = ext_mask[src] & bnd_mask[g.neighbors]
    hits = np.bincount(src[sel], minlength=g.n)[ext.ids]
    deg = g.degrees[ext.ids].astype(np.float64)
    ratios = hits / (coef * deg * deg * d_min_bnd)
    w = int(np.argmax(ratios))
    worst_ratio = float(ratios[w])
    worst_node = int(ext.ids[w]) if worst_ratio > 0.0 else None
    return NoPercolationReport(worst_ratio <= 1.0, worst_node, worst_ratio)


@dataclass(frozen=True)
class ConfinementReport:
    """Escape ledger of a full trace against a candidate set.

    ``violations`` maps iteration index k to the nodes of supp(x_{k+1})
    outside s ∪ ∂s; ``confined`` means it is empty. Spurious volume is
    measured against ``s`` itself: vol(supp(x_{k+1}) \\ s) per iteration,
    with its running maximum and total.
    """

    confined: bool
    violations: dict[int, NodeSet]
    max_spurious_vol: int
    cum_spurious_vol: int


def verify_confinement(
    g: Graph, p: ProblemParams, cfg: SolverConfig, s: NodeSet, trace: SolveTrace
) -> ConfinementReport:
    if trace.level != "full":
        raise ValueError("full trace required")
    allowed = np.zeros(g.n, dtype=bool)
    allowed[s.ids] = True
    bnd = vertex_boundary(g, s)
    allowed[bnd.ids] = True
    s_mask = np.zeros(g.n, dtype=bool)
    s_mask[s.ids] = True
    violations: dict[int, NodeSet] = {}
    max_sp = 0
    cum_sp = 0
    for rec in trace.records:
        nodes = rec.x_nodes
        escaped = nodes[~allowed[nodes]]
        if escaped.size:
            violations[rec.k] = NodeSet(escaped)
        spurious = nodes[~s_mask[nodes]]
        vol = int(g.degrees[spurious].sum())
        cum_sp += vol
        max_sp = max(max_sp, vol)
    return ConfinementReport(
        confined=not violations,
        violations=violations,
        max_spurious_vol=max_sp,
        cum_spurious_vol=cum_sp,
    )


def degree_cutoff(alpha: float, rho: float, L: float = 1.0, R: float = math.sqrt(20.0)) -> float:
    """Degree above which an inactive node stays inactive under the doubled
    penalty: (L*R / (alpha*rho))^2, with L a gradient Lipschitz bound and R
    an iterate-radius bound."""
    if alpha <= 0.0 or rho <= 0.0:
        raise ValueError("alpha and rho must be positive")
    return (L * R / (alpha * rho)) ** 2


def conservative_degree_cutoff(alpha: float, rho: float) -> float:
    """Printed constant form 1600 / (alpha*rho)^2, i.e. L <= 1 and R <= 20
    folded into a single pessimistic constant."""
    if alpha <= 0.0 or rho <= 0.0:
        raise ValueError("alpha and rho must be positive")
    return 1600.0 / (alpha * alpha * rho * rho)


@dataclass(frozen=True)
class JumpViolation:
    k: int
    node: int
    lhs: float
    rhs: float


def jump_audit(
    g: Graph,
    p: ProblemParams,
    trace: SolveTrace,
    x_star: SparseVector,
    eta: float = 1.0,
) -> list[JumpViolation]:
    """Check every spurious activation against the strict jump inequality.

    A node i outside supp(x_star) can only enter supp(x_{k+1}) if the
    forward map at y_k moved coordinate i strictly further than
    eta * gamma_i * sqrt(d_i) away from its value at x_star. Returns the
    (expected empty) list of activations that fail this.
    """
    if trace.level != "full":
        raise ValueError("full trace required")
    report = slacks(g, p, x_star)
    u_star = forward_map(g, p, x_star, eta)
    sd = g.sqrt_degrees
    violations: list[JumpViolation] = []
    for rec in trace.records:
        spurious = [i for i in rec.x_nodes.tolist() if i not in report.active]
        if not spurious:
            continue
        y = SparseVector(dict(zip(rec.y_nodes.tolist(), rec.y_vals.tolist())))
        u_y = forward_map(g, p, y, eta)
        for i in spurious:
            lhs = abs(u_y.get(i) - u_star.get(i))
            rhs = eta * report.slack_at(i) * float(sd[i])
            if not lhs > rhs:
                violations.append(JumpViolation(rec.k, i, lhs, rhs))
    return violations

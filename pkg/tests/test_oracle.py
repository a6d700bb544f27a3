"""The reference implementation earns its trust here, against hand values
and basic linear algebra rather than against the library."""

import numpy as np
import pytest

from l1ppr.graph import build_from_edges
from l1ppr.objective import ProblemParams

from oracle import (
    SIZE_CAP,
    build_dense,
    dense_gradient,
    dense_objective,
    dense_solve,
    dense_solve_linear,
    random_connected_graph,
)


def star4():
    g, _ = build_from_edges([(0, k) for k in range(1, 5)])
    return g


def test_spectrum_check_runs_on_random_graphs():
    rng = np.random.default_rng(3)
    for alpha in (0.05, 0.5, 1.0):
        g = random_connected_graph(rng, 30)
        build_dense(g, ProblemParams(alpha, 0.1, 0, 1))  # asserts internally


def test_star_hand_solution():
    dp = build_dense(star4(), ProblemParams(0.5, 0.1, 0, 1))
    x = dense_solve(dp)
    assert np.allclose(x, [0.2, 0, 0, 0, 0], atol=1e-13)
    # fixed point of the iteration map
    nxt = np.sign(x - dense_gradient(dp, x)) * np.maximum(
        np.abs(x - dense_gradient(dp, x)) - dp.tau, 0.0
    )
    assert np.max(np.abs(nxt - x)) <= 1e-13


def test_objective_at_hand_point():
    dp = build_dense(star4(), ProblemParams(0.5, 0.1, 0, 1))
    x = np.array([0.2, 0.0, 0.0, 0.0, 0.0])
    # 0.5*hp*x_c^2 - alpha*isd*x_c + reg*sqrt(d)*x_c
    want = 0.5 * 0.75 * 0.04 - 0.5 * 0.5 * 0.2 + 0.05 * 2.0 * 0.2
    assert dense_objective(dp, x) == pytest.approx(want, abs=1e-15)
    assert dense_objective(dp, np.zeros(5)) == 0.0


def test_unregularized_limit_agrees():
    rng = np.random.default_rng(9)
    g = random_connected_graph(rng, 15)
    p = ProblemParams(0.4, 1e-9, 2, 1)
    dp = build_dense(g, p)
    lin = dense_solve_linear(dp)
    assert np.max(np.abs(dp.q @ lin - dp.b)) <= 1e-12
    assert np.all(lin > 0)  # diffusion mass reaches every node when connected
    x = dense_solve(dp, tol=1e-13)
    assert np.max(np.abs(x - lin)) <= 1e-5


def test_dense_solve_iteration_cap():
    dp = build_dense(star4(), ProblemParams(0.5, 0.01, 0, 1))
    with pytest.raises(RuntimeError, match="did not reach"):
        dense_solve(dp, tol=1e-16, cap=2)


def test_size_cap_enforced():
    rng = np.random.default_rng(1)
    g = random_connected_graph(rng, SIZE_CAP + 1, extra_edges=0)
    with pytest.raises(ValueError, match="capped"):
        build_dense(g, ProblemParams(0.5, 0.1, 0, 1))

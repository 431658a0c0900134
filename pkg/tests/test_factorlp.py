from fractions import Fraction as F

import pytest

from rentmatch.factorlp import (FAMILIES, ConstraintPoint, analytic_params, check_grid, constraint_residuals,
                                solve_factor_lp)

P = analytic_params(F(1, 32))


def _res(point):
    return constraint_residuals(P.Gamma, P.beta1, P.beta2, P.gamma, ConstraintPoint(F(point[0]), F(point[1])))


def test_analytic_values():
    assert (P.Gamma, P.beta1, P.beta2) == (F(50, 99), F(50, 99), F(16, 33))
    z = analytic_params(0)
    assert (z.Gamma, z.beta1, z.beta2) == (F(1, 2), F(1, 2), F(1, 2))
    with pytest.raises(ValueError):
        analytic_params(F(2))


def test_residuals_at_corner():
    res = _res((1, 1))
    assert res["deterministic_in_query"] == 0
    assert res["random_in_query"] == F(49, 66) - F(50, 99)
    assert res["fresh_outside"] == 0
    assert set(res) == set(FAMILIES)


def test_point_validation():
    with pytest.raises(ValueError):
        _res((F(1, 4), F(1, 2)))


def test_exact_residuals_nonnegative_on_rational_grid():
    n = 40
    for a in range(n + 1):
        for b in range(a + 1):
            assert min(_res((F(a, n), F(b, n))).values()) >= 0


def test_grid_and_refinement():
    g = check_grid(P, 0.005)
    assert g.feasible() and g.num_points == 201 * 202 // 2
    assert "deterministic_in_query" in g.tight_families()


def test_factor_lp_values_and_monotonicity():
    fine = solve_factor_lp(F(1, 32), 0.01)
    coarse = solve_factor_lp(F(1, 32), 0.02)
    zero = solve_factor_lp(0, 0.01)
    assert fine.Gamma >= 50 / 99 - 1e-6 and zero.Gamma >= 0.5 - 1e-6
    assert fine.Gamma <= coarse.Gamma + 1e-12
    assert zero.Gamma <= fine.Gamma + 1e-12
    assert fine.refined.feasible(1e-9)
    with pytest.raises(ValueError):
        solve_factor_lp(F(1, 32), 0.2)

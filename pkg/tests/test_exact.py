import math

import numpy as np
import pytest

from dormantwalk import ModelParams, NonConvergenceError
from dormantwalk.acceptance import plain_killed_walk_survival
from dormantwalk.asymptotics import baseline_asymptotic, derived_asymptotic
from dormantwalk.exact import (
    MemoryBudgetError,
    build_operator,
    evaluate_operator,
    expected_exposure,
    long_time_limit,
    survival,
)
from dormantwalk.model import estimate_survival


def test_origin_row(base):
    op = build_operator(base, 5)
    row = op.matrix.getrow(op.origin).toarray().ravel()
    assert row[op.origin] == -(2 * 2.0 + 1.0 + 1.0)
    assert row[op.state_index((1,), 1)] == 2.0
    assert row[op.state_index((-1,), 1)] == 2.0
    assert row[op.state_index((0,), 0)] == 1.0
    assert np.count_nonzero(row) == 4


def test_boundaries_differ_only_on_edge_rows(base):
    p = base.replace(d=2)
    a = build_operator(p, 4, "absorbing").matrix.tolil()
    r = build_operator(p, 4, "reflecting").matrix.tolil()
    op = build_operator(p, 4)
    diff = np.flatnonzero(np.abs(a - r).sum(axis=1))
    for i in diff:
        z = np.unravel_index(i % op.sites, (9, 9))
        assert max(abs(c - 4) for c in z) == 4


def test_reflecting_conservative_without_killing(base):
    op = build_operator(base.replace(d=2, gamma=0.0), 6, "reflecting")
    np.testing.assert_allclose(op.row_sums(), 0.0, atol=1e-12)


def test_absorbing_row_sums(base):
    op = build_operator(base, 6)
    sums = op.row_sums()
    expected = -op.outflow.copy()
    expected[op.origin] -= base.gamma
    np.testing.assert_allclose(sums, expected, atol=1e-12)


def test_memory_budget(base):
    with pytest.raises(MemoryBudgetError):
        build_operator(base.replace(d=3), 200)


def test_bad_radius(base):
    with pytest.raises(ValueError):
        build_operator(base, 0)


def test_time_zero(base):
    c = survival(base, 20, [0.0])
    assert c.lower[0] == 1.0 and c.upper[0] == 1.0


def test_initial_slope_is_minus_gamma(base):
    for gamma in (0.5, 2.0):
        dt = 1e-6
        c = survival(base.replace(gamma=gamma), 10, [dt])
        assert (1 - c.upper[0]) / dt == pytest.approx(gamma, rel=1e-4)


def test_d1_bracket_and_mc(base):
    c = survival(base, 300, [50.0])
    assert c.gap[0] < 1e-8
    e = estimate_survival(base, [50.0], 10**5, seed=77)[0]
    assert abs(e.mean - c.upper[0]) <= 3 * e.stderr + c.gap[0]


def test_gap_shrinks_with_radius(base):
    p = base.replace(d=2)
    g1 = survival(p, 8, [20.0]).gap[0]
    g2 = survival(p, 16, [20.0]).gap[0]
    assert g2 < g1


def test_gap_tolerance_raises(base):
    with pytest.raises(NonConvergenceError):
        survival(base, 3, [50.0], gap_tol=1e-6)


def test_bounds_and_monotonicity(base):
    times = np.linspace(0, 30, 13)
    for p in (base, base.replace(d=2, s1=3.0, s0=0.5)):
        c = survival(p, 15, times)
        for v in (c.lower, c.upper):
            assert np.all((v >= 0) & (v <= 1))
            assert np.all(np.diff(v) <= 1e-15)
        c2 = survival(p.replace(gamma=2 * p.gamma), 15, times)
        assert np.all(c2.lower <= c.lower + 1e-15)
        assert np.all(c.lower <= c.upper)


def test_absorbing_below_reflecting(base):
    times = [1.0, 5.0, 25.0]
    for p in (base, base.replace(d=2)):
        alive_abs = evaluate_operator(build_operator(p, 6, "absorbing"), times)[0]
        alive_ref = evaluate_operator(build_operator(p, 6, "reflecting"), times)[0]
        assert np.all(alive_abs <= alive_ref + 1e-14)


def test_reduction_to_plain_walk(base):
    times = [0.5, 5.0, 40.0]
    for d, R in ((1, 150), (2, 15)):
        p = base.replace(d=d, s1=0.0)
        ours = evaluate_operator(build_operator(p, R), times)[0]
        ref = plain_killed_walk_survival(d, p.nu, p.gamma, R, times)
        np.testing.assert_allclose(ours, ref, atol=1e-10, rtol=0)


def test_exposure_methods_agree(base):
    fd = expected_exposure(base, 100, [5.0, 20.0], method="fd")
    ex = expected_exposure(base, 100, [5.0, 20.0], method="exact")
    np.testing.assert_allclose(fd, ex, rtol=1e-3)


def test_long_time_limit_gamma_zero(base):
    lim = long_time_limit(base.replace(d=3, gamma=0.0), 6, t_max=10.0)
    assert lim.value == 1.0


def test_long_time_limit_needs_transience(base):
    with pytest.raises(ValueError):
        long_time_limit(base, 10)


def test_long_time_limit_without_dormancy_matches_closed_form():
    p = ModelParams(d=3, kappa=1.0, rho=1.0, gamma=1.0, s0=1.0, s1=0.0)
    lim = long_time_limit(p, 20, t_max=200.0)
    target = baseline_asymptotic(p, "none").leading_value
    # finite-t correction of order t^(-1/2) plus the bracket
    assert abs(lim.value - target) < 2e-3 + lim.gap


def test_long_time_limit_with_dormancy_matches_renewal_formula():
    p = ModelParams(d=3, kappa=1.0, rho=1.0, gamma=1.0, s0=1.0, s1=1.0)
    lim = long_time_limit(p, 20, t_max=200.0)
    target = derived_asymptotic(p).leading_value
    assert abs(lim.value - target) < 2e-3 + lim.gap

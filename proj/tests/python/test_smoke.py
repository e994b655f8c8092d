import math

import numpy as np
import pytest

import qspec


def test_linear_interval_modes():
    p = qspec.ProblemParams(1, 2.0, allow_linear=True)
    for k in (1, 2, 3):
        pair = qspec.interval_eigenvalue(p, 1.0, k)
        assert pair.lam == pytest.approx(k * k * math.pi**2, rel=1e-9)


def test_ball_profile_arrays():
    p = qspec.ProblemParams(2, 3.0)
    pair = qspec.ball_eigenvalue(p, 1.0, 1)
    assert pair.lam == pytest.approx(6.648511222291, rel=1e-11)
    assert pair.sign_class == "positive"
    prof = pair.eigenfunction
    assert isinstance(prof["u"], np.ndarray)
    assert prof["u"].shape == prof["rho"].shape
    assert prof["rho"][-1] == pytest.approx(1.0)
    assert np.all(prof["u"] >= 0.0)


def test_grid_solver_matches_radial():
    p = qspec.ProblemParams(2, 3.0)
    grid = qspec.rasterize(qspec.Domain.ball(1.0), 1.0 / 32)
    pair = qspec.minimize_rayleigh(p, grid)
    radial = qspec.ball_eigenvalue(p).lam
    assert abs(pair.lam / radial - 1.0) < 0.05
    values = pair.eigenfunction["values"]
    assert values.shape == grid.mask.shape
    assert values.min() >= 0.0


def test_spin_formula_and_scaling():
    sub = qspec.ProblemParams(2, 1.5)
    sup = qspec.ProblemParams(2, 3.0)
    assert qspec.spin_eigenvalue([1.0, 1.0], [1, 1], sub) == 2.0 ** (-1.0 / 3.0)
    assert qspec.spin_eigenvalue([1.0, 1.0], [1, 1], sup) == pytest.approx(2.0 ** (1.0 / 3.0), rel=1e-15)
    assert qspec.scale_eigenvalue(1.0, 2.0, sub) == pytest.approx(2.0 ** (-8.0 / 3.0))
    spectrum = qspec.enumerate_spectrum([[1.0, 4.0], [1.0, 4.0]], sub, ceiling=5.0)
    assert sum(m for _, m, _ in spectrum) == 8


def test_geometric_tail():
    p = qspec.ProblemParams(2, 1.5)
    unit = qspec.ball_eigenvalue(p).lam
    tail = qspec.geometric_union_tail(1.0, 0.5, unit, p, 50)
    assert tail["strictly_decreasing"] and tail["above_limit"]
    assert tail["limit"] == pytest.approx(unit * (255.0 / 256.0) ** (1.0 / 3.0), rel=1e-14)
    points = qspec.accumulation_points(list(tail["values"]), 0.01 * tail["limit"], 3)
    assert any(abs(pt - tail["limit"]) < 1e-12 for pt, _, _ in points)


def test_errors_carry_codes():
    with pytest.raises(qspec.Error) as info:
        qspec.ProblemParams(3, 7.0)
    assert info.value.code == "invalid-input"
    with pytest.raises(qspec.Error) as info:
        qspec.rasterize(qspec.Domain.ball(1.0), 2.5)
    assert info.value.code == "empty-domain"
    with pytest.raises(ValueError):
        qspec.ProblemParams(2, 2.0)

import numpy as np
import pytest

from qggm import NumericalError, ValidationError
from qggm.lp import LpProblem, solve_lp


def test_basic_maximization_as_min():
    # max x + y st x + y <= 1, x <= 0.6  ->  min -(x + y) = -1
    x, val = solve_lp(LpProblem(
        objective=np.array([-1.0, -1.0]),
        A_ub=np.array([[1.0, 1.0], [1.0, 0.0]]),
        b_ub=np.array([1.0, 0.6]),
    ))
    assert val == pytest.approx(-1.0, abs=1e-9)
    assert x[0] + x[1] == pytest.approx(1.0, abs=1e-9)


def test_negative_rhs_needs_phase_one():
    # min x st -x <= -2  (x >= 2)
    x, val = solve_lp(LpProblem(
        objective=np.array([1.0]),
        A_ub=np.array([[-1.0]]),
        b_ub=np.array([-2.0]),
    ))
    assert val == pytest.approx(2.0, abs=1e-9)


def test_free_variable():
    # min |t| style: t free, minimize t subject to t >= -3  ->  -3
    x, val = solve_lp(LpProblem(
        objective=np.array([1.0]),
        A_ub=np.array([[-1.0]]),
        b_ub=np.array([3.0]),
        bounds=((None, None),),
    ))
    assert val == pytest.approx(-3.0, abs=1e-9)


def test_agrees_with_scipy_on_random_problems(rng):
    from scipy.optimize import linprog

    for k in range(10):
        m, n = 8, 5
        A = rng.normal(size=(m, n))
        x_feas = rng.uniform(0.1, 1.0, size=n)
        b = A @ x_feas + rng.uniform(0.1, 1.0, size=m)  # feasible region nonempty
        c = rng.normal(size=n)
        ref = linprog(c, A_ub=A, b_ub=b, bounds=[(0, None)] * n, method="highs")
        if ref.status == 3:
            with pytest.raises(NumericalError, match="unbounded"):
                solve_lp(LpProblem(objective=c, A_ub=A, b_ub=b))
            continue
        assert ref.status == 0
        mine_x, mine_val = solve_lp(LpProblem(objective=c, A_ub=A, b_ub=b))
        assert mine_val == pytest.approx(ref.fun, abs=1e-7)
        assert np.all(A @ mine_x <= b + 1e-7)


def test_unbounded_detected():
    with pytest.raises(NumericalError, match="unbounded"):
        solve_lp(LpProblem(
            objective=np.array([-1.0]),
            A_ub=np.array([[0.0]]),
            b_ub=np.array([1.0]),
        ))


def test_validation():
    with pytest.raises(ValidationError):
        solve_lp(LpProblem(
            objective=np.array([1.0, 2.0]),
            A_ub=np.array([[1.0]]),
            b_ub=np.array([1.0]),
        ))
    with pytest.raises(ValidationError):
        solve_lp(LpProblem(
            objective=np.array([np.nan]),
            A_ub=np.array([[1.0]]),
            b_ub=np.array([1.0]),
        ))

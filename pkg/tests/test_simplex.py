import numpy as np
import pytest
from scipy.optimize import linprog

from fincat._simplex import LPError, solve


def test_small_known_problem():
    # min x + 2y  s.t.  x + y = 1, x, y >= 0
    x, fun = solve(np.array([1.0, 2.0]), np.array([[1.0, 1.0]]), np.array([1.0]))
    assert fun == pytest.approx(1.0)
    assert np.allclose(x, [1.0, 0.0])


def test_infeasible():
    with pytest.raises(LPError):
        solve(np.array([1.0, 1.0]), np.array([[1.0, 1.0], [1.0, 1.0]]), np.array([1.0, 2.0]))


def test_unbounded():
    with pytest.raises(LPError):
        solve(np.array([-1.0, 0.0]), np.array([[1.0, -1.0]]), np.array([0.0]))


def test_agrees_with_scipy(rng):
    for _ in range(200):
        m, n = int(rng.integers(1, 5)), int(rng.integers(5, 10))
        A = rng.normal(size=(m, n))
        b = A @ rng.uniform(0.0, 1.0, size=n)  # feasible by construction
        c = rng.uniform(0.1, 2.0, size=n)  # positive costs keep it bounded
        x, fun = solve(c, A, b)
        ref = linprog(c, A_eq=A, b_eq=b, bounds=(0, None), method="highs")
        assert ref.status == 0
        assert fun == pytest.approx(ref.fun, abs=1e-8)
        assert np.allclose(A @ x, b, atol=1e-8)
        assert x.min() >= -1e-10

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from seqfair.errors import ValidationError
from seqfair.lp import LPProblem, enumerate_vertices, solve


def test_corner_solution():
    sol = solve(LPProblem([1, 0], [[1, 1]], [1]))
    assert sol.optimal
    assert np.allclose(sol.x, [1, 0])
    assert sol.objective == pytest.approx(1)


def test_bound_conflict():
    assert solve(LPProblem([1], [[1]], [2])).status == "infeasible"
    assert enumerate_vertices(LPProblem([1], [[1]], [2])) == []


def test_vertices_of_simplex_edge():
    vs = sorted(tuple(np.round(v, 12)) for v, _ in enumerate_vertices(LPProblem([1, 0], [[1, 1]], [1])))
    assert vs == [(0.0, 1.0), (1.0, 0.0)]


def test_respects_custom_bounds():
    sol = solve(LPProblem([1, 1], [[1, -1]], [0], lo=[0.2, 0.2], hi=[0.6, 0.9]))
    assert np.allclose(sol.x, [0.6, 0.6])


def test_redundant_rows():
    sol = solve(LPProblem([1, 2, 3], [[1, 1, 1], [2, 2, 2]], [1, 2]))
    assert sol.optimal and sol.objective == pytest.approx(3)


def test_deterministic():
    p = LPProblem([1, 1, 1], [[1, 1, 1]], [1.5])
    assert np.array_equal(solve(p).x, solve(p).x)


@pytest.mark.parametrize(
    "kw",
    [
        dict(c=[1] * 9, A_eq=[[1] * 9], b_eq=[1]),
        dict(c=[1, 1], A_eq=[[1, 1], [1, 0], [0, 1]], b_eq=[1, 0, 1]),
        dict(c=[np.nan], A_eq=[[1]], b_eq=[1]),
        dict(c=[1], A_eq=[[1]], b_eq=[1], hi=[2]),
        dict(c=[1, 1], A_eq=[[1]], b_eq=[1]),
    ],
)
def test_invalid_problems(kw):
    with pytest.raises(ValidationError):
        LPProblem(**kw)


def _check(problem):
    sol = solve(problem)
    verts = enumerate_vertices(problem)
    if not verts:
        assert not sol.optimal
        return
    assert sol.optimal
    assert abs(sol.objective - max(o for _, o in verts)) <= 1e-9
    assert np.abs(problem.A_eq @ sol.x - problem.b_eq).max() <= 1e-9
    assert np.all(sol.x >= problem.lo - 1e-12) and np.all(sol.x <= problem.hi + 1e-12)


def test_random_four_variable_problems_match_oracle(rng):
    # feasible-by-construction right-hand sides mixed with arbitrary ones
    for i in range(1500):
        A = rng.normal(size=(2, 4))
        if i % 2:
            b = A @ rng.random(4)
        else:
            b = rng.normal(size=2)
        _check(LPProblem(rng.normal(size=4), A, b))


def test_degenerate_and_integer_problems(rng):
    for _ in range(500):
        n = int(rng.integers(2, 9))
        k = int(rng.integers(1, n + 1))
        A = rng.integers(-2, 3, size=(k, n)).astype(float)
        b = A @ rng.integers(0, 2, size=n).astype(float)
        _check(LPProblem(rng.integers(-3, 4, size=n).astype(float), A, b))


@given(
    st.integers(1, 6).flatmap(
        lambda n: st.tuples(
            st.lists(st.floats(-5, 5), min_size=n, max_size=n),
            st.lists(st.lists(st.floats(-5, 5), min_size=n, max_size=n), min_size=1, max_size=n),
            st.lists(st.floats(0, 1), min_size=n, max_size=n),
        )
    )
)
def test_property_feasible_problems(data):
    c, A, x0 = data
    A = np.array(A)
    _check(LPProblem(c, A, A @ np.array(x0)))

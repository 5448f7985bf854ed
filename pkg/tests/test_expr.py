from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, strategies as st

from despso.cases import SURFACE_NAMES, smartwatch_problem
from despso.expr import Expression, ExpressionError, ProblemFileError, load_problem, parse_problem

DATA = Path(__file__).parent / "data"


@pytest.mark.parametrize("text, expect", [
    ("1 + 2 * 3", 7.0),
    ("(1 + 2) * 3", 9.0),
    ("2 ^ 3 ^ 2", 512.0),
    ("-2 ^ 2", -4.0),
    ("2 * a ^ 2", 18.0),
    ("a / 2 - b", 0.5),
    ("10^-1 * b", 0.1),
    ("a ** 2", 9.0),
])
def test_evaluation(text, expect):
    assert Expression(text)({"a": 3.0, "b": 1.0}) == pytest.approx(expect)


@given(st.floats(-50, 50), st.floats(-50, 50), st.floats(0.5, 3.0))
def test_matches_python_arithmetic(a, b, c):
    e = Expression("a*b - c^2 / (1 + c) + -a")
    assert e({"a": a, "b": b, "c": c}) == pytest.approx(a * b - c**2 / (1 + c) - a, rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("bad", [
    "__import__('os')", "a.real", "f(1)", "a if b else c", "[1, 2]", "a < b", "'x'", "a % 2", "2 +", "True",
])
def test_rejects_unsafe_or_unsupported(bad):
    with pytest.raises(ExpressionError):
        Expression(bad)


def test_unknown_variable():
    with pytest.raises(ExpressionError):
        Expression("x + y", names=["x"])


def test_vectorised_over_arrays():
    e = Expression("a * b + 1")
    np.testing.assert_array_equal(e({"a": np.arange(3.0), "b": 2.0}), [1.0, 3.0, 5.0])


def test_problem_file_reencodes_builtin_surfaces():
    user = load_problem(DATA / "smartwatch.ini")
    builtin = smartwatch_problem()
    assert [v.name for v in user.variables] == [v.name for v in builtin.variables]
    assert [(v.lower, v.upper) for v in user.variables] == [(v.lower, v.upper) for v in builtin.variables]
    assert tuple(r.name for r in user.responses) == SURFACE_NAMES
    rng = np.random.default_rng(0)
    x = builtin.space.lower[:, None] + rng.random((10, 200)) * builtin.space.width[:, None]
    for ru, rb in zip(user.responses, builtin.responses):
        np.testing.assert_allclose(ru(x), rb(x), rtol=1e-13)
        assert ru(x[:, 0]) == pytest.approx(rb(x[:, 0]), rel=1e-13)


def test_constant_response_broadcasts():
    prob = parse_problem("[variables]\na = 0, 1\n[responses]\nk = 4\n")
    np.testing.assert_array_equal(prob.responses[0](np.zeros((1, 3))), [4.0, 4.0, 4.0])


@pytest.mark.parametrize("text", [
    "[responses]\ny = a\n",
    "[variables]\na = 0, 1\n",
    "[variables]\na = 1, 0\n[responses]\ny = a\n",
    "[variables]\na = 0\n[responses]\ny = a\n",
    "[variables]\na = x, 1\n[responses]\ny = a\n",
    "[variables]\na = 0, 1\n[responses]\ny = a + q\n",
    "not an ini file",
])
def test_bad_problem_files(text):
    with pytest.raises(ProblemFileError):
        parse_problem(text)

import math

import numpy as np
import pytest

from despso.interval import (
    BoundResult, IntervalProblem, IntervalVariable, Response, SeedRecord, SpeedupRow, bounds, compare_modes,
    speedup_pct, write_speedup_csv,
)
from despso.pso import PsoConfig, RunReport, convergence_steps

QUICK = PsoConfig(pop_size=16, max_iters=120)


def bowl():
    # y = (a - 1)^2 + b on [0, 3] x [-1, 2]: min -1 at (1, -1), max 6 at (3, 2)
    return IntervalProblem(
        [IntervalVariable("a", 0.0, 3.0), IntervalVariable("b", -1.0, 2.0)],
        [Response("y", lambda x: (x[0] - 1.0) ** 2 + x[1])],
    )


def test_variable_and_problem_validation():
    with pytest.raises(ValueError):
        IntervalVariable("a", 1.0, 1.0)
    with pytest.raises(ValueError):
        IntervalProblem([IntervalVariable("a", 0, 1), IntervalVariable("a", 0, 1)], [Response("y", sum)])
    with pytest.raises(ValueError):
        IntervalProblem([IntervalVariable("a", 0, 1)], [])
    p = bowl()
    assert p.dim == 2 and p.response_index("y") == 0 and p.response_index(0) == 0
    np.testing.assert_array_equal(p.midpoint, [1.5, 0.5])
    with pytest.raises(KeyError):
        p.response_index("z")


@pytest.mark.parametrize("mode", ["hclpso", "despso"])
def test_bounds_of_bowl(mode):
    r = bounds(bowl(), "y", QUICK, mode, seed=2)
    assert isinstance(r, BoundResult)
    assert r.y_min == pytest.approx(-1.0, abs=1e-6)
    assert r.y_max == pytest.approx(6.0, abs=1e-9)
    np.testing.assert_allclose(r.argmax, [3.0, 2.0])
    # reports are in response units: the max report rises to y_max
    assert r.max_report.values[-1] == r.y_max
    assert all(b >= a for a, b in zip(r.max_report.values, r.max_report.values[1:]))


def test_min_and_max_use_different_seeds():
    p = IntervalProblem([IntervalVariable("a", -1.0, 1.0)], [Response("y", lambda x: x[0])])
    r = bounds(p, "y", PsoConfig(pop_size=6, max_iters=1), "hclpso", seed=4)
    # symmetric problem: identical seeds would mirror the two histories exactly
    assert r.min_report.values[0] != -r.max_report.values[0]


def test_speedup_formula():
    assert speedup_pct(200, 100) == 100.0
    assert speedup_pct(100, 100) == 0.0
    assert speedup_pct(50, 100) == -50.0


def test_speedup_row_medians():
    recs = [SeedRecord("y", "lower", s, d, h) for s, (d, h) in enumerate([(10, 20), (None, 30), (30, 30)])]
    row = SpeedupRow("y", "lower", recs)
    assert row.median_des_pso == 30
    assert row.median_hclpso == 30
    assert row.excluded_seeds == [1]
    assert row.median_speedup == 50.0
    row2 = SpeedupRow("y", "lower", [SeedRecord("y", "lower", 0, None, None)] * 3)
    assert math.isinf(row2.median_des_pso) and row2.median_speedup is None


def test_compare_modes_and_csv(tmp_path):
    lo, hi = compare_modes(bowl(), "y", QUICK, targets=(-1.0, 6.0), tol=1e-3, seeds=(0, 1))
    assert (lo.bound, hi.bound) == ("lower", "upper")
    assert [r.seed for r in lo.records] == [0, 1]
    direct = bounds(bowl(), "y", QUICK, "despso", 1)
    assert lo.records[1].des_pso_steps == convergence_steps(direct.min_report, -1.0, 1e-3)
    path = tmp_path / "s.csv"
    write_speedup_csv([lo, hi], path)
    lines = path.read_text().splitlines()
    assert lines[0] == "response,bound,seed,des_pso_steps,hclpso_steps,speedup_pct"
    assert len(lines) == 5
    with pytest.raises(ValueError):
        compare_modes(bowl(), "y", QUICK, targets=None)
    with pytest.raises(ValueError):
        compare_modes(bowl(), "y", QUICK, targets=(0, 1), seeds=())

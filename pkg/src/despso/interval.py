"""Interval problems and bound extraction by paired min/max optimisation."""
import csv
import math
import statistics
from dataclasses import dataclass, field

import numpy as np

from .pso import DES, RANDOM, PsoConfig, SearchSpace, SequenceSource, convergence_steps, optimize

MODES = {"hclpso": RANDOM, "despso": DES, RANDOM: RANDOM, DES: DES}


@dataclass(frozen=True)
class IntervalVariable:
    name: str
    lower: float
    upper: float

    def __post_init__(self):
        if not self.lower < self.upper:
            raise ValueError(f"{self.name}: lower bound must be below upper bound")


@dataclass(frozen=True)
class Response:
    """A named response.

    ``func`` takes an array whose first axis indexes the problem variables
    (shape ``(D,)`` or ``(D, N)``) and returns one value per column.
    """

    name: str
    func: object

    def __call__(self, x):
        return self.func(x)


@dataclass(frozen=True)
class IntervalProblem:
    variables: tuple
    responses: tuple

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "responses", tuple(self.responses))
        names = [v.name for v in self.variables]
        if len(set(names)) != len(names):
            raise ValueError("duplicate variable names")
        if not self.responses:
            raise ValueError("a problem needs at least one response")

    @property
    def dim(self):
        return len(self.variables)

    @property
    def space(self):
        return SearchSpace([v.lower for v in self.variables], [v.upper for v in self.variables])

    @property
    def midpoint(self):
        return np.array([(v.lower + v.upper) / 2.0 for v in self.variables])

    def response_index(self, key):
        if isinstance(key, int):
            return key
        for i, r in enumerate(self.responses):
            if r.name == key:
                return i
        raise KeyError(key)


@dataclass
class BoundResult:
    response: str
    y_min: float
    y_max: float
    argmin: np.ndarray
    argmax: np.ndarray
    min_report: object = field(repr=False)
    max_report: object = field(repr=False)


def _source(mode, problem, config, seed, des_config, permute):
    if MODES[mode] == DES:
        return SequenceSource.des(problem.dim, config, seed, des_config, permute)
    return SequenceSource.random(seed)


def bounds(problem, response, config=None, mode="despso", seed=0, des_config=None, permute=True):
    """Lower and upper bound of one response.

    Minimisation uses ``seed``; maximisation (of the negated response) uses
    ``seed ^ 1``.  Both reports are in response units.
    """
    config = config or PsoConfig()
    resp = problem.responses[problem.response_index(response)]
    space = problem.space
    lo_seed, hi_seed = seed, seed ^ 1

    xmin, ymin, rep_min = optimize(
        resp, space, config, _source(mode, problem, config, lo_seed, des_config, permute), lo_seed, vectorized=True
    )
    xmax, neg_ymax, rep_max = optimize(
        lambda x: -resp(x), space, config, _source(mode, problem, config, hi_seed, des_config, permute),
        hi_seed, vectorized=True,
    )
    return BoundResult(resp.name, ymin, -neg_ymax, xmin, xmax, rep_min, rep_max.negated())


def speedup_pct(hclpso_steps, despso_steps):
    """Relative speedup: (HCLPSO - DES-PSO) / DES-PSO, in percent."""
    return (hclpso_steps - despso_steps) / despso_steps * 100.0


@dataclass
class SeedRecord:
    response: str
    bound: str
    seed: int
    des_pso_steps: int | None
    hclpso_steps: int | None

    @property
    def speedup(self):
        if self.des_pso_steps is None or self.hclpso_steps is None:
            return None
        return speedup_pct(self.hclpso_steps, self.des_pso_steps)


def _median_steps(values):
    # unreached runs count as infinitely slow
    return statistics.median([math.inf if v is None else v for v in values])


@dataclass
class SpeedupRow:
    """One response/bound line of a convergence comparison."""

    response: str
    bound: str
    records: list

    @property
    def median_des_pso(self):
        return _median_steps([r.des_pso_steps for r in self.records])

    @property
    def median_hclpso(self):
        return _median_steps([r.hclpso_steps for r in self.records])

    @property
    def excluded_seeds(self):
        return [r.seed for r in self.records if r.speedup is None]

    @property
    def median_speedup(self):
        vals = [r.speedup for r in self.records if r.speedup is not None]
        return statistics.median(vals) if vals else None


def compare_modes(problem, response, config=None, targets=None, tol=1e-3, seeds=(0,), des_config=None,
                  permute=True):
    """Convergence steps of both modes per seed, for the lower and upper bound.

    ``targets`` is the known ``(y_min, y_max)``.  Returns ``(lower_row, upper_row)``.
    """
    if targets is None:
        raise ValueError("compare_modes needs known target bounds")
    if not seeds:
        raise ValueError("need at least one seed")
    config = config or PsoConfig()
    name = problem.responses[problem.response_index(response)].name
    lower, upper = SpeedupRow(name, "lower", []), SpeedupRow(name, "upper", [])
    for seed in seeds:
        res = {m: bounds(problem, response, config, m, seed, des_config, permute) for m in ("despso", "hclpso")}
        steps = {
            m: (convergence_steps(r.min_report, targets[0], tol), convergence_steps(r.max_report, targets[1], tol))
            for m, r in res.items()
        }
        lower.records.append(SeedRecord(name, "lower", seed, steps["despso"][0], steps["hclpso"][0]))
        upper.records.append(SeedRecord(name, "upper", seed, steps["despso"][1], steps["hclpso"][1]))
    return lower, upper


def write_speedup_csv(rows, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["response", "bound", "seed", "des_pso_steps", "hclpso_steps", "speedup_pct"])
        for row in rows:
            for r in row.records:
                sp = r.speedup
                w.writerow([
                    r.response, r.bound, r.seed,
                    "" if r.des_pso_steps is None else r.des_pso_steps,
                    "" if r.hclpso_steps is None else r.hclpso_steps,
                    "" if sp is None else format(sp, ".17g"),
                ])

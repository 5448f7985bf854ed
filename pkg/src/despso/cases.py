"""Built-in benchmark problems and exact ground-truth oracles.

* ``linear2x2`` - the 2x2 linear interval system ``A x = b`` with interval
  entries, responses ``x1`` and ``x2``.
* ``smartwatch`` - ten interval inputs (five thicknesses, three Young's
  moduli, two chip powers) and six quadratic response surfaces: impact
  stresses at three points, solder stress, and two chip temperatures.
"""
import csv
import itertools
import logging
from dataclasses import dataclass

import numpy as np

from .interval import IntervalProblem, IntervalVariable, Response

log = logging.getLogger(__name__)


class SingularMatrix(ArithmeticError):
    pass


class UnknownSurface(KeyError):
    pass


class DegenerateFace(np.linalg.LinAlgError):
    pass


# -- linear interval system -------------------------------------------------

LINEAR_VARIABLES = (
    IntervalVariable("a11", 3.0, 6.0),
    IntervalVariable("a12", -3.0, 1.5),
    IntervalVariable("a21", -1.5, 3.0),
    IntervalVariable("a22", 3.0, 6.0),
    IntervalVariable("b1", -4.0, 4.0),
    IntervalVariable("b2", -4.0, 4.0),
)
LINEAR_BOUND = 16.0 / 3.0


def solve_linear_2x2(a11, a12, a21, a22, b1, b2):
    """Cramer's rule; works elementwise on arrays."""
    det = a11 * a22 - a12 * a21
    if np.any(np.abs(det) < 1e-12):
        raise SingularMatrix("determinant is (numerically) zero")
    return (b1 * a22 - a12 * b2) / det, (a11 * b2 - a21 * b1) / det


def _x1(x):
    return solve_linear_2x2(*x)[0]


def _x2(x):
    return solve_linear_2x2(*x)[1]


def linear_system_problem():
    return IntervalProblem(LINEAR_VARIABLES, (Response("x1", _x1), Response("x2", _x2)))


def sample_solution_domain(n_samples, seed=0):
    """Solutions ``(x1, x2)`` for uniformly sampled systems from the box, shape (n, 2)."""
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    rng = np.random.default_rng(seed)
    lo = np.array([v.lower for v in LINEAR_VARIABLES])
    hi = np.array([v.upper for v in LINEAR_VARIABLES])
    params = lo[:, None] + rng.random((6, n_samples)) * (hi - lo)[:, None]
    return np.column_stack(solve_linear_2x2(*params))


# -- smartwatch response surfaces -------------------------------------------

SMARTWATCH_VARIABLES = (
    IntervalVariable("X1", 0.91, 1.09),
    IntervalVariable("X2", 0.91, 1.09),
    IntervalVariable("X3", 0.91, 1.09),
    IntervalVariable("X4", 0.91, 1.09),
    IntervalVariable("X5", 0.91, 1.09),
    IntervalVariable("P1", 10400.0, 11600.0),
    IntervalVariable("P2", 22600.0, 23400.0),
    IntervalVariable("P3", 2380.0, 2580.0),
    IntervalVariable("P4", 0.09, 0.21),
    IntervalVariable("P5", 0.09, 0.21),
)

_E6 = 1e-6

# (coefficient, var, var) triples; a missing var means a lower-degree term.
SURFACE_TERMS = {
    "sigma1_N": (
        (0.001848 * _E6, "P2", "P2"), (-0.3688 * _E6, "P2", "P3"), (973.18 * _E6, "P2", None),
        (1.609 * _E6, "P3", "P3"),
        (-30.19, "X1", "X1"), (1.133, "X1", "X3"), (33.10, "X1", "X4"), (1.313, "X1", "X5"),
        (0.4128, "X3", "X3"), (-3.7317, "X3", "X4"), (-0.26871, "X3", "X5"),
        (-56.55, "X4", "X4"), (65.54, "X4", "X5"), (-55.32, "X5", "X5"), (129.86, None, None),
    ),
    "sigma2_N": (
        (-0.03509 * _E6, "P2", "P2"), (0.1813 * _E6, "P2", "P3"), (1277 * _E6, "P2", None),
        (-1.461 * _E6, "P3", "P3"),
        (-35.80, "X1", "X1"), (6.112, "X1", "X3"), (32.86, "X1", "X4"), (2.891, "X1", "X5"),
        (-6.809, "X3", "X3"), (4.303, "X3", "X4"), (9.209, "X3", "X5"),
        (-63.71, "X4", "X4"), (67.43, "X4", "X5"), (-64.37, "X5", "X5"), (135.2, None, None),
    ),
    "sigma3_N": (
        (0.03054 * _E6, "P2", "P2"), (-0.95 * _E6, "P2", "P3"), (802.6 * _E6, "P2", None),
        (4.645 * _E6, "P3", "P3"),
        (-28.19, "X1", "X1"), (4.188, "X1", "X3"), (28.63, "X1", "X4"), (0.2030, "X1", "X5"),
        (9.152, "X3", "X3"), (-16.12, "X3", "X4"), (-15.75, "X3", "X5"),
        (-42.17, "X4", "X4"), (62.61, "X4", "X5"), (-36.32, "X5", "X5"), (119.5, None, None),
    ),
    "sigma_H": (
        (0.0000002578, "P1", "P1"), (-0.00002501, "P1", "X2"),
        (-0.9103, "X1", "X1"), (0.02502, "X1", "X2"), (0.6950, "X1", "X3"),
        (0.1007, "X2", "X2"), (0.0125, "X2", "X3"), (-2.372, "X3", "X3"), (37.54, None, None),
    ),
    "T1": (
        (0.5473, "X1", "X1"), (-2.932, "X1", "X2"), (-0.3207, "X1", "X3"),
        (5.589, "X2", "X2"), (-2.970, "X2", "X3"), (-1.206, "X3", "X3"),
        (71.85, "P4", None), (72.81, "P5", None), (299.3, "P4", "P5"), (62.05, None, None),
    ),
    "T2": (
        (0.5448, "X1", "X1"), (-2.923, "X1", "X2"), (-0.3219, "X1", "X3"),
        (5.569, "X2", "X2"), (-2.973, "X2", "X3"), (-1.204, "X3", "X3"),
        (61.10, "P4", None), (96.78, "P5", None), (255.2, "P4", "P5"), (61.11, None, None),
    ),
}

# Published bound table for the six surfaces (lower, upper).
PUBLISHED_BOUNDS = {
    "sigma1_N": (89.060, 105.318),
    "sigma2_N": (66.908, 89.221),
    "sigma3_N": (26.612, 47.865),
    "sigma_H": (62.230, 69.937),
    "T1": (75.104, 105.603),
    "T2": (74.984, 105.475),
}


def _flip(terms, key):
    return tuple((-c if (a, b) == key else c, a, b) for c, a, b in terms)


# The printed sigma2/sigma3 polynomials do not reproduce the published
# bounds; flipping one sign in each does, to 1e-3.
CORRECTED_SURFACE_TERMS = dict(
    SURFACE_TERMS,
    sigma2_N=_flip(SURFACE_TERMS["sigma2_N"], ("P2", "P3")),
    sigma3_N=_flip(SURFACE_TERMS["sigma3_N"], ("P3", "P3")),
)

SURFACE_NAMES = tuple(SURFACE_TERMS)
_SW_INDEX = {v.name: i for i, v in enumerate(SMARTWATCH_VARIABLES)}


def _terms(which, corrected=False):
    table = CORRECTED_SURFACE_TERMS if corrected else SURFACE_TERMS
    try:
        return table[which]
    except KeyError:
        raise UnknownSurface(which) from None


def surface_variables(which):
    names = {v for _, a, b in _terms(which) for v in (a, b) if v is not None}
    return tuple(v.name for v in SMARTWATCH_VARIABLES if v.name in names)


def _eval_terms(terms, get):
    total = 0.0
    for coef, a, b in terms:
        t = coef
        if a is not None:
            t = t * get(a)
        if b is not None:
            t = t * get(b)
        total = total + t
    return total


def response_surface(which, inputs, corrected=False):
    """Evaluate a surface from a mapping of variable name to value (or array)."""
    return _eval_terms(_terms(which, corrected), inputs.__getitem__)


class _Surface:
    def __init__(self, which, corrected):
        self.terms = _terms(which, corrected)

    def __call__(self, x):
        return _eval_terms(self.terms, lambda name: x[_SW_INDEX[name]])


def smartwatch_problem(corrected=False):
    responses = tuple(Response(name, _Surface(name, corrected)) for name in SURFACE_NAMES)
    return IntervalProblem(SMARTWATCH_VARIABLES, responses)


# -- oracles ------------------------------------------------------------------

@dataclass
class OracleResult:
    response: str
    y_min: float
    y_max: float
    argmin: dict
    argmax: dict


@dataclass
class Quadratic:
    """``f(x) = 0.5 x'Qx + g'x + c`` over named variables."""

    names: tuple
    Q: np.ndarray
    g: np.ndarray
    c: float

    @classmethod
    def from_terms(cls, terms):
        names = []
        for _, a, b in terms:
            for v in (a, b):
                if v is not None and v not in names:
                    names.append(v)
        idx = {v: i for i, v in enumerate(names)}
        d = len(names)
        Q, g, c = np.zeros((d, d)), np.zeros(d), 0.0
        for coef, a, b in terms:
            if a is None:
                c += coef
            elif b is None:
                g[idx[a]] += coef
            elif a == b:
                Q[idx[a], idx[a]] += 2.0 * coef
            else:
                Q[idx[a], idx[b]] += coef
                Q[idx[b], idx[a]] += coef
        return cls(tuple(names), Q, g, c)

    def __call__(self, x):
        return 0.5 * x @ self.Q @ x + self.g @ x + self.c


def quadratic_box_extrema(quad, lower, upper):
    """Exact min and max of a quadratic over a box.

    Each variable is either pinned to a bound or free; the free block's
    stationarity system is solved and kept if feasible.  Faces with a
    singular system are skipped: along a null direction the function is
    linear, so their extrema also occur on a lower-dimensional face.
    """
    lower, upper = np.asarray(lower, float), np.asarray(upper, float)
    d = len(quad.names)
    best_lo, best_hi = (np.inf, None), (-np.inf, None)
    for pattern in itertools.product((0, 1, 2), repeat=d):
        pattern = np.array(pattern)
        x = np.where(pattern == 1, upper, lower).astype(float)
        free = np.flatnonzero(pattern == 2)
        if free.size:
            fixed = np.flatnonzero(pattern != 2)
            A = quad.Q[np.ix_(free, free)]
            rhs = -(quad.g[free] + quad.Q[np.ix_(free, fixed)] @ x[fixed])
            try:
                if np.linalg.cond(A) > 1e12:
                    raise DegenerateFace(f"singular stationarity system on face {pattern.tolist()}")
                z = np.linalg.solve(A, rhs)
            except np.linalg.LinAlgError as exc:
                log.debug("skipping face: %s", exc)
                continue
            if np.any(z < lower[free]) or np.any(z > upper[free]):
                continue
            x[free] = z
        val = quad(x)
        if val < best_lo[0]:
            best_lo = (val, x.copy())
        if val > best_hi[0]:
            best_hi = (val, x.copy())
    return best_lo, best_hi


def linear_system_extrema(which, lower, upper, levels=33, rounds=2, keep=8):
    """Grid-plus-refinement extrema of ``x1`` or ``x2`` over the six-variable box.

    The solution is linear in ``b`` for fixed ``A``, so ``b`` only needs its
    four vertices; ``A`` is gridded at ``levels`` per axis and the best cells
    are re-gridded ``rounds`` times at the local cell width.
    """
    k = {"x1": 0, "x2": 1}[which]
    lower, upper = np.asarray(lower, float), np.asarray(upper, float)
    b_vertices = np.array(list(itertools.product(*[(lower[i], upper[i]) for i in (4, 5)])))

    def evaluate(a_pts):
        # a_pts: (M, 4) -> values (M, 4 b-vertices)
        a11, a12, a21, a22 = (a_pts[:, j, None] for j in range(4))
        sol = solve_linear_2x2(a11, a12, a21, a22, b_vertices[None, :, 0], b_vertices[None, :, 1])
        return sol[k]

    def grid(lo, hi, n):
        axes = [np.linspace(lo[j], hi[j], n) for j in range(4)]
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 4)

    results = []
    for sign in (1.0, -1.0):
        pts = grid(lower[:4], upper[:4], levels)
        step = (upper[:4] - lower[:4]) / (levels - 1)
        for r in range(rounds + 1):
            vals = sign * evaluate(pts)
            flat = vals.min(axis=1)
            order = np.argsort(flat, kind="stable")[:keep]
            best_idx = order[0]
            best = (flat[best_idx], pts[best_idx], b_vertices[np.argmin(vals[best_idx])])
            if r == rounds:
                break
            cand = []
            for i in order:
                lo = np.maximum(pts[i] - step, lower[:4])
                hi = np.minimum(pts[i] + step, upper[:4])
                cand.append(grid(lo, hi, 9))
            pts = np.concatenate(cand)
            step = step / 4.0
        val, a, b = best
        results.append((sign * val, np.concatenate([a, b])))
    return results[0], results[1]


def quadratic_box_oracle(which, box=None, corrected=False):
    """Ground-truth bounds of a built-in response over ``box``.

    ``box`` maps variable name to ``(lower, upper)``; missing names use the
    built-in intervals.
    """
    box = dict(box or {})
    if which in ("x1", "x2"):
        names = [v.name for v in LINEAR_VARIABLES]
        lo = [box.get(v.name, (v.lower, v.upper))[0] for v in LINEAR_VARIABLES]
        hi = [box.get(v.name, (v.lower, v.upper))[1] for v in LINEAR_VARIABLES]
        if np.any(np.asarray(lo) == np.asarray(hi)):
            x = np.asarray(lo, float)
            y = float(solve_linear_2x2(*x)[_k_index(which)])
            arg = dict(zip(names, x.tolist()))
            return OracleResult(which, y, y, arg, dict(arg))
        (ymin, amin), (ymax, amax) = linear_system_extrema(which, lo, hi)
        return OracleResult(which, float(ymin), float(ymax), dict(zip(names, amin.tolist())),
                            dict(zip(names, amax.tolist())))
    quad = Quadratic.from_terms(_terms(which, corrected))
    defaults = {v.name: (v.lower, v.upper) for v in SMARTWATCH_VARIABLES}
    lo = [box.get(n, defaults[n])[0] for n in quad.names]
    hi = [box.get(n, defaults[n])[1] for n in quad.names]
    (ymin, amin), (ymax, amax) = quadratic_box_extrema(quad, lo, hi)
    return OracleResult(which, float(ymin), float(ymax), dict(zip(quad.names, amin.tolist())),
                        dict(zip(quad.names, amax.tolist())))


def _k_index(which):
    return {"x1": 0, "x2": 1}[which]


def builtin_problem(name, corrected=False):
    if name == "linear2x2":
        return linear_system_problem()
    if name == "smartwatch":
        return smartwatch_problem(corrected)
    raise KeyError(name)


def oracle_bounds(problem_name, corrected=False):
    """Oracle results for every response of a built-in problem, in response order."""
    problem = builtin_problem(problem_name, corrected)
    return [quadratic_box_oracle(r.name, corrected=corrected) for r in problem.responses]


def write_oracle_csv(results, path):
    names = sorted({k for r in results for k in r.argmin})
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["response", "y_min", "y_max"] + [f"argmin_{n}" for n in names] + [f"argmax_{n}" for n in names])
        for r in results:
            w.writerow(
                [r.response, format(r.y_min, ".17g"), format(r.y_max, ".17g")]
                + [format(r.argmin[n], ".17g") if n in r.argmin else "" for n in names]
                + [format(r.argmax[n], ".17g") if n in r.argmax else "" for n in names]
            )


def write_domain_csv(points, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x1", "x2"])
        for x1, x2 in points:
            w.writerow([format(x1, ".17g"), format(x2, ".17g")])

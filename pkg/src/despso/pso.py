"""Heterogeneous comprehensive-learning PSO in matrix-vector form.

Arrays follow the column convention: positions, velocities and personal
bests are ``(D, N)`` with one particle per column.  Particles ``0..N1-1``
form the exploration subpopulation, ``N1..N-1`` the exploitation one.

The same engine runs plain HCLPSO (uniform random sequences) or DES-PSO,
where the initial population and the exemplar-attraction coefficients come
from DES point sets; see :class:`SequenceSource`.
"""
import csv
import functools
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .des import DesConfig, NotConverged, generate_des

RANDOM = "random"
DES = "des"


class PsoError(Exception):
    pass


class ShapeMismatch(PsoError):
    pass


class NonFiniteObjective(PsoError):
    pass


@dataclass(frozen=True, eq=False)
class SearchSpace:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lower, dtype=float))
        hi = np.atleast_1d(np.asarray(self.upper, dtype=float))
        if lo.shape != hi.shape or lo.ndim != 1:
            raise ValueError("lower and upper must be 1-D arrays of equal length")
        if not np.all(lo < hi):
            raise ValueError("every lower bound must be strictly below its upper bound")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dim(self):
        return self.lower.size

    @property
    def width(self):
        return self.upper - self.lower


def default_learn_prob(n):
    """Per-particle learning probabilities, rising from 0.05 to 0.5."""
    if n == 1:
        return np.array([0.05])
    i = np.arange(n)
    return 0.05 + 0.45 * (np.exp(10.0 * i / (n - 1)) - 1.0) / (math.exp(10.0) - 1.0)


@functools.lru_cache(maxsize=64)
def _learn_prob_table(n, given):
    table = default_learn_prob(n) if given is None else np.asarray(given, dtype=float)
    table.setflags(write=False)
    return table


@dataclass(frozen=True)
class PsoConfig:
    pop_size: int = 40
    explore_size: int | None = None
    max_iters: int = 500
    inertia: tuple = (0.99, 0.2)
    explore_accel: tuple = (3.0, 1.5)
    learn_prob: tuple | None = None
    refresh_gap: int = 7
    vmax_frac: float = 0.2

    def __post_init__(self):
        if self.explore_size is None:
            object.__setattr__(self, "explore_size", math.ceil(self.pop_size / 2))
        if not 1 <= self.explore_size < self.pop_size:
            raise ValueError("need 1 <= explore_size < pop_size")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not 0.0 < self.vmax_frac <= 1.0:
            raise ValueError("vmax_frac must be in (0, 1]")
        if self.refresh_gap < 1:
            raise ValueError("refresh_gap must be >= 1")
        if self.learn_prob is not None:
            pc = tuple(float(v) for v in self.learn_prob)
            if len(pc) != self.pop_size or not all(0.0 < v < 1.0 for v in pc):
                raise ValueError("learn_prob needs pop_size entries in (0, 1)")
            object.__setattr__(self, "learn_prob", pc)

    @property
    def exploit_size(self):
        return self.pop_size - self.explore_size

    @property
    def pc(self):
        return _learn_prob_table(self.pop_size, self.learn_prob)

    def _linear(self, pair, g):
        start, end = pair
        return start + (end - start) * g / self.max_iters

    def w(self, g):
        return self._linear(self.inertia, g)

    def k(self, g):
        return self._linear(self.explore_accel, g)

    def c1(self, g):
        return 2.5 - 2.0 * g / self.max_iters

    def c2(self, g):
        return 0.5 + 2.0 * g / self.max_iters


@functools.lru_cache(maxsize=256)
def des_matrix(dim, n, seed, config=None):
    """A ``(dim, n)`` DES point set (cached; generation is deterministic)."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NotConverged)
        if n == 1:
            return np.full((dim, 1), 0.5)
        ps = generate_des(n, dim, config, seed=seed)
    m = np.ascontiguousarray(ps.coords.T)
    m.setflags(write=False)
    return m


@dataclass
class SequenceSource:
    """Where the uniform ``[0, 1]`` matrices of each update come from.

    In ``des`` mode ``p0`` (D x N), ``p1`` (D x N1) and ``p2`` (D x N2)
    replace the initial-population, exploration and exploitation random
    matrices.  With ``permute`` (the default for :meth:`des`) their columns
    are shuffled every iteration, so each particle meets a different point
    of the set; without it the same matrices are reused unchanged, which
    leaves a particle with a small coefficient in some dimension stuck with
    it for the whole run.  The gbest-attraction
    coefficients stay random in both modes.
    """

    mode: str = RANDOM
    seed: int = 0
    p0: np.ndarray | None = None
    p1: np.ndarray | None = None
    p2: np.ndarray | None = None
    permute: bool = False

    def __post_init__(self):
        if self.mode not in (RANDOM, DES):
            raise ValueError(f"unknown sequence mode {self.mode!r}")
        if self.mode == DES and any(m is None for m in (self.p0, self.p1, self.p2)):
            raise ValueError("des mode needs p0, p1 and p2")

    @classmethod
    def random(cls, seed=0):
        return cls(RANDOM, seed)

    @classmethod
    def des(cls, dim, config, seed=0, des_config=None, permute=True):
        s0, s1, s2 = (int(v) for v in np.random.SeedSequence(seed).generate_state(3))
        return cls(
            DES, seed,
            p0=des_matrix(dim, config.pop_size, s0, des_config),
            p1=des_matrix(dim, config.explore_size, s1, des_config),
            p2=des_matrix(dim, config.exploit_size, s2, des_config),
            permute=permute,
        )

    def check(self, dim, config):
        if self.mode != DES:
            return
        want = {"p0": (dim, config.pop_size), "p1": (dim, config.explore_size), "p2": (dim, config.exploit_size)}
        for name, shape in want.items():
            got = np.shape(getattr(self, name))
            if got != shape:
                raise ShapeMismatch(f"{name} has shape {got}, expected {shape}")

    def _pick(self, m, rng):
        if self.permute:
            return m[:, rng.permutation(m.shape[1])]
        return m

    def initial(self, rng, dim, n):
        if self.mode == DES:
            if self.p0.shape != (dim, n):
                raise ShapeMismatch(f"p0 has shape {self.p0.shape}, expected {(dim, n)}")
            return self.p0
        return rng.random((dim, n))

    def explore(self, rng, dim, n1):
        if self.mode == DES:
            return self._pick(self.p1, rng)
        return rng.random((dim, n1))

    def exploit(self, rng, dim, n2):
        if self.mode == DES:
            return self._pick(self.p2, rng)
        return rng.random((dim, n2))


@dataclass
class Swarm:
    positions: np.ndarray
    velocities: np.ndarray
    pbest_pos: np.ndarray
    pbest_val: np.ndarray
    exemplars: np.ndarray
    exemplar_source: np.ndarray
    stagnation: np.ndarray
    gbest_pos: np.ndarray
    gbest_val: float
    explore_size: int
    iter: int = 0
    evals: int = 0

    @property
    def dim(self):
        return self.positions.shape[0]

    @property
    def size(self):
        return self.positions.shape[1]


@dataclass
class RunReport:
    """Best objective value after initialisation and after each iteration."""

    evals: list = field(default_factory=list)
    iterations: list = field(default_factory=list)
    values: list = field(default_factory=list)

    def record(self, evals, iteration, value):
        self.evals.append(int(evals))
        self.iterations.append(int(iteration))
        self.values.append(float(value))

    def __len__(self):
        return len(self.evals)

    def negated(self):
        return RunReport(list(self.evals), list(self.iterations), [-v for v in self.values])

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["evals", "iteration", "gbest_value"])
            for e, it, v in zip(self.evals, self.iterations, self.values):
                w.writerow([e, it, format(v, ".17g")])

    @classmethod
    def from_csv(cls, path):
        rep = cls()
        with open(path, newline="") as fh:
            for row in csv.DictReader(fh):
                rep.record(int(row["evals"]), int(row["iteration"]), float(row["gbest_value"]))
        return rep


def init_population(space, n, source, rng=None):
    rng = rng if rng is not None else np.random.default_rng(source.seed)
    eps = source.initial(rng, space.dim, n)
    a = np.outer(space.lower, np.ones(n))
    b = np.outer(space.upper, np.ones(n))
    return a + eps * (b - a)


def _tournament(cands, pbest_val):
    a, b = cands[..., 0], cands[..., 1]
    va, vb = pbest_val[a], pbest_val[b]
    return np.where((va < vb) | ((va == vb) & (a <= b)), a, b)


def build_exemplars(idx, swarm, pc, rng):
    """Comprehensive-learning exemplars for the particles in ``idx``.

    Per dimension, with probability ``pc[i]`` the coordinate comes from the
    winner of a two-candidate fitness tournament (lower pbest value wins,
    ties to the lower index), otherwise from the particle's own pbest.
    Exploration particles draw candidates from their own subpopulation,
    exploitation particles from the whole swarm; a particle never draws
    itself.  If no dimension learned, one random dimension is forced to.

    Returns ``(exemplars, sources)``, both ``(D, len(idx))``.
    """
    idx = np.asarray(idx, dtype=int)
    m, dim, n, n1 = idx.size, swarm.dim, swarm.size, swarm.explore_size
    pool = np.where(idx < n1, n1, n)
    pool = np.where(pool > 1, pool, n)
    learn = rng.random((m, dim)) < np.asarray(pc, dtype=float).reshape(m, 1)
    r = rng.integers(0, (pool - 1)[:, None, None], size=(m, dim, 2))
    cands = r + (r >= idx[:, None, None])
    lazy = np.flatnonzero(~learn.any(axis=1))
    if lazy.size:
        learn[lazy, rng.integers(dim, size=lazy.size)] = True
    source = np.where(learn, _tournament(cands, swarm.pbest_val), idx[:, None])
    exemplars = swarm.pbest_pos[np.arange(dim)[None, :], source]
    return exemplars.T, source.T


def build_exemplar(i, swarm, pc, rng):
    """Exemplar for a single particle; see :func:`build_exemplars`."""
    ex, src = build_exemplars([i], swarm, [pc], rng)
    return ex[:, 0], src[:, 0]


def _clamp_velocity(v, vmax):
    return np.clip(v, -vmax, vmax)


def explore_velocities(v, p, x, w, k, eps, vmax):
    return _clamp_velocity(w * v + k * (eps * (p - x)), vmax)


def exploit_velocities(v, p, x, gbest, w, c1, c2, eps2, eps3, vmax):
    return _clamp_velocity(w * v + c1 * (eps2 * (p - x)) + c2 * (eps3 * (gbest - x)), vmax)


def _vmax(space, config):
    return config.vmax_frac * space.width


def velocity_exploration(swarm, i, w, k, eps, vmax=np.inf):
    if not i < swarm.explore_size:
        raise IndexError(f"particle {i} is not in the exploration subpopulation")
    return explore_velocities(
        swarm.velocities[:, i], swarm.exemplars[:, i], swarm.positions[:, i], w, k, np.asarray(eps), vmax
    )


def velocity_exploitation(swarm, i, w, c1, c2, eps2, eps3, vmax=np.inf):
    if not swarm.explore_size <= i < swarm.size:
        raise IndexError(f"particle {i} is not in the exploitation subpopulation")
    return exploit_velocities(
        swarm.velocities[:, i], swarm.exemplars[:, i], swarm.positions[:, i], swarm.gbest_pos,
        w, c1, c2, np.asarray(eps2), np.asarray(eps3), vmax,
    )


def _evaluate(objective, x, vectorized):
    if vectorized:
        vals = np.asarray(objective(x), dtype=float).reshape(x.shape[1])
    else:
        vals = np.array([objective(x[:, j]) for j in range(x.shape[1])], dtype=float).reshape(x.shape[1])
    if not np.all(np.isfinite(vals)):
        bad = int(np.flatnonzero(~np.isfinite(vals))[0])
        raise NonFiniteObjective(f"objective returned {vals[bad]!r} at {x[:, bad].tolist()}")
    return vals


def init_swarm(objective, space, config, source, rng, vectorized=False):
    source.check(space.dim, config)
    n, dim = config.pop_size, space.dim
    x = init_population(space, n, source, rng)
    vals = _evaluate(objective, x, vectorized)
    best = int(np.argmin(vals))
    swarm = Swarm(
        positions=x, velocities=np.zeros((dim, n)), pbest_pos=x.copy(), pbest_val=vals.copy(),
        exemplars=None, exemplar_source=None,
        stagnation=np.zeros(n, dtype=int), gbest_pos=x[:, best].copy(), gbest_val=float(vals[best]),
        explore_size=config.explore_size, evals=n,
    )
    swarm.exemplars, swarm.exemplar_source = build_exemplars(np.arange(n), swarm, config.pc, rng)
    return swarm


def step(swarm, objective, space, config, source, rng, vectorized=False):
    """Advance the swarm one iteration in place and return it."""
    g, n1 = swarm.iter, swarm.explore_size
    dim, n = swarm.dim, swarm.size
    vmax = _vmax(space, config)[:, None]
    w = config.w(g)

    eps1 = source.explore(rng, dim, n1)
    eps2 = source.exploit(rng, dim, n - n1)
    eps3 = rng.random((dim, n - n1))

    x, v, p = swarm.positions, swarm.velocities, swarm.exemplars
    new_v = np.empty_like(v)
    new_v[:, :n1] = explore_velocities(v[:, :n1], p[:, :n1], x[:, :n1], w, config.k(g), eps1, vmax)
    new_v[:, n1:] = exploit_velocities(
        v[:, n1:], p[:, n1:], x[:, n1:], swarm.gbest_pos[:, None],
        w, config.c1(g), config.c2(g), eps2, eps3, vmax,
    )
    new_x = x + new_v
    lo, hi = space.lower[:, None], space.upper[:, None]
    outside = (new_x < lo) | (new_x > hi)
    new_x = np.clip(new_x, lo, hi)
    new_v[outside] = 0.0

    vals = _evaluate(objective, new_x, vectorized)
    swarm.positions, swarm.velocities = new_x, new_v
    swarm.evals += n

    improved = vals < swarm.pbest_val
    swarm.pbest_pos[:, improved] = new_x[:, improved]
    swarm.pbest_val[improved] = vals[improved]
    swarm.stagnation[improved] = 0
    swarm.stagnation[~improved] += 1

    best = int(np.argmin(swarm.pbest_val))
    if swarm.pbest_val[best] < swarm.gbest_val:
        swarm.gbest_val = float(swarm.pbest_val[best])
        swarm.gbest_pos = swarm.pbest_pos[:, best].copy()

    stale = np.flatnonzero(swarm.stagnation >= config.refresh_gap)
    if stale.size:
        swarm.exemplars[:, stale], swarm.exemplar_source[:, stale] = build_exemplars(
            stale, swarm, config.pc[stale], rng
        )
        swarm.stagnation[stale] = 0

    swarm.iter += 1
    return swarm


def optimize(objective, space, config=None, source=None, seed=0, vectorized=False):
    """Minimise ``objective`` over ``space``.

    With ``vectorized=True`` the objective receives a ``(D, N)`` array and
    returns ``N`` values; otherwise it is called once per particle with a
    length-``D`` vector.  Returns ``(best_position, best_value, report)``.
    """
    config = config or PsoConfig()
    source = source or SequenceSource.random(seed)
    rng = np.random.default_rng(seed)
    swarm = init_swarm(objective, space, config, source, rng, vectorized)
    report = RunReport()
    report.record(swarm.evals, 0, swarm.gbest_val)
    for _ in range(config.max_iters):
        step(swarm, objective, space, config, source, rng, vectorized)
        report.record(swarm.evals, swarm.iter, swarm.gbest_val)
    return swarm.gbest_pos.copy(), swarm.gbest_val, report


def convergence_steps(report, target, tol):
    """Evaluations until the best value is within ``tol`` of ``target``; None if never."""
    if not tol > 0:
        raise ValueError("tol must be > 0")
    for evals, val in zip(report.evals, report.values):
        if abs(val - target) <= tol:
            return evals
    return None

"""Dynamic evolution sequences (DES).

N mutually repelling particles on the unit torus are relaxed under damped
dynamics until they stop moving; the stationary configuration is a
low-discrepancy point set.  The heavy lifting (pair energy and forces) is
done by :mod:`despso.kernels`.
"""
import csv
import logging
import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels

log = logging.getLogger(__name__)

COINCIDENT_TOL = 1e-12
JITTER = 1e-9
SOFTEN_AFTER = 25  # accepted steps before a stiffened integrator is relaxed again


class DesError(Exception):
    pass


class CoincidentPoints(DesError):
    """Two points share a location, so the potential diverges."""


class ZeroNorm(DesError):
    pass


class NotConverged(UserWarning):
    """Relaxation hit ``max_steps`` before becoming stationary."""


@dataclass(frozen=True)
class DesConfig:
    q: float = 2.0
    p: float = 20.0
    big_g: float = 1.0
    dt: float = 0.1
    kappa: float = 1.0
    max_steps: int = 10_000
    stop_tol: float = 1e-8

    def __post_init__(self):
        for name in ("q", "p", "dt", "kappa", "stop_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)!r}")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")
        if self.big_g != 1.0:
            raise ValueError("big_g is fixed at 1")


@dataclass(frozen=True, eq=False)
class PointSet:
    """``count`` points in ``[0, 1]^dim`` stored row-wise in ``coords``."""

    coords: np.ndarray
    steps: int = 0
    converged: bool = True

    def __post_init__(self):
        c = np.array(self.coords, dtype=np.float64, ndmin=2)
        if c.ndim != 2:
            raise ValueError("coords must be a 2-D (N, D) array")
        if np.any(c < 0.0) or np.any(c > 1.0):
            raise ValueError("coordinates must lie in [0, 1]")
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)

    @property
    def count(self):
        return self.coords.shape[0]

    @property
    def dim(self):
        return self.coords.shape[1]

    def __len__(self):
        return self.count

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([f"dim_{k}" for k in range(self.dim)])
            for row in self.coords:
                w.writerow([format(v, ".17g") for v in row])

    @classmethod
    def from_csv(cls, path):
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        return cls(np.array([[float(v) for v in r] for r in rows[1:]]))


def _coords(points):
    if isinstance(points, PointSet):
        return points.coords
    return np.ascontiguousarray(np.array(points, dtype=np.float64, ndmin=2))


def wrap(x):
    """Map coordinates onto the torus ``[0, 1)``."""
    w = np.mod(x, 1.0)
    return np.where(w >= 1.0, 0.0, w)


def pairwise_distance(xi, xj, q):
    delta = np.abs(np.asarray(xi, dtype=float) - np.asarray(xj, dtype=float))
    om = 1.0 - delta
    terms = delta**2 * om**2 / (om**q + delta**q) ** (2.0 / q)
    return math.sqrt(float(np.sum(terms)) / 2.0)


def potential_energy(points, q, p, big_g=1.0):
    x = _coords(points)
    if x.shape[0] < 2:
        raise ValueError("need at least two points")
    u, dmin = kernels.energy(x, q, p)
    if dmin <= 0.0:
        raise CoincidentPoints("potential diverges: two points coincide")
    return big_g * u


def forces(points, q, p, big_g=1.0):
    """All ``f_ik`` as an (N, D) array.

    ``f`` equals twice the gradient of :func:`potential_energy`: the
    distance carries a factor 1/2 under its square root that the force
    expression does not.
    """
    x = _coords(points)
    if x.shape[0] < 2:
        raise ValueError("need at least two points")
    _, f, dmin = kernels.energy_forces(x, q, p, big_g)
    if dmin <= 0.0:
        raise CoincidentPoints("force undefined: two points coincide")
    return f


def force(points, i, k, q, p, big_g=1.0):
    return float(forces(points, q, p, big_g)[i, k])


@dataclass(frozen=True, eq=False)
class DesState:
    """Two consecutive configurations plus the integrator coefficients.

    ``stiffness`` is the ``U(X0)/||X0||_F^2`` ratio that fixes mass and
    damping; ``scale`` multiplies it after a rejected (energy-raising) step.
    """

    current: np.ndarray
    previous: np.ndarray
    mass: float
    damping: float
    dt: float
    step: int
    energy: float
    forces: np.ndarray = field(repr=False)
    previous_energy: float
    displacement: float
    stiffness: float
    scale: float = 1.0

    @property
    def a0(self):
        return self.mass / self.dt**2 + self.damping / (2.0 * self.dt)

    @property
    def a1(self):
        return 2.0 * self.mass / self.dt**2

    @property
    def a2(self):
        return self.mass / self.dt**2 - self.damping / (2.0 * self.dt)


def mass_damping(stiffness, config, scale=1.0):
    k = scale * stiffness
    m = (1.0 + config.kappa) / 4.0 * k * config.dt**2
    c = k * math.sqrt(config.kappa) * config.dt
    return m, c


def _evaluate(x, config, rng=None):
    """Energy and forces at ``x``, separating coincident points if ``rng`` is given."""
    u, f, dmin = kernels.energy_forces(x, config.q, config.p, config.big_g)
    if dmin < COINCIDENT_TOL:
        if rng is None:
            raise CoincidentPoints(f"pairwise distance {dmin:.3g} below {COINCIDENT_TOL}")
        x = _separate(x, config.q, rng)
        u, f, dmin = kernels.energy_forces(x, config.q, config.p, config.big_g)
    return x, u, f


def _separate(x, q, rng):
    x = x.copy()
    for _ in range(100):
        d = kernels.pair_distances(x, q)
        np.fill_diagonal(d, np.inf)
        close = np.argwhere(np.triu(d < COINCIDENT_TOL))
        if close.size == 0:
            return x
        for j in np.unique(close[:, 1]):
            x[j] = wrap(x[j] + JITTER * rng.uniform(-1.0, 1.0, x.shape[1]))
    raise CoincidentPoints("could not separate coincident points")


def _first_step(x, u, f, stiffness, scale, config, step, rng=None):
    m, c = mass_damping(stiffness, config, scale)
    moved = x - 0.5 / m * f * config.dt**2
    disp = float(np.max(np.abs(moved - x)))
    new, u_new, f_new = _evaluate(wrap(moved), config, rng)
    return DesState(
        current=new, previous=x, mass=m, damping=c, dt=config.dt, step=step,
        energy=u_new, forces=f_new, previous_energy=u, displacement=disp,
        stiffness=stiffness, scale=scale,
    )


def init_dynamics(x0, config, rng=None):
    x = _coords(x0).copy()
    if x.shape[0] < 2:
        raise ValueError("need at least two points")
    x, u, f = _evaluate(x, config, rng)
    norm2 = float(np.sum(x * x))
    if norm2 == 0.0:
        raise ZeroNorm("initial configuration has zero Frobenius norm")
    return _first_step(x, u, f, u / norm2, 1.0, config, 1, rng)


def symplectic_step(state, config, rng=None):
    # (a1 x - a2 x_prev - f) / a0 rewritten with a1 = a0 + a2, so a state at rest with
    # zero force stays put bit for bit
    moved = state.current + (state.a2 * (state.current - state.previous) - state.forces) / state.a0
    disp = float(np.max(np.abs(moved - state.current)))
    new, u, f = _evaluate(wrap(moved), config, rng)
    return replace(
        state, current=new, previous=state.current, step=state.step + 1,
        energy=u, forces=f, previous_energy=state.energy, displacement=disp,
    )


def restart(state, config, rng=None):
    """Discard momentum and double the stiffness scale."""
    return _first_step(
        state.previous, state.previous_energy, _evaluate(state.previous, config)[2],
        state.stiffness, 2.0 * state.scale, config, state.step, rng,
    )


def soften(state, config):
    """Halve the stiffness scale (never below 1), keeping the current velocity."""
    scale = max(1.0, state.scale / 2.0)
    m, c = mass_damping(state.stiffness, config, scale)
    return replace(state, mass=m, damping=c, scale=scale)


def relax(x0, config, rng=None):
    """Yield accepted states until stationary or ``max_steps`` is reached.

    A step that raises the potential is rolled back and retried with a
    stiffer (smaller-step) integrator; without this the dynamics diverge.
    After ``SOFTEN_AFTER`` accepted steps in a row the stiffness is halved
    again so the late, flat phase is not crawled through at the worst-case
    step size.
    """
    state = init_dynamics(x0, config, rng)
    accepted = 0
    while True:
        if state.energy > state.previous_energy * (1.0 + 1e-12):
            if state.step >= config.max_steps:
                return
            state = restart(state, config, rng)
            state = replace(state, step=state.step + 1)
            accepted = 0
            continue
        yield state
        if state.displacement < config.stop_tol or state.step >= config.max_steps:
            return
        accepted += 1
        if accepted >= SOFTEN_AFTER and state.scale > 1.0:
            state = soften(state, config)
            accepted = 0
        state = symplectic_step(state, config, rng)


def generate_des(n, dim, config=None, seed=0):
    if n < 2:
        raise ValueError("n must be >= 2")
    if dim < 1:
        raise ValueError("dim must be >= 1")
    config = config or DesConfig()
    rng = np.random.default_rng(seed)
    x0 = rng.random((n, dim))
    last = None
    for last in relax(x0, config, rng):
        pass
    if last is None:
        coords, steps, converged = x0, config.max_steps, False
    else:
        coords, steps = last.current, last.step
        converged = last.displacement < config.stop_tol
    if not converged:
        warnings.warn(f"DES relaxation not stationary after {steps} steps", NotConverged, stacklevel=2)
    return PointSet(coords, steps=steps, converged=converged)


def centered_l2_discrepancy(points):
    x = _coords(points)
    if x.shape[0] < 1:
        raise ValueError("need at least one point")
    return math.sqrt(max(kernels.centered_l2_sq(x), 0.0))

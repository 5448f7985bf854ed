"""Pure-numpy versions of the compiled kernels in ``_kernels.pyx``."""
import numpy as np


def _deltas(x):
    return np.abs(x[:, None, :] - x[None, :, :])


def _pair_term(delta, q):
    om = 1.0 - delta
    return delta**2 * om**2 / (om**q + delta**q) ** (2.0 / q)


def _pair_grad(delta, q):
    om = 1.0 - delta
    return delta * om * (om ** (q + 1.0) - delta ** (q + 1.0)) / (om**q + delta**q) ** (1.0 + 2.0 / q)


def pair_distances(x, q):
    x = np.ascontiguousarray(x, dtype=np.float64)
    return np.sqrt(_pair_term(_deltas(x), q).sum(axis=-1) / 2.0)


def _upper(d):
    return d[np.triu_indices(d.shape[0], 1)]


def energy(x, q, p):
    """Return ``(U, dmin)``; ``U`` is ``inf`` when two points coincide."""
    d = _upper(pair_distances(x, q))
    dmin = d.min()
    if dmin <= 0.0:
        return np.inf, dmin
    s = np.sum((dmin / d) ** p)
    return s ** (1.0 / p) / dmin, dmin


def energy_forces(x, q, p, big_g):
    """Return ``(U, F, dmin)`` for an (N, D) point array."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    n = x.shape[0]
    dmat = pair_distances(x, q)
    dmin = _upper(dmat).min()
    if dmin <= 0.0:
        return np.inf, np.zeros_like(x), dmin
    s = np.sum((dmin / _upper(dmat)) ** p)
    np.fill_diagonal(dmat, np.inf)
    diff = x[:, None, :] - x[None, :, :]
    a = np.sign(diff) * _pair_grad(np.abs(diff), q)
    w = (dmin / dmat) ** p / dmat**2
    forces = -big_g * s ** ((1.0 - p) / p) / dmin * np.einsum("ij,ijk->ik", w, a)
    return big_g * s ** (1.0 / p) / dmin, forces, dmin


def centered_l2_sq(x):
    x = np.ascontiguousarray(x, dtype=np.float64)
    n, dim = x.shape
    z = np.abs(x - 0.5)
    t2 = np.prod(1.0 + 0.5 * z - 0.5 * z**2, axis=1).sum()
    cross = 1.0 + 0.5 * z[:, None, :] + 0.5 * z[None, :, :] - 0.5 * np.abs(x[:, None, :] - x[None, :, :])
    t3 = np.prod(cross, axis=2).sum()
    return (13.0 / 12.0) ** dim - 2.0 * t2 / n + t3 / n**2

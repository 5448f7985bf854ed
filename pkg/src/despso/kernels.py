"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the numpy
fallback.  Set ``DESPSO_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("DESPSO_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        pass
    else:
        _impl = _compiled
        BACKEND = "cython"

pair_distances = _impl.pair_distances
energy = _impl.energy
energy_forces = _impl.energy_forces
centered_l2_sq = _impl.centered_l2_sq

__all__ = ["BACKEND", "pair_distances", "energy", "energy_forces", "centered_l2_sq"]

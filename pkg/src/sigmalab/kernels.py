"""Kernel dispatch: the compiled core when importable, numpy otherwise.

Set ``SIGMALAB_PURE_PYTHON=1`` to force the numpy path.
"""
import os

import numpy as np

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if os.environ.get("SIGMALAB_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl  # noqa: F811
        BACKEND = "cython"
    except ImportError:  # pragma: no cover - depends on the build
        pass


def _prep(n, triangles, cot=None):
    n = np.ascontiguousarray(n, dtype=np.float64)
    triangles = np.ascontiguousarray(triangles, dtype=np.int64)
    if cot is None:
        return n, triangles
    return n, triangles, np.ascontiguousarray(cot, dtype=np.float64)


def triangle_energies(n, triangles, cot):
    return np.asarray(_impl.triangle_energies(*_prep(n, triangles, cot)))


def energy_gradient(n, triangles, cot):
    return np.asarray(_impl.energy_gradient(*_prep(n, triangles, cot)))


def signed_solid_angles(n, triangles):
    return np.asarray(_impl.signed_solid_angles(*_prep(n, triangles)))

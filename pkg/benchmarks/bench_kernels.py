"""Compare the compiled and numpy kernels on icosphere meshes.

Usage::

    python benchmarks/bench_kernels.py [--subdivisions 3 4 5 6] [--repeat 20]
"""
import argparse
import timeit

import numpy as np

from sigmalab import _pykernels
from sigmalab.geometry import build_icosphere

try:
    from sigmalab import _ckernels
except ImportError:  # pragma: no cover - depends on the build
    _ckernels = None

KERNELS = ("triangle_energies", "energy_gradient", "signed_solid_angles")


def _args(mesh, name, values):
    tri = np.ascontiguousarray(mesh.triangles, dtype=np.int64)
    if name == "signed_solid_angles":
        return values, tri
    return values, tri, np.ascontiguousarray(mesh.triangle_cotangents, dtype=np.float64)


def bench(subdivisions, repeat: int = 20):
    rng = np.random.default_rng(0)
    rows = []
    for s in subdivisions:
        mesh = build_icosphere(s)
        v = rng.standard_normal((mesh.n_vertices, 3))
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        for name in KERNELS:
            args = _args(mesh, name, v)
            t_py = min(timeit.repeat(lambda: getattr(_pykernels, name)(*args), number=1, repeat=repeat))
            t_c = None
            if _ckernels is not None:
                t_c = min(timeit.repeat(lambda: getattr(_ckernels, name)(*args), number=1, repeat=repeat))
                a = np.asarray(getattr(_ckernels, name)(*args))
                b = np.asarray(getattr(_pykernels, name)(*args))
                assert np.allclose(a, b, rtol=1e-12, atol=1e-12), name
            rows.append((s, mesh.n_triangles, name, t_py, t_c))
    return rows


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--subdivisions", type=int, nargs="+", default=[3, 4, 5, 6])
    p.add_argument("--repeat", type=int, default=20)
    args = p.parse_args(argv)
    print(f"{'s':>2} {'triangles':>9} {'kernel':<20} {'numpy ms':>9} {'cython ms':>10} {'speedup':>8}")
    for s, nt, name, t_py, t_c in bench(args.subdivisions, args.repeat):
        c = f"{1e3 * t_c:10.3f} {t_py / t_c:7.1f}x" if t_c else f"{'n/a':>10} {'':>8}"
        print(f"{s:>2} {nt:>9} {name:<20} {1e3 * t_py:9.3f} {c}")


if __name__ == "__main__":
    main()

"""Pure-numpy kernels; the reference used when the compiled core is absent."""
import numpy as np


def triangle_energies(n, triangles, cot):
    """Per-triangle Dirichlet energy ``(1/16) sum_k cot_k |n_a - n_b|^2``.

    Corner ``k`` is opposite edge ``(k+1, k+2)``.
    """
    p = n[triangles]
    d0 = p[:, 1] - p[:, 2]
    d1 = p[:, 2] - p[:, 0]
    d2 = p[:, 0] - p[:, 1]
    s = (cot[:, 0] * np.einsum("ij,ij->i", d0, d0)
         + cot[:, 1] * np.einsum("ij,ij->i", d1, d1)
         + cot[:, 2] * np.einsum("ij,ij->i", d2, d2))
    return s / 16.0


def energy_gradient(n, triangles, cot):
    """Unprojected gradient of the summed triangle energies, shape ``(V, 3)``."""
    nv = len(n)
    p = n[triangles]
    grad = np.zeros((nv, 3))
    for k in range(3):
        a = triangles[:, (k + 1) % 3]
        b = triangles[:, (k + 2) % 3]
        g = (cot[:, k] / 8.0)[:, None] * (p[:, (k + 1) % 3] - p[:, (k + 2) % 3])
        for c in range(3):
            grad[:, c] += np.bincount(a, weights=g[:, c], minlength=nv)
            grad[:, c] -= np.bincount(b, weights=g[:, c], minlength=nv)
    return grad


def signed_solid_angles(n, triangles):
    """Oriented area of the geodesic image triangles (Van Oosterom-Strackee)."""
    a = n[triangles[:, 0]]
    b = n[triangles[:, 1]]
    c = n[triangles[:, 2]]
    num = np.einsum("ij,ij->i", a, np.cross(b, c))
    den = (1.0 + np.einsum("ij,ij->i", a, b) + np.einsum("ij,ij->i", b, c)
           + np.einsum("ij,ij->i", c, a))
    return 2.0 * np.arctan2(num, den)

"""Shared test helpers."""
import numpy as np

from sigmalab.energy import dirichlet_energy, lattice_energy_gradient
from sigmalab.field import LatticeField


def retract(n, v):
    m = n + v
    return m / np.linalg.norm(m, axis=1, keepdims=True)


def fd_check(f: LatticeField, rng, h=1e-5):
    """Relative error between the analytic and central-difference directional derivative."""
    g = lattice_energy_gradient(f)
    v = rng.standard_normal(f.values.shape)
    v -= np.einsum("ij,ij->i", v, f.values)[:, None] * f.values
    v[f.basing.vertices] = 0.0
    v /= np.linalg.norm(v)
    ep = dirichlet_energy(f.mesh, retract(f.values, h * v))
    em = dirichlet_energy(f.mesh, retract(f.values, -h * v))
    fd = (ep - em) / (2 * h)
    an = float(np.sum(g * v))
    return abs(fd - an) / max(abs(an), 1e-300)

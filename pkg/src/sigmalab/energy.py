"""Discrete sigma-model energy, its gradient, the lattice degree and a radial oracle.

Normalization: ``E = (1/8) sum_edges w_ij |n_i - n_j|^2`` with cotan weights
``w_ij = (cot a + cot b) / 2``.  In the continuum this is
``(1/8) int |dn|^2 dA``, equal to ``1/2 int (|dW/dz|^2 + |dW/dzbar|^2)
/ (1 + |W|^2)^2 dx dy`` with the measure fixed so that the identity map
(and every degree-1 holomorphic map) has energy exactly ``pi``.  The
Bogomolny bound then reads ``E >= pi |deg|``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy import integrate

from . import kernels
from .errors import DivergentEnergy, ShapeMismatch, Unresolved
from .field import LatticeField, RadialProfile
from .geometry import DomainMesh

DEGREE_TOL = 0.01
BOGOMOLNY_SLACK = 0.01


class Degree(NamedTuple):
    raw: float
    degree: int
    resolved: bool


@dataclass
class EnergyReport:
    E: float
    per_triangle_density: np.ndarray = field(repr=False)
    degree_raw: float
    degree: int
    bogomolny_gap: float
    resolved: bool = True
    below_bound: bool = False

    def to_dict(self) -> dict:
        return {
            "E": self.E,
            "degreeRaw": self.degree_raw,
            "degree": self.degree,
            "bogomolnyGap": self.bogomolny_gap,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _check_shape(mesh: DomainMesh, values: np.ndarray) -> None:
    if np.shape(values) != (mesh.n_vertices, 3):
        raise ShapeMismatch(f"values have shape {np.shape(values)}, mesh has {mesh.n_vertices} vertices")


def triangle_energies(mesh: DomainMesh, values: np.ndarray) -> np.ndarray:
    """Per-triangle share of the Dirichlet energy (each is >= 0)."""
    _check_shape(mesh, values)
    return kernels.triangle_energies(values, mesh.triangles, mesh.triangle_cotangents)


def dirichlet_energy(mesh: DomainMesh, values: np.ndarray) -> float:
    return float(np.sum(triangle_energies(mesh, values)))


def lattice_degree(f: LatticeField) -> Degree:
    """Normalized sum of the oriented solid angles of the image triangles."""
    return degree_of_values(f.mesh, f.values)


def degree_of_values(mesh: DomainMesh, values: np.ndarray) -> Degree:
    _check_shape(mesh, values)
    raw = float(np.sum(kernels.signed_solid_angles(values, mesh.triangles)) / (4.0 * math.pi))
    deg = int(round(raw))
    return Degree(raw, deg, abs(raw - deg) < DEGREE_TOL)


def lattice_energy(f: LatticeField) -> EnergyReport:
    dens = triangle_energies(f.mesh, f.values)
    E = float(np.sum(dens))
    d = lattice_degree(f)
    gap = E - math.pi * abs(d.degree)
    return EnergyReport(
        E=E,
        per_triangle_density=dens,
        degree_raw=d.raw,
        degree=d.degree,
        bogomolny_gap=gap,
        resolved=d.resolved,
        below_bound=gap < -BOGOMOLNY_SLACK * E,
    )


def project_tangent(values: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    return vectors - np.einsum("ij,ij->i", vectors, values)[:, None] * values


def energy_gradient_values(mesh: DomainMesh, values: np.ndarray, pinned=None) -> np.ndarray:
    """Tangent-projected energy gradient with rows at ``pinned`` vertices zeroed."""
    _check_shape(mesh, values)
    g = kernels.energy_gradient(values, mesh.triangles, mesh.triangle_cotangents)
    g = project_tangent(values, g)
    if pinned is not None and len(pinned):
        g[pinned] = 0.0
    return g


def lattice_energy_gradient(f: LatticeField) -> np.ndarray:
    """Gradient of :func:`lattice_energy` on the product of target spheres.

    Each row lies in the tangent plane of the corresponding field value;
    rows of basing vertices are zero.
    """
    return energy_gradient_values(f.mesh, f.values, f.basing.vertices)


def bogomolny_check(report: EnergyReport) -> float:
    """``E - pi |deg|``; negative values beyond the slack set ``report.below_bound``."""
    if not report.resolved:
        raise Unresolved(f"degree {report.degree_raw:.4f} is not resolved")
    return report.E - math.pi * abs(report.degree)


# ---------------------------------------------------------------------------
# radial oracle


def _radial_integrand(profile: RadialProfile, m: int):
    m2 = float(m * m)

    def g(r):
        f = float(profile(r))
        fp = float(profile.d(r))
        if math.isinf(f):
            return 0.0
        den = (1.0 + f * f) ** 2
        if math.isinf(den):
            # f large but finite: divide term by term to avoid inf/inf
            return ((fp / f) ** 2 + m2 / (r * r)) / (f * f) * r
        return (fp * fp + m2 * f * f / (r * r)) / den * r

    return g


def radial_energy(profile: RadialProfile, m: int, r_max: float | None = None, tol: float = 1e-10) -> float:
    """Continuum energy of the hedgehog field ``W = f(|z|)(z/|z|)**m``.

    ``pi * int_0^inf (f'^2 + m^2 f^2 / r^2) r / (1 + f^2)^2 dr``, by adaptive
    Gauss-Kronrod quadrature on the smooth pieces of ``f``.

    Raises
    ------
    DivergentEnergy
        If ``m != 0`` and ``f`` tends to a finite nonzero value at ``r = 0``
        or ``r = inf``.
    """
    r_max = profile.r_max if r_max is None else r_max
    f0 = float(profile(0.0))
    f_inf = float(profile(np.inf if not np.isfinite(r_max) else r_max))
    if m != 0:
        if math.isfinite(f0) and f0 != 0.0:
            raise DivergentEnergy(f"f(0) = {f0:g} with winding {m}: energy diverges at the origin")
        if math.isfinite(f_inf) and f_inf != 0.0:
            raise DivergentEnergy(f"f(inf) = {f_inf:g} with winding {m}: energy diverges at infinity")
    cuts = sorted({0.0, *(b for b in profile.breakpoints if 0.0 < b < r_max)})
    if math.isfinite(r_max):
        cuts.append(float(r_max))
    else:
        cuts.append(np.inf)
    g = _radial_integrand(profile, m)
    pieces = len(cuts) - 1
    total = math.fsum(
        integrate.quad(g, a, b, epsabs=tol / pieces, epsrel=1e-13, limit=500)[0]
        for a, b in zip(cuts[:-1], cuts[1:])
    )
    return math.pi * total

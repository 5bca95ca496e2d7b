"""The shrinking degree-1 family with coincident basing values.

With marked points ``z = +1, -1`` both sent to ``W = 0``, the map

    W_eps(z) = eps^2 / z                     for |z| < eps
             = h(|z|/eps) eps^2 / z          for eps <= |z| <= 2 eps
             = 0                             for |z| > 2 eps

has degree 1, satisfies the basing conditions, and its energy exceeds
``pi`` by at most ``c eps^2``, where ``c`` depends only on the cut-off ``h``.
Its energy therefore tends to ``pi`` while no based degree-1 map reaches it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from .energy import lattice_degree, lattice_energy, radial_energy
from .errors import EpsilonTooLarge, ExperimentFailure
from .field import BasingData, LatticeField, RadialProfile, hedgehog_field
from .geometry import SOUTH_POLE, build_icosphere, cylinder_marked_points, graded_refinement


@dataclass(frozen=True)
class CutoffFunction:
    """Smooth decay ``h`` from 1 at ``rho <= 1`` to 0 at ``rho >= 2``."""

    h: Callable[[np.ndarray], np.ndarray]
    dh: Callable[[np.ndarray], np.ndarray]
    name: str = "cutoff"

    def __call__(self, rho):
        rho = np.asarray(rho, dtype=float)
        return np.where(rho <= 1.0, 1.0, np.where(rho >= 2.0, 0.0, self.h(np.clip(rho, 1.0, 2.0))))

    def derivative(self, rho):
        rho = np.asarray(rho, dtype=float)
        inside = (rho > 1.0) & (rho < 2.0)
        return np.where(inside, self.dh(np.clip(rho, 1.0, 2.0)), 0.0)


def smoothstep_cutoff() -> CutoffFunction:
    """``h(rho) = 1 - S(rho - 1)`` with the quintic smoothstep ``S(t) = 6t^5 - 15t^4 + 10t^3``."""

    def h(rho):
        t = rho - 1.0
        return 1.0 - t ** 3 * (10.0 - 15.0 * t + 6.0 * t * t)

    def dh(rho):
        t = rho - 1.0
        return -30.0 * t * t * (1.0 - t) ** 2

    return CutoffFunction(h, dh, "quintic smoothstep")


def unit_test_double() -> CutoffFunction:
    """``h = 1`` on [1, 2]: violates the decay requirement, used only to check quadrature."""
    return CutoffFunction(lambda rho: np.ones(np.shape(rho)), lambda rho: np.zeros(np.shape(rho)), "constant 1")


def cutoff_constant(h: CutoffFunction, tol: float = 1e-10) -> float:
    """``c = pi int_1^2 rho [(h'/rho - h/rho^2)^2 + h^2/rho^4] d rho``."""

    def g(rho):
        hv = float(h.h(rho))
        dv = float(h.dh(rho))
        return rho * ((dv / rho - hv / rho ** 2) ** 2 + hv * hv / rho ** 4)

    val, _ = integrate.quad(g, 1.0, 2.0, epsabs=tol / math.pi, epsrel=1e-13, limit=200)
    return math.pi * val


@dataclass(frozen=True)
class ShrinkingMap:
    """Hedgehog form of ``W_eps``: radial profile plus winding ``m = -1``."""

    eps: float
    profile: RadialProfile
    m: int = -1
    cutoff: CutoffFunction = field(default_factory=smoothstep_cutoff, repr=False)

    def w(self, z):
        """Closed form of the map, evaluated directly on complex ``z``."""
        z = np.asarray(z, dtype=complex)
        r = np.abs(z)
        eps = self.eps
        cut = self.cutoff(r / eps)
        with np.errstate(divide="ignore", invalid="ignore"):
            w = np.where(r > 2 * eps, 0.0, cut * eps * eps / z)
        return np.where(r == 0.0, complex(np.inf, 0.0), w)


def shrinking_map(eps: float, h: CutoffFunction | None = None) -> ShrinkingMap:
    """Radial profile ``g_eps`` of ``W_eps``.

    Raises
    ------
    EpsilonTooLarge
        Unless ``0 < eps < 1/2``; otherwise the support ``|z| <= 2 eps``
        reaches the marked points ``|z| = 1``.
    """
    if not (0.0 < eps < 0.5):
        raise EpsilonTooLarge(f"eps = {eps} must lie in (0, 1/2)")
    h = smoothstep_cutoff() if h is None else h
    e2 = eps * eps

    def g(r):
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore"):
            core = e2 / r
        return np.where(r > 2 * eps, 0.0, h(r / eps) * core)

    def dg(r):
        r = np.asarray(r, dtype=float)
        rho = r / eps
        with np.errstate(divide="ignore", invalid="ignore"):
            inner = -e2 / (r * r)
            ring = h.derivative(rho) / rho - h(rho) / (rho * rho)
        return np.where(r < eps, inner, np.where(r <= 2 * eps, ring, 0.0))

    profile = RadialProfile(g, dg, breakpoints=(e2, eps, 2 * eps), r_max=2 * eps, name=f"g_eps eps={eps:g}")
    return ShrinkingMap(eps, profile, -1, h)


def shrinking_mesh(eps: float, subdivisions: int = 3, levels_factor: float = 3.0):
    """Icosphere graded towards ``z = 0`` down to the core scale ``eps**2``.

    Geodesic distance from the south pole is about ``2|z|`` near ``z = 0``,
    so the finest ball (radius ``~ eps**2``) resolves the ``|W| ~ 1`` core.
    """
    outer = min(1.2, 8.0 * eps)
    inner = 0.5 * eps * eps
    return build_icosphere(
        subdivisions,
        cylinder_marked_points(),
        graded_refinement(SOUTH_POLE, outer, inner, factor=levels_factor),
    )


def shrinking_field(eps: float, mesh=None, h: CutoffFunction | None = None) -> LatticeField:
    """``W_eps`` sampled on ``mesh`` with both marked points based at ``W = 0``."""
    mesh = shrinking_mesh(eps) if mesh is None else mesh
    sm = shrinking_map(eps, h)
    basing = BasingData.for_mesh(mesh, [0.0] * mesh.k)
    return hedgehog_field(mesh, sm.profile, sm.m, basing)


@dataclass
class ShrinkingFamilyResult:
    epsilons: list
    energies: list
    lattice_energies: list
    degrees: list
    degrees_raw: list
    c_constant: float
    fit_quadratic_coefficient: float
    fit_intercept: float
    fit_relative_residual: float
    n_vertices: list = field(default_factory=list)

    def bounds(self) -> list:
        return [math.pi + self.c_constant * e * e for e in self.epsilons]

    def rows(self):
        for e, E, L, d, b in zip(self.epsilons, self.energies, self.lattice_energies, self.degrees, self.bounds()):
            yield e, E, L, d, b

    def summary(self) -> dict:
        return {
            "c": self.c_constant,
            "fitCoefficient": self.fit_quadratic_coefficient,
            "fitIntercept": self.fit_intercept,
            "fitRelativeResidual": self.fit_relative_residual,
            "epsilons": self.epsilons,
        }


def fit_quadratic_law(epsilons: Sequence[float], energies: Sequence[float]):
    """Least squares for ``E - pi = a eps^2`` and for ``E = b + a' eps^2``.

    Returns ``(a, relative_residual, b)``; the relative residual is
    ``|resid| / |E - pi|`` of the one-parameter fit.
    """
    x = np.asarray(epsilons, dtype=float) ** 2
    y = np.asarray(energies, dtype=float) - math.pi
    a = float(x @ y / (x @ x))
    rel = float(np.linalg.norm(y - a * x) / np.linalg.norm(y))
    A = np.vstack([np.ones_like(x), x]).T
    b, _ = np.linalg.lstsq(A, np.asarray(energies, dtype=float), rcond=None)[0]
    return a, rel, float(b)


def sweep_shrinking_family(
    epsilons: Sequence[float],
    subdivisions: int = 3,
    h: CutoffFunction | None = None,
    lattice: bool = True,
    lattice_tolerance: float = 0.02,
) -> ShrinkingFamilyResult:
    """Oracle and lattice energies of ``W_eps`` over ``epsilons``.

    Raises
    ------
    ExperimentFailure
        If a degree differs from 1, an oracle energy leaves
        ``(pi, pi + c eps^2]``, or a lattice energy misses the oracle by more
        than ``lattice_tolerance`` (relative).
    """
    eps_list = sorted(float(e) for e in epsilons)
    if len(eps_list) < 3:
        raise ValueError("need at least three values of eps")
    for e in eps_list:
        if not (0.0 < e < 0.5):
            raise EpsilonTooLarge(f"eps = {e} must lie in (0, 1/2)")
    h = smoothstep_cutoff() if h is None else h
    c = cutoff_constant(h)
    energies, lat, degs, raws, nvs = [], [], [], [], []
    for e in eps_list:
        sm = shrinking_map(e, h)
        E = radial_energy(sm.profile, sm.m)
        energies.append(E)
        if lattice:
            mesh = shrinking_mesh(e, subdivisions)
            fld = shrinking_field(e, mesh, h)
            rep = lattice_energy(fld)
            d = lattice_degree(fld)
            lat.append(rep.E)
            degs.append(d.degree)
            raws.append(d.raw)
            nvs.append(mesh.n_vertices)
        if not (math.pi < E <= math.pi + c * e * e):
            raise ExperimentFailure(f"eps={e}: E={E!r} outside (pi, pi + c eps^2] with c={c!r}")
        if lattice:
            if d.degree != 1 or not d.resolved:
                raise ExperimentFailure(f"eps={e}: lattice degree {d.raw:.4f} is not 1")
            if abs(rep.E - E) > lattice_tolerance * E:
                raise ExperimentFailure(f"eps={e}: lattice energy {rep.E:.6f} vs oracle {E:.6f}")
    a, rel, b = fit_quadratic_law(eps_list, energies)
    return ShrinkingFamilyResult(eps_list, energies, lat, degs, raws, c, a, b, rel, nvs)

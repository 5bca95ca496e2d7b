"""Canned experiments: the building blocks behind ``sigmalab run``.

Every function here is deterministic given its arguments (random
initializations take an explicit seed) and returns plain data; writing
artifacts is left to the command line layer.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .energy import lattice_energy, radial_energy
from .family import (
    cutoff_constant,
    fit_quadratic_law,
    shrinking_field,
    shrinking_map,
    smoothstep_cutoff,
    sweep_shrinking_family,
    unit_test_double,
)
from .field import BasingData, LatticeField, power_profile, random_based_field, target_from_w
from .flow import FlowConfig, FlowTrace, Outcome, descend
from .geometry import SpherePoint, build_icosphere, cylinder_marked_points
from .ratmaps import rational_field, solve_based_mobius
from .sectors import same_sector, sector_of

CUTOFFS = {"smoothstep": smoothstep_cutoff, "constant": unit_test_double}

#: default collapse start: wide enough that the lump core starts above
#: three edge lengths of the s=4 icosphere, so the shrinking is observed
COLLAPSE_EPS = 0.45
#: attainment tolerances from the dichotomy check
CONVERGED_TOL = 0.01 * math.pi
COLLAPSED_TOL = 0.05 * math.pi


def collapse_mesh(subdivisions: int = 4, refine_radius=None):
    refine = None
    if refine_radius:
        radii = refine_radius if isinstance(refine_radius, (list, tuple)) else [refine_radius]
        south = SpherePoint.from_stereo(0.0)
        refine = [(south, float(r)) for r in radii]
    return build_icosphere(subdivisions, cylinder_marked_points(), refine)


def _rotation_between(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Rotation matrix taking unit vector ``a`` to unit vector ``b``."""
    v = np.cross(a, b)
    c = float(a @ b)
    if c < -1.0 + 1e-12:
        # antipodal: half turn about any axis orthogonal to a
        axis = np.cross(a, [1.0, 0.0, 0.0])
        if np.linalg.norm(axis) < 1e-8:
            axis = np.cross(a, [0.0, 1.0, 0.0])
        axis /= np.linalg.norm(axis)
        return 2.0 * np.outer(axis, axis) - np.eye(3)
    K = np.array([[0, -v[2], v[1]], [v[2], 0, -v[0]], [-v[1], v[0], 0]])
    return np.eye(3) + K + K @ K / (1.0 + c)


def rotate_target(f: LatticeField, R: np.ndarray) -> LatticeField:
    """Compose a field with a target rotation; energy and degree are unchanged."""
    vals = f.values @ R.T
    vals /= np.linalg.norm(vals, axis=1, keepdims=True)
    basing = BasingData(f.basing.vertices, f.basing.values @ R.T)
    vals[basing.vertices] = basing.values
    return LatticeField(vals, f.mesh, basing)


def coincident_field(eps: float, mesh, q: complex = 0.0, h=None) -> LatticeField:
    """The shrinking-family field with both marked points sent to ``q``."""
    f = shrinking_field(eps, mesh, h)
    target = target_from_w(complex(q))
    if np.allclose(target, f.basing.values[0], atol=1e-15):
        return f
    return rotate_target(f, _rotation_between(f.basing.values[0], target))


def distinct_field(mesh, q1: complex, q2: complex) -> LatticeField:
    """The based degree-1 rational map sending the marked points to ``q1, q2``."""
    p = [complex(z) for z in mesh.vertex_stereo[mesh.marked]]
    maps, _ = solve_based_mobius(p[0], p[1], q1, q2)
    if not maps:
        raise ValueError("no based degree-1 map: basing values coincide")
    basing = BasingData.for_mesh(mesh, [q1, q2])
    return rational_field(maps[0], mesh, basing)


def perturbed(f: LatticeField, seed: int, amplitude: float = 0.3, smooth: int = 5) -> LatticeField:
    if amplitude == 0.0:
        return f
    rng = np.random.default_rng(seed)
    return random_based_field(f.mesh, f.basing, rng, base=f, amplitude=amplitude, smooth=smooth)


# ---------------------------------------------------------------------------
# descent experiments


@dataclass
class DescentResult:
    case: str
    seed: int
    trace: FlowTrace
    initial_E: float
    E_at_detection: float | None = None
    width_monotone: bool = False

    def row(self) -> dict:
        last = self.trace.steps[-1]
        return {
            "case": self.case,
            "seed": self.seed,
            "outcome": self.trace.outcome.value,
            "iterations": self.trace.iterations,
            "initialE": self.initial_E,
            "finalE": last.E,
            "finalDegreeRaw": last.degree_raw,
            "EAtDetection": self.E_at_detection,
            "widthMonotone": self.width_monotone,
        }


def run_descent(initial: LatticeField, config: FlowConfig, case: str = "", seed: int = 0) -> DescentResult:
    trace = descend(initial, config=config)
    E_det = None
    if trace.detected_at is not None:
        E_det = trace.step_at(trace.detected_at).E
    upto = [s.lump_width for s in trace.steps if trace.detected_at is None or s.iteration <= trace.detected_at]
    mono = bool(np.all(np.diff(upto) <= 0.0))
    return DescentResult(case, seed, trace, float(lattice_energy(initial).E), E_det, mono)


def collapse_check(res: DescentResult, require_monotone: bool = True) -> list[str]:
    """Failed conditions of a coincident-basing run (empty if it collapsed as expected)."""
    bad = []
    if res.trace.outcome is not Outcome.COLLAPSED:
        bad.append(f"outcome {res.trace.outcome.value}, expected Collapsed")
    elif res.E_at_detection - math.pi >= COLLAPSED_TOL:
        bad.append(f"E - pi = {res.E_at_detection - math.pi:.4g} at detection, bound {COLLAPSED_TOL:.4g}")
    if require_monotone and not res.width_monotone:
        bad.append("lumpWidth is not monotonically shrinking")
    return bad


def converge_check(res: DescentResult) -> list[str]:
    """Failed conditions of a distinct-basing run (empty if it converged to the lump)."""
    bad = []
    if res.trace.outcome is not Outcome.CONVERGED:
        bad.append(f"outcome {res.trace.outcome.value}, expected Converged")
    gap = res.trace.steps[-1].E - math.pi
    if abs(gap) >= CONVERGED_TOL:
        bad.append(f"final E - pi = {gap:.4g}, bound {CONVERGED_TOL:.4g}")
    return bad


def dichotomy(
    seeds=range(5),
    mesh=None,
    eps: float = COLLAPSE_EPS,
    q_equal: complex = 0.0,
    q_distinct=(0.0, complex(np.inf)),
    amplitude: float = 0.3,
    config: FlowConfig | None = None,
) -> tuple[list[DescentResult], list[DescentResult]]:
    """Perturbed descents for coincident and for distinct basing values."""
    mesh = collapse_mesh() if mesh is None else mesh
    config = config or FlowConfig()
    eq_base = coincident_field(eps, mesh, q_equal)
    ne_base = distinct_field(mesh, *q_distinct)
    eq, ne = [], []
    for s in seeds:
        eq.append(run_descent(perturbed(eq_base, s, amplitude), config, "coincident", s))
        ne.append(run_descent(perturbed(ne_base, 1000 + s, amplitude), config, "distinct", s))
    return eq, ne


# ---------------------------------------------------------------------------
# sectors


@dataclass
class SectorReport:
    labels: dict = field(default_factory=dict)
    pairs: list = field(default_factory=list)  # (name_a, name_b, same, expected)

    @property
    def failures(self) -> list:
        return [p for p in self.pairs if p[2] != p[3]]


def sector_survey(mesh, eps_values=(0.1, 0.2), seed: int = 0, flow_steps: int = 20) -> SectorReport:
    """Classify a handful of fields with coincident basing at ``W = 0``."""
    basing = BasingData.for_mesh(mesh, [0.0] * mesh.k)
    fields = {"constant": LatticeField(np.tile(basing.values[0], (mesh.n_vertices, 1)), mesh, basing)}
    for e in eps_values:
        fields[f"W_{e:g}"] = shrinking_field(e, mesh)
    base = fields[f"W_{eps_values[0]:g}"]
    cfg = FlowConfig(log_every=1)
    for i in range(2):
        start = perturbed(base, seed + i, amplitude=0.05)
        fields[f"flowed_{i}"] = descend(start, max_iter=flow_steps, config=cfg).final_field
    rep = SectorReport({k: sector_of(f).label() for k, f in fields.items()})
    names = list(fields)
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            expected = (a == "constant") == (b == "constant")
            rep.pairs.append((a, b, same_sector(fields[a], fields[b]), expected))
    return rep


# ---------------------------------------------------------------------------
# oracle energies


def oracle_table(epsilons=(0.05, 0.1, 0.2), cutoff: str = "smoothstep") -> dict:
    """Closed-form and quadrature energies that anchor the lattice checks."""
    h = CUTOFFS[cutoff]()
    c = cutoff_constant(h)
    rows = []
    for e in epsilons:
        sm = shrinking_map(e, h)
        E = radial_energy(sm.profile, sm.m)
        rows.append({"eps": e, "E": E, "bound": math.pi + c * e * e})
    return {
        "identity": radial_energy(power_profile(1), 1),
        "zSquared": radial_energy(power_profile(2), 2),
        "c": c,
        "cConstantDouble": cutoff_constant(unit_test_double()),
        "family": rows,
    }


def sweep(epsilons, subdivisions: int = 3, cutoff: str = "smoothstep", lattice: bool = True):
    """Shrinking-family sweep plus the quadratic-law diagnostics."""
    res = sweep_shrinking_family(epsilons, subdivisions, CUTOFFS[cutoff](), lattice=lattice)
    a, rel, b = fit_quadratic_law(res.epsilons, res.energies)
    return res, {"coefficient": a, "relativeResidual": rel, "intercept": b}


__all__ = [
    "COLLAPSE_EPS",
    "DescentResult",
    "SectorReport",
    "coincident_field",
    "collapse_check",
    "collapse_mesh",
    "converge_check",
    "dichotomy",
    "distinct_field",
    "oracle_table",
    "perturbed",
    "rotate_target",
    "run_descent",
    "sector_survey",
    "sweep",
]

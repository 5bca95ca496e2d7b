"""Energy descent inside a fixed multiply based sector.

Projected gradient descent with Armijo backtracking: each step moves vertex
values in their tangent planes and renormalizes (the retraction); basing
vertices never move.  Two outcomes are told apart:

* ``CONVERGED`` -- the gradient falls below ``g_tol``, as happens when the
  sector contains a holomorphic lump (the minimum is attained);
* ``COLLAPSED`` -- the core radius ``max_density**-0.5`` falls below a few
  local edge lengths while the peak energy density keeps growing, the
  lattice picture of a bubble shrinking to a point.

A lump of total energy ``pi`` and geodesic scale ``b`` has peak density
``1/b**2``, so the core radius measures ``b`` directly.  The second-moment
``lump_width`` is reported as well; it shrinks with the lump but carries a
logarithmic far-field tail, which makes it a poor trigger.

A collapse on the lattice is numerical evidence that the infimum is not
attained in the continuum, not a proof of it.
"""
from __future__ import annotations

import csv
import enum
import json
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .energy import DEGREE_TOL, degree_of_values, energy_gradient_values, triangle_energies
from .errors import LineSearchFailure, NoLump
from .field import LatticeField, is_based, write_field
from .geometry import DomainMesh, geodesic_distance


class Outcome(enum.Enum):
    CONVERGED = "Converged"
    COLLAPSED = "Collapsed"
    MAX_ITERATIONS = "MaxIterations"


@dataclass(frozen=True)
class FlowStep:
    iteration: int
    E: float
    degree_raw: float
    lump_width: float
    max_density: float
    grad_norm: float
    local_edge: float

    @property
    def core_radius(self) -> float:
        return core_radius(self.max_density)


@dataclass
class FlowTrace:
    steps: list
    outcome: Outcome
    final_field: LatticeField
    iterations: int = 0
    detected_at: int | None = None

    @property
    def energies(self) -> np.ndarray:
        return np.array([s.E for s in self.steps])

    @property
    def widths(self) -> np.ndarray:
        return np.array([s.lump_width for s in self.steps])

    def summary(self) -> dict:
        last = self.steps[-1]
        return {
            "outcome": self.outcome.value,
            "finalE": last.E,
            "iterations": self.iterations,
            "finalDegreeRaw": last.degree_raw,
            "finalLumpWidth": last.lump_width,
            "collapseDetectedAt": self.detected_at,
        }

    def step_at(self, iteration: int) -> FlowStep:
        return next(s for s in self.steps if s.iteration == iteration)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["iteration", "E", "degreeRaw", "lumpWidth", "maxDensity", "coreRadius"])
            for s in self.steps:
                w.writerow([s.iteration, repr(s.E), repr(s.degree_raw), repr(s.lump_width),
                            repr(s.max_density), repr(s.core_radius)])

    def write_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.summary(), fh, indent=2, sort_keys=True)
            fh.write("\n")


# ---------------------------------------------------------------------------
# diagnostics


def _width_from_density(mesh: DomainMesh, dens: np.ndarray) -> float:
    total = dens.sum()
    if total <= 0.0:
        raise NoLump("field has zero energy")
    c = mesh.triangle_centroids
    mean = (dens[:, None] * c).sum(axis=0)
    norm = np.linalg.norm(mean)
    if norm == 0.0:
        # density spread symmetrically over the whole sphere
        return math.pi / 2
    mean /= norm
    d = geodesic_distance(c, mean)
    return float(math.sqrt((dens * d * d).sum() / total))


def lump_width(f: LatticeField) -> float:
    """Energy-weighted RMS geodesic distance of triangle centroids from their
    density-weighted mean.

    Raises
    ------
    NoLump
        For a field with zero energy.
    """
    return _width_from_density(f.mesh, triangle_energies(f.mesh, f.values))


def core_radius(max_density: float) -> float:
    """Geodesic scale of a lump whose peak energy density is ``max_density``."""
    return math.inf if max_density <= 0.0 else max_density ** -0.5


def _diagnostics(mesh: DomainMesh, values: np.ndarray, dens: np.ndarray | None = None):
    if dens is None:
        dens = triangle_energies(mesh, values)
    E = float(dens.sum())
    if E > 0.0:
        width = _width_from_density(mesh, dens)
        local_edge = float((dens * mesh.triangle_edge_lengths).sum() / E)
    else:
        width, local_edge = 0.0, float(mesh.triangle_edge_lengths.mean())
    max_density = float((dens / mesh.triangle_areas).max())
    return E, width, max_density, local_edge


def monitor_degree(trace: FlowTrace):
    """``(iteration, degree_raw)`` per logged step and the first flagged iteration.

    A step is flagged when its raw degree drifts more than 0.01 from the
    initial integer degree; ``None`` if no step is flagged.
    """
    if not trace.steps:
        raise ValueError("empty trace")
    d0 = round(trace.steps[0].degree_raw)
    rows = [(s.iteration, s.degree_raw) for s in trace.steps]
    flagged = next((it for it, raw in rows if abs(raw - d0) > DEGREE_TOL), None)
    return rows, flagged


# ---------------------------------------------------------------------------
# descent


@dataclass
class FlowConfig:
    max_iter: int = 20000
    g_tol: float = 1e-4
    collapse_threshold: float = 3.0
    log_every: int = 10
    step0: float = 0.5
    step_max: float = 4.0
    armijo: float = 1e-4
    max_backtracks: int = 40
    snapshot_every: int = 0
    snapshot_dir: str | None = None
    stop_on_collapse: bool = True


def _retract(values: np.ndarray, step: np.ndarray) -> np.ndarray:
    v = values + step
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def descend(
    initial: LatticeField,
    max_iter: int | None = None,
    g_tol: float | None = None,
    config: FlowConfig | None = None,
    callback: Callable[[FlowStep], None] | None = None,
) -> FlowTrace:
    """Projected gradient descent from a based field.

    Raises
    ------
    ValueError
        If ``initial`` does not satisfy its basing conditions.
    LineSearchFailure
        If no step length decreases the energy.

    Notes
    -----
    With ``config.stop_on_collapse = False`` the descent runs on after a
    collapse is detected (the outcome stays ``COLLAPSED`` and
    ``detected_at`` records the iteration), which shows what the lattice
    does once the lump is below the mesh scale.
    """
    cfg = config or FlowConfig()
    max_iter = cfg.max_iter if max_iter is None else max_iter
    g_tol = cfg.g_tol if g_tol is None else g_tol
    ok, res = is_based(initial)
    if not ok:
        raise ValueError(f"initial field is not based (residual {res:.3g})")
    mesh = initial.mesh
    pinned = initial.basing.vertices
    values = np.array(initial.values)
    dens = triangle_energies(mesh, values)
    E = float(dens.sum())
    g = energy_gradient_values(mesh, values, pinned)
    gnorm = float(np.linalg.norm(g))
    t = cfg.step0
    steps: list[FlowStep] = []

    def log(it: int, diag) -> FlowStep:
        E_, width, maxd, local = diag
        s = FlowStep(it, E_, degree_of_values(mesh, values).raw, width, maxd, gnorm, local)
        steps.append(s)
        if callback is not None:
            callback(s)
        if cfg.snapshot_every and cfg.snapshot_dir and it % cfg.snapshot_every == 0:
            write_field(initial.with_values(values), f"{cfg.snapshot_dir}/snapshot_{it:07d}.txt")
        return s

    diag = _diagnostics(mesh, values, dens)
    log(0, diag)
    outcome = Outcome.MAX_ITERATIONS
    detected_at = None
    it = 0
    while it < max_iter:
        if gnorm < g_tol:
            if detected_at is None:
                outcome = Outcome.CONVERGED
            break
        g2 = gnorm * gnorm
        for _ in range(cfg.max_backtracks):
            trial = _retract(values, -t * g)
            trial[pinned] = initial.values[pinned]
            dens_trial = triangle_energies(mesh, trial)
            E_trial = float(dens_trial.sum())
            if E_trial <= E - cfg.armijo * t * g2:
                break
            t *= 0.5
        else:
            raise LineSearchFailure(f"no decrease after {cfg.max_backtracks} backtracks at iteration {it}")
        values, E, dens = trial, E_trial, dens_trial
        g = energy_gradient_values(mesh, values, pinned)
        gnorm = float(np.linalg.norm(g))
        t = min(t * 1.25, cfg.step_max)
        it += 1
        prev_maxd = diag[2]
        diag = _diagnostics(mesh, values, dens)
        collapsed = detected_at is None and _collapsing(diag, prev_maxd, cfg.collapse_threshold)
        if collapsed or it % cfg.log_every == 0:
            log(it, diag)
        if collapsed:
            outcome, detected_at = Outcome.COLLAPSED, it
            if cfg.stop_on_collapse:
                break
    if steps[-1].iteration != it:
        log(it, diag)
    return FlowTrace(steps, outcome, initial.with_values(values), it, detected_at)


def _collapsing(diag, prev_max_density: float, threshold: float) -> bool:
    _, _, max_density, local_edge = diag
    return core_radius(max_density) < threshold * local_edge and max_density > prev_max_density

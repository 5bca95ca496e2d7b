"""Topological sectors of multiply based fields.

For maps from the sphere to the sphere with ``k`` marked points sent to fixed
values, two based maps are homotopic through based maps exactly when they
have the same degree: the target is simply connected, so the basing data add
no invariants beyond the choice of values itself.  A sector is therefore
labelled by ``(degree, basing values)`` and deciding equivalence needs no
explicit homotopy.

The decision is only valid for a simply connected target.  For targets such
as the real projective plane the fundamental group contributes further
invariants, and :func:`same_sector` refuses to decide.  For domains other
than the sphere the free classes are not a single integer either; the
descriptor here is specific to sphere-to-sphere maps.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .energy import lattice_degree
from .errors import BasingViolation, IncomparableFields, NotSimplyConnected, Unresolved
from .field import BASED_TOL, LatticeField, format_w, is_based, target_from_w, w_from_target


@dataclass(frozen=True, eq=False)
class SectorDescriptor:
    degree: int
    basing_values: tuple  # unit vectors in the target
    marked_vertices: tuple

    def __eq__(self, other) -> bool:
        if not isinstance(other, SectorDescriptor):
            return NotImplemented
        if self.degree != other.degree or self.marked_vertices != other.marked_vertices:
            return False
        if len(self.basing_values) != len(other.basing_values):
            return False
        if not self.basing_values:
            return True
        a, b = np.array(self.basing_values), np.array(other.basing_values)
        return bool(np.all(np.linalg.norm(a - b, axis=1) < BASED_TOL))

    __hash__ = None  # equality is tolerance based

    @property
    def q(self) -> list:
        return [complex(w) for w in w_from_target(np.array(self.basing_values).reshape(-1, 3))]

    def label(self) -> str:
        qs = ",".join(format_w(w) for w in self.q)
        return f"deg={self.degree}, q=({qs})"

    def to_dict(self) -> dict:
        return {
            "degree": self.degree,
            "basingValues": [list(map(float, v)) for v in self.basing_values],
            "markedVertices": list(self.marked_vertices),
            "label": self.label(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "SectorDescriptor":
        d = json.loads(text)
        return cls(int(d["degree"]), tuple(tuple(v) for v in d["basingValues"]), tuple(d["markedVertices"]))

    @classmethod
    def from_w(cls, degree: int, qs, marked_vertices) -> "SectorDescriptor":
        vals = target_from_w(np.asarray(qs, dtype=complex)).reshape(-1, 3)
        return cls(int(degree), tuple(tuple(map(float, v)) for v in vals), tuple(int(v) for v in marked_vertices))


def sector_of(f: LatticeField) -> SectorDescriptor:
    """Degree and basing data of a based field.

    Raises
    ------
    BasingViolation
        If the field does not take its basing values.
    Unresolved
        If the lattice degree is not within 0.01 of an integer.
    """
    ok, res = is_based(f)
    if not ok:
        raise BasingViolation(f"basing residual {res:.3g} exceeds {BASED_TOL:g}")
    d = lattice_degree(f)
    if not d.resolved:
        raise Unresolved(f"lattice degree {d.raw:.4f} is not within 0.01 of an integer")
    return SectorDescriptor(
        d.degree,
        tuple(tuple(map(float, v)) for v in f.basing.values),
        tuple(int(v) for v in f.basing.vertices),
    )


def same_sector(f: LatticeField, g: LatticeField, simply_connected_target: bool = True) -> bool:
    """Whether two based fields lie in the same based homotopy class.

    Both fields must share the mesh and the basing data: fields with
    different basing values live in different function spaces, so they are
    incomparable rather than in different sectors.

    Raises
    ------
    NotSimplyConnected
        If ``simply_connected_target`` is false; the degree test is then
        incomplete.
    IncomparableFields
        For different meshes or basing data.
    """
    if not simply_connected_target:
        raise NotSimplyConnected("sector decision is only valid for a simply connected target")
    if f.mesh is not g.mesh and not _same_mesh(f.mesh, g.mesh):
        raise IncomparableFields("fields live on different meshes")
    if not f.basing.same_as(g.basing):
        raise IncomparableFields(f"basing data differ: {f.basing.label()} vs {g.basing.label()}")
    return sector_of(f) == sector_of(g)


def _same_mesh(a, b) -> bool:
    return (
        a.triangles.shape == b.triangles.shape
        and np.array_equal(a.triangles, b.triangles)
        and np.array_equal(a.vertices, b.vertices)
    )

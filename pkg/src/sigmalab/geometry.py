"""Domain-sphere geometry: stereographic charts, icospheres and cotan weights.

Conventions
-----------
The South chart is ``z = (x + i y) / (1 - x3)``, projecting from the north
pole ``(0, 0, 1)``; ``z = 0`` is the south pole and ``|z| = 1`` the equator.
The North chart is ``z_N = (x - i y) / (1 + x3) = 1 / z_S``.  The same
convention is used for the target sphere, so ``W = 0`` is the target south
pole and ``W = inf`` the target north pole.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    ChartSingularity,
    DegenerateTriangle,
    InvalidCoordinate,
    MarkedPointCollision,
)

UNIT_TOL = 1e-12


class Chart(enum.Enum):
    SOUTH = "south"
    NORTH = "north"


@dataclass(frozen=True)
class SpherePoint:
    """A point of the unit 2-sphere, stored as a unit 3-vector."""

    n: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.n, dtype=float).reshape(3)
        norm = np.linalg.norm(v)
        if not np.isfinite(norm) or norm == 0.0:
            raise InvalidCoordinate(f"cannot normalize {v!r}")
        v = v / norm
        v.setflags(write=False)
        object.__setattr__(self, "n", v)

    @classmethod
    def from_stereo(cls, z, chart: Chart = Chart.SOUTH) -> "SpherePoint":
        return sphere_from_stereo(StereoCoord(z, chart))

    def stereo(self, chart: Chart = Chart.SOUTH) -> "StereoCoord":
        return stereo_from_sphere(self, chart)

    def distance(self, other: "SpherePoint") -> float:
        """Geodesic (great-circle) distance."""
        return float(geodesic_distance(self.n, other.n))


@dataclass(frozen=True)
class StereoCoord:
    z: complex
    chart: Chart = Chart.SOUTH


SOUTH_POLE = SpherePoint(np.array([0.0, 0.0, -1.0]))
NORTH_POLE = SpherePoint(np.array([0.0, 0.0, 1.0]))


# ---------------------------------------------------------------------------
# vectorized chart maps


def _pole_sign(chart: Chart) -> float:
    return 1.0 if chart is Chart.SOUTH else -1.0


def stereo_array(points: np.ndarray, chart: Chart = Chart.SOUTH) -> np.ndarray:
    """Stereographic coordinates of an ``(N, 3)`` array of unit vectors.

    The projection pole of the chart maps to ``complex(inf, 0)``.
    """
    p = np.asarray(points, dtype=float)
    x, y, x3 = p[..., 0], p[..., 1], p[..., 2]
    if chart is Chart.SOUTH:
        num, den = x + 1j * y, 1.0 - x3
    else:
        num, den = x - 1j * y, 1.0 + x3
    out = np.empty(np.shape(x), dtype=complex)
    pole = den <= 0.0
    # near the pole use the algebraically equivalent form (x + iy)(1 + x3)/(x^2 + y^2)
    rho2 = x * x + y * y
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        direct = num / den
        other = num * (1.0 + _pole_sign(chart) * x3) / rho2
    use_other = (den < 0.5) & (rho2 > 0.0)
    out[...] = np.where(use_other, other, direct)
    out[pole] = complex(np.inf, 0.0)
    return out


def sphere_array(z: np.ndarray, chart: Chart = Chart.SOUTH) -> np.ndarray:
    """Inverse of :func:`stereo_array`; infinite ``z`` maps to the chart pole."""
    z = np.asarray(z, dtype=complex)
    out = np.empty(z.shape + (3,), dtype=float)
    inf = ~np.isfinite(z)
    big = np.abs(z) > 1.0
    with np.errstate(divide="ignore", invalid="ignore"):
        small_z = np.where(big | inf, 0.0, z)
        r2 = np.abs(small_z) ** 2
        x = 2.0 * small_z / (1.0 + r2)
        x3 = (r2 - 1.0) / (r2 + 1.0)
        u = np.where(big & ~inf, 1.0 / np.where(big & ~inf, z, 1.0), 0.0)
        u2 = np.abs(u) ** 2
        xb = 2.0 * np.conj(u) / (1.0 + u2)
        x3b = (1.0 - u2) / (1.0 + u2)
    xy = np.where(big | inf, xb, x)
    x3 = np.where(big | inf, x3b, x3)
    sign = _pole_sign(chart)
    out[..., 0] = xy.real
    out[..., 1] = sign * xy.imag
    out[..., 2] = sign * x3
    return out


def stereo_from_sphere(p: SpherePoint, chart: Chart = Chart.SOUTH) -> StereoCoord:
    """Project a sphere point into the given chart.

    Raises
    ------
    ChartSingularity
        If ``p`` is the chart's projection pole.
    """
    pole = NORTH_POLE.n if chart is Chart.SOUTH else SOUTH_POLE.n
    if np.linalg.norm(p.n - pole) < 1e-15:
        raise ChartSingularity(f"{p.n} is the projection pole of the {chart.value} chart")
    z = complex(stereo_array(p.n[None, :], chart)[0])
    return StereoCoord(z, chart)


def sphere_from_stereo(c: StereoCoord) -> SpherePoint:
    if not np.isfinite(c.z):
        raise InvalidCoordinate(f"non-finite stereographic coordinate {c.z!r}")
    return SpherePoint(sphere_array(np.array([c.z]), c.chart)[0])


def geodesic_distance(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Great-circle distance between unit vectors (broadcasting, atan2 form)."""
    cross = np.linalg.norm(np.cross(a, b), axis=-1)
    dot = np.sum(np.asarray(a) * np.asarray(b), axis=-1)
    return np.arctan2(cross, dot)


def chordal_distance(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.linalg.norm(np.asarray(a) - np.asarray(b), axis=-1)


# ---------------------------------------------------------------------------
# meshes


@dataclass(frozen=True)
class DomainMesh:
    """Closed, outward-oriented triangulation of the unit sphere.

    Attributes
    ----------
    vertices : (V, 3) float array of unit vectors
    triangles : (F, 3) int array, counter-clockwise seen from outside
    marked : (k,) int array of marked vertex indices, in order
    snap_distances : (k,) geodesic distances between requested marked points
        and the vertices they were snapped to
    """

    vertices: np.ndarray
    triangles: np.ndarray
    marked: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    snap_distances: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        for name, dtype in (("vertices", float), ("triangles", np.int64),
                            ("marked", np.int64), ("snap_distances", float)):
            arr = np.array(getattr(self, name), dtype=dtype)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    @property
    def k(self) -> int:
        return len(self.marked)

    @cached_property
    def edges(self) -> np.ndarray:
        """Sorted unique undirected edges, shape ``(E, 2)`` with ``i < j``."""
        t = self.triangles
        e = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
        e.sort(axis=1)
        return np.unique(e, axis=0)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def euler_characteristic(self) -> int:
        return self.n_vertices - self.n_edges + self.n_triangles

    @cached_property
    def vertex_stereo(self) -> np.ndarray:
        """South-chart coordinate of each vertex (``inf`` at the north pole)."""
        return stereo_array(self.vertices, Chart.SOUTH)

    @cached_property
    def triangle_cotangents(self) -> np.ndarray:
        """``(F, 3)`` cotangent of the angle at each corner of each planar triangle."""
        return _corner_cotangents(self.vertices, self.triangles)

    @cached_property
    def cotan_weights(self) -> np.ndarray:
        """Per-edge weights ``(cot a + cot b) / 2`` aligned with :attr:`edges`."""
        t = self.triangles
        cot = self.triangle_cotangents
        # corner k is opposite edge (k+1, k+2)
        e = np.concatenate([t[:, [1, 2]], t[:, [2, 0]], t[:, [0, 1]]])
        w = np.concatenate([cot[:, 0], cot[:, 1], cot[:, 2]]) * 0.5
        e.sort(axis=1)
        key = e[:, 0] * self.n_vertices + e[:, 1]
        ekey = self.edges[:, 0] * self.n_vertices + self.edges[:, 1]
        idx = np.searchsorted(ekey, key)
        return np.bincount(idx, weights=w, minlength=len(ekey))

    @cached_property
    def triangle_areas(self) -> np.ndarray:
        return triangle_area_weights(self)

    @cached_property
    def triangle_centroids(self) -> np.ndarray:
        c = self.vertices[self.triangles].mean(axis=1)
        return c / np.linalg.norm(c, axis=1, keepdims=True)

    @cached_property
    def triangle_edge_lengths(self) -> np.ndarray:
        """``(F,)`` mean chord length of the three edges of each triangle."""
        p = self.vertices[self.triangles]
        lens = np.linalg.norm(p - np.roll(p, -1, axis=1), axis=2)
        return lens.mean(axis=1)

    def mean_edge_length(self) -> float:
        e = self.edges
        return float(np.linalg.norm(self.vertices[e[:, 0]] - self.vertices[e[:, 1]], axis=1).mean())

    def check(self) -> None:
        """Assert the closed, oriented, genus-0 invariants."""
        if self.euler_characteristic() != 2:
            raise AssertionError(f"Euler characteristic {self.euler_characteristic()} != 2")
        t = self.triangles
        directed = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
        keys = directed[:, 0] * self.n_vertices + directed[:, 1]
        if len(np.unique(keys)) != len(keys):
            raise AssertionError("a directed edge occurs twice: orientation is inconsistent")
        rev = directed[:, 1] * self.n_vertices + directed[:, 0]
        if not np.all(np.isin(rev, keys)):
            raise AssertionError("an edge is not shared by exactly two triangles")
        if len(np.unique(self.marked)) != len(self.marked):
            raise AssertionError("marked vertices are not distinct")

    def with_marked(self, marked_points: Sequence[SpherePoint]) -> "DomainMesh":
        marked, snaps = _snap(self.vertices, marked_points)
        return DomainMesh(self.vertices, self.triangles, marked, snaps)


def _corner_cotangents(vertices: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    p = vertices[triangles]
    cot = np.empty((len(triangles), 3))
    for k in range(3):
        a = p[:, (k + 1) % 3] - p[:, k]
        b = p[:, (k + 2) % 3] - p[:, k]
        cross = np.linalg.norm(np.cross(a, b), axis=1)
        if np.any(cross <= 0.0):
            raise DegenerateTriangle("zero-area triangle in mesh")
        cot[:, k] = np.sum(a * b, axis=1) / cross
    return cot


def triangle_area_weights(mesh: DomainMesh) -> np.ndarray:
    """Planar triangle areas rescaled onto the unit sphere.

    Each flat triangle is scaled by ``1/d**2``, the area factor of central
    projection at its centroid (distance ``d`` from the origin).  The total
    converges to ``4 pi`` at second order in the edge length.
    """
    p = mesh.vertices[mesh.triangles]
    area = 0.5 * np.linalg.norm(np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]), axis=1)
    if np.any(area <= 1e-300):
        raise DegenerateTriangle("zero-area triangle in mesh")
    d2 = np.einsum("ij,ij->i", p.mean(axis=1), p.mean(axis=1))
    return area / d2


# ---------------------------------------------------------------------------
# construction


def _icosahedron() -> tuple[np.ndarray, np.ndarray]:
    """Icosahedron with vertices at both poles, rotated so that the first
    subdivision puts vertices at longitudes 0 and 180 on the equator."""
    zr = 1.0 / math.sqrt(5.0)
    rr = 2.0 / math.sqrt(5.0)
    off = -math.pi / 10.0
    verts = [(0.0, 0.0, 1.0)]
    for k in range(5):
        a = off + 2 * math.pi * k / 5
        verts.append((rr * math.cos(a), rr * math.sin(a), zr))
    for k in range(5):
        a = off + 2 * math.pi * k / 5 + math.pi / 5
        verts.append((rr * math.cos(a), rr * math.sin(a), -zr))
    verts.append((0.0, 0.0, -1.0))
    tris = []
    for k in range(5):
        u0, u1 = 1 + k, 1 + (k + 1) % 5
        l0, l1 = 6 + k, 6 + (k + 1) % 5
        tris.append((0, u0, u1))
        tris.append((u0, l0, u1))
        tris.append((u1, l0, l1))
        tris.append((11, l1, l0))
    v = np.array(verts)
    t = np.array(tris, dtype=np.int64)
    return v, _orient_outward(v, t)


def _orient_outward(v: np.ndarray, t: np.ndarray) -> np.ndarray:
    p = v[t]
    s = np.einsum("ij,ij->i", np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]), p.sum(axis=1))
    t = t.copy()
    flip = s < 0
    t[flip] = t[flip][:, [0, 2, 1]]
    return t


def _quadrisect(v: np.ndarray, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    verts = [tuple(x) for x in v]
    cache: dict[tuple[int, int], int] = {}

    def mid(a: int, b: int) -> int:
        key = (a, b) if a < b else (b, a)
        idx = cache.get(key)
        if idx is None:
            m = (v[a] + v[b]) * 0.5
            m /= np.linalg.norm(m)
            idx = len(verts)
            verts.append(tuple(m))
            cache[key] = idx
        return idx

    out = []
    for a, b, c in t:
        ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
        out.extend([(a, ab, ca), (ab, b, bc), (ca, bc, c), (ab, bc, ca)])
    return np.array(verts), np.array(out, dtype=np.int64)


class _Bisector:
    """Conforming longest-edge (Rivara) bisection on the sphere."""

    def __init__(self, vertices: np.ndarray, triangles: np.ndarray):
        self.v = [tuple(map(float, x)) for x in vertices]
        self.t = [list(map(int, x)) for x in triangles]
        self.edge_tris: dict[tuple[int, int], list[int]] = {}
        for i, tri in enumerate(self.t):
            for e in self._tri_edges(tri):
                self.edge_tris.setdefault(e, []).append(i)

    @staticmethod
    def _tri_edges(tri):
        a, b, c = tri
        return [(a, b) if a < b else (b, a), (b, c) if b < c else (c, b), (c, a) if c < a else (a, c)]

    def _length(self, e) -> float:
        return math.dist(self.v[e[0]], self.v[e[1]])

    def longest_edge(self, i: int) -> tuple[int, int]:
        # ties broken by vertex indices so the propagation chain is well ordered
        return max(self._tri_edges(self.t[i]), key=lambda e: (round(self._length(e), 13), e))

    def refine(self, i: int) -> None:
        while True:
            e = self.longest_edge(i)
            j = next(k for k in self.edge_tris[e] if k != i)
            if self.longest_edge(j) == e:
                self._split_edge(e)
                return
            self.refine(j)

    def _split_edge(self, e: tuple[int, int]) -> None:
        a, b = self.v[e[0]], self.v[e[1]]
        m = (a[0] + b[0], a[1] + b[1], a[2] + b[2])
        nm = math.sqrt(m[0] * m[0] + m[1] * m[1] + m[2] * m[2])
        mi = len(self.v)
        self.v.append((m[0] / nm, m[1] / nm, m[2] / nm))
        for i in self.edge_tris.pop(e):
            tri = self.t[i]
            # rotate so the split edge is (tri[0], tri[1])
            while {tri[0], tri[1]} != set(e):
                tri = tri[1:] + tri[:1]
            u, w, x = tri
            j = len(self.t)
            self.t[i] = [u, mi, x]
            self.t.append([mi, w, x])
            lst = self.edge_tris[(w, x) if w < x else (x, w)]
            lst[lst.index(i)] = j
            self.edge_tris.setdefault((u, mi) if u < mi else (mi, u), []).append(i)
            self.edge_tris.setdefault((mi, x) if mi < x else (x, mi), []).append(i)
            self.edge_tris[(mi, x) if mi < x else (x, mi)].append(j)
            self.edge_tris.setdefault((mi, w) if mi < w else (w, mi), []).append(j)

    def _flags(self, center: np.ndarray, radius: float) -> np.ndarray:
        v, t = self.arrays()
        p = v[t]
        la = np.linalg.norm(p[:, 1] - p[:, 2], axis=1)
        lb = np.linalg.norm(p[:, 2] - p[:, 0], axis=1)
        lc = np.linalg.norm(p[:, 0] - p[:, 1], axis=1)
        area = 0.5 * np.linalg.norm(np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]), axis=1)
        cr = la * lb * lc / (4.0 * area)
        c = p.sum(axis=1)
        c /= np.linalg.norm(c, axis=1, keepdims=True)
        d = geodesic_distance(c, center)
        return (cr >= radius / 16.0) & (d - 2.0 * cr < radius)

    def refine_near(self, center: np.ndarray, radius: float) -> None:
        while True:
            flagged = np.flatnonzero(self._flags(center, radius))
            if len(flagged) == 0:
                return
            n_before = len(self.t)
            for i in flagged:
                # a triangle may already have been split by a neighbour's propagation
                if len(self.t) == n_before or self._still_large(int(i), radius / 16.0):
                    self.refine(int(i))

    def _still_large(self, i: int, target: float) -> bool:
        a, b, c = (self.v[k] for k in self.t[i])
        return max(math.dist(a, b), math.dist(b, c), math.dist(c, a)) >= target

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        return np.array(self.v), np.array(self.t, dtype=np.int64)


def _snap(vertices: np.ndarray, marked_points: Sequence[SpherePoint]):
    marked, snaps = [], []
    for p in marked_points:
        d = geodesic_distance(vertices, p.n)
        i = int(np.argmin(d))
        if i in marked:
            raise MarkedPointCollision(f"marked point {p.n} snaps to vertex {i}, already taken")
        marked.append(i)
        snaps.append(float(d[i]))
    return np.array(marked, dtype=np.int64), np.array(snaps)


def _as_refinements(refine_near) -> list[tuple[SpherePoint, float]]:
    if refine_near is None:
        return []
    if isinstance(refine_near, tuple) and len(refine_near) == 2 and isinstance(refine_near[0], SpherePoint):
        return [refine_near]
    return list(refine_near)


def build_icosphere(
    subdivisions: int,
    marked_points: Sequence[SpherePoint] = (),
    refine_near=None,
) -> DomainMesh:
    """Geodesic icosphere with optional local refinement and marked vertices.

    Parameters
    ----------
    subdivisions : int
        Number of global quadrisection passes; gives ``20 * 4**s`` faces.
    marked_points : sequence of SpherePoint
        Snapped, in order, to their nearest vertices.
    refine_near : (SpherePoint, radius) or list of them, optional
        Triangles meeting the geodesic ball are bisected (longest edge,
        conforming) until their circumradius is below ``radius / 16``.
        Passing a list of nested balls gives a graded mesh.
    """
    if subdivisions < 0:
        raise ValueError("subdivisions must be >= 0")
    pts = list(marked_points)
    for i in range(len(pts)):
        for j in range(i):
            if np.allclose(pts[i].n, pts[j].n, atol=1e-15):
                raise MarkedPointCollision("marked points must be pairwise distinct")
    v, t = _icosahedron()
    for _ in range(subdivisions):
        v, t = _quadrisect(v, t)
    refinements = _as_refinements(refine_near)
    if refinements:
        b = _Bisector(v, t)
        for center, radius in refinements:
            b.refine_near(center.n, float(radius))
        v, t = b.arrays()
    mesh = DomainMesh(v, t)
    if pts:
        mesh = mesh.with_marked(pts)
    return mesh


def graded_refinement(center: SpherePoint, outer: float, inner: float, factor: float = 4.0):
    """Nested balls ``outer, outer/factor, ...`` down to ``inner``, for :func:`build_icosphere`."""
    out = []
    r = outer
    while r >= inner * (1.0 - 1e-12):
        out.append((center, r))
        r /= factor
    return out


def cylinder_marked_points() -> list[SpherePoint]:
    """The two ends of the cylinder placed at ``z = +1`` and ``z = -1``."""
    return [SpherePoint.from_stereo(1.0), SpherePoint.from_stereo(-1.0)]


# ---------------------------------------------------------------------------
# plain-text I/O


def write_mesh(mesh: DomainMesh, path) -> None:
    """Write ``V E F k`` header, vertex lines, triangle lines, one marked line."""
    with open(path, "w") as fh:
        fh.write(f"{mesh.n_vertices} {mesh.n_edges} {mesh.n_triangles} {mesh.k}\n")
        for x in mesh.vertices:
            fh.write(" ".join(repr(float(c)) for c in x) + "\n")
        for tri in mesh.triangles:
            fh.write(" ".join(str(int(c)) for c in tri) + "\n")
        fh.write(" ".join(str(int(c)) for c in mesh.marked) + "\n")


def read_mesh(path) -> DomainMesh:
    with open(path) as fh:
        lines = fh.read().splitlines()
    nv, ne, nf, k = (int(x) for x in lines[0].split())
    verts = np.array([[float(x) for x in ln.split()] for ln in lines[1:1 + nv]])
    tris = np.array([[int(x) for x in ln.split()] for ln in lines[1 + nv:1 + nv + nf]], dtype=np.int64)
    marked_line = lines[1 + nv + nf] if len(lines) > 1 + nv + nf else ""
    marked = np.array([int(x) for x in marked_line.split()], dtype=np.int64)
    if len(marked) != k:
        raise ValueError(f"header declares {k} marked vertices, found {len(marked)}")
    mesh = DomainMesh(verts, tris, marked, np.zeros(k))
    if mesh.n_edges != ne:
        raise ValueError(f"header declares {ne} edges, mesh has {mesh.n_edges}")
    return mesh


def random_sphere_points(rng: np.random.Generator, n: int) -> np.ndarray:
    x = rng.standard_normal((n, 3))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def iter_points(points: Iterable) -> list[SpherePoint]:
    return [p if isinstance(p, SpherePoint) else SpherePoint(np.asarray(p)) for p in points]

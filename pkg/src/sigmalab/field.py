"""Sphere-valued lattice fields, basing data and samplers of closed-form maps.

Field values are unit 3-vectors on the target sphere, so the target point
``W = inf`` (north pole) is an ordinary value.  Closed-form maps are given in
the South chart of both spheres: a callable taking a complex array of domain
coordinates (with ``complex(inf, 0)`` at the domain north pole) and returning
the extended-complex target coordinate.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import BasingViolation, InvalidCoordinate, ShapeMismatch
from .geometry import Chart, DomainMesh, SpherePoint, sphere_array, stereo_array

BASED_TOL = 1e-9
SAMPLED_BASED_TOL = 1e-6
UNIT_TOL = 1e-10

INF = complex(np.inf, 0.0)


def target_from_w(w) -> np.ndarray:
    """Unit vectors for extended-complex target coordinates (``inf`` allowed)."""
    w = np.asarray(w, dtype=complex)
    if np.any(np.isnan(w)):
        raise InvalidCoordinate("map evaluated to NaN")
    return sphere_array(w, Chart.SOUTH)


def w_from_target(n) -> np.ndarray:
    return stereo_array(n, Chart.SOUTH)


@dataclass(frozen=True)
class BasingData:
    """Ordered ``(vertex, q)`` pairs: the discrete form of ``f(p_i) = q_i``.

    ``q`` values may repeat.
    """

    vertices: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.vertices, dtype=np.int64).reshape(-1)
        q = np.array(self.values, dtype=float).reshape(-1, 3)
        if len(v) != len(q):
            raise ValueError("one target value is needed per basing vertex")
        if len(np.unique(v)) != len(v):
            raise ValueError("basing vertices must be distinct")
        q = q / np.linalg.norm(q, axis=1, keepdims=True)
        v.setflags(write=False)
        q.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "values", q)

    @property
    def k(self) -> int:
        return len(self.vertices)

    @classmethod
    def empty(cls) -> "BasingData":
        return cls(np.zeros(0, dtype=np.int64), np.zeros((0, 3)))

    @classmethod
    def from_w(cls, vertices: Sequence[int], qs: Sequence[complex]) -> "BasingData":
        """Basing values given as extended-complex target coordinates."""
        return cls(np.asarray(vertices), target_from_w(np.asarray(qs, dtype=complex)))

    @classmethod
    def for_mesh(cls, mesh: DomainMesh, qs) -> "BasingData":
        """Pair the mesh's marked vertices with ``qs`` (complex or SpherePoint)."""
        if len(qs) != mesh.k:
            raise ValueError(f"mesh has {mesh.k} marked vertices, got {len(qs)} basing values")
        vals = [q.n if isinstance(q, SpherePoint) else target_from_w(complex(q)) for q in qs]
        return cls(mesh.marked, np.array(vals).reshape(-1, 3))

    def validate_for(self, mesh: DomainMesh) -> None:
        if self.k and (self.vertices.min() < 0 or self.vertices.max() >= mesh.n_vertices):
            raise ValueError("basing vertex index out of range for mesh")

    def w_values(self) -> np.ndarray:
        return w_from_target(self.values)

    def same_as(self, other: "BasingData", tol: float = BASED_TOL) -> bool:
        if self.k != other.k or not np.array_equal(self.vertices, other.vertices):
            return False
        return bool(np.all(np.linalg.norm(self.values - other.values, axis=1) < tol))

    def label(self) -> str:
        return "(" + ",".join(format_w(w) for w in self.w_values()) + ")"


def format_w(w: complex) -> str:
    """Short human label for an extended-complex value, e.g. ``0``, ``inf``, ``1-2j``."""
    if not np.isfinite(w):
        return "inf"
    w = complex(round(w.real, 6) + 0.0, round(w.imag, 6) + 0.0)
    if w.imag == 0:
        return f"{w.real:g}"
    if w.real == 0:
        return f"{w.imag:g}j"
    return f"{w.real:g}{w.imag:+g}j"


@dataclass(frozen=True)
class LatticeField:
    """A target unit vector for every vertex of ``mesh``, plus basing data."""

    values: np.ndarray
    mesh: DomainMesh
    basing: BasingData = field(default_factory=BasingData.empty)
    sample_residual: float = 0.0

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.shape != (self.mesh.n_vertices, 3):
            raise ShapeMismatch(f"field shape {vals.shape} does not match mesh with {self.mesh.n_vertices} vertices")
        dev = np.abs(np.linalg.norm(vals, axis=1) - 1.0).max(initial=0.0)
        if dev > UNIT_TOL:
            raise ValueError(f"field values are not unit vectors (max deviation {dev:.3g})")
        self.basing.validate_for(self.mesh)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def with_values(self, values: np.ndarray) -> "LatticeField":
        return LatticeField(values, self.mesh, self.basing)

    def w(self) -> np.ndarray:
        """South-chart target coordinates (``inf`` at the target north pole)."""
        return w_from_target(self.values)

    def basing_residuals(self) -> np.ndarray:
        if self.basing.k == 0:
            return np.zeros(0)
        return np.linalg.norm(self.values[self.basing.vertices] - self.basing.values, axis=1)


def is_based(f: LatticeField, tol: float = BASED_TOL) -> tuple[bool, float]:
    """Whether ``f`` satisfies every basing pair, with the largest chordal residual."""
    r = f.basing_residuals()
    worst = float(r.max(initial=0.0))
    return worst < tol, worst


def _pin_basing(values: np.ndarray, basing: BasingData, tol: float) -> float:
    if basing.k == 0:
        return 0.0
    res = np.linalg.norm(values[basing.vertices] - basing.values, axis=1)
    worst = float(res.max())
    if worst > tol:
        i = int(np.argmax(res))
        raise BasingViolation(
            f"sampled map misses basing value at vertex {basing.vertices[i]} (chordal residual {worst:.3g})"
        )
    values[basing.vertices] = basing.values
    return worst


def sample_from_stereo_map(
    mesh: DomainMesh,
    w_func: Callable[[np.ndarray], np.ndarray],
    basing: BasingData | None = None,
) -> LatticeField:
    """Discretize a closed-form map ``W(z)`` onto the mesh vertices.

    Residuals up to 1e-6 at basing vertices are treated as floating-point
    noise: those vertices are set to their exact basing values and the
    original residual is kept in ``sample_residual``.

    Raises
    ------
    BasingViolation
        If any basing residual exceeds 1e-6.
    """
    basing = BasingData.empty() if basing is None else basing
    z = mesh.vertex_stereo
    w = _evaluate(w_func, z)
    pole = ~np.isfinite(z) & np.isnan(w)
    if np.any(pole):
        # the callable has no rule at z = inf: take the limit along the real axis
        w[pole] = _evaluate(w_func, np.full(int(pole.sum()), 1e30 + 0j))
    values = target_from_w(w).copy()
    worst = _pin_basing(values, basing, SAMPLED_BASED_TOL)
    return LatticeField(values, mesh, basing, worst)


def _evaluate(w_func, z: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        w = np.array(np.broadcast_to(np.asarray(w_func(z), dtype=complex), z.shape))
    w[np.isinf(w.real) | np.isinf(w.imag)] = INF
    return w


def constant_field(mesh: DomainMesh, q, basing: BasingData | None = None) -> LatticeField:
    """Every vertex at ``q`` (a SpherePoint or an extended-complex W)."""
    n = q.n if isinstance(q, SpherePoint) else target_from_w(complex(q))
    values = np.tile(n, (mesh.n_vertices, 1))
    return LatticeField(values, mesh, BasingData.empty() if basing is None else basing)


@dataclass(frozen=True)
class RadialProfile:
    """A radial profile ``f(r) >= 0`` (possibly ``inf`` at 0) and its derivative.

    ``breakpoints`` lists the radii where ``f`` is not smooth or changes
    scale; quadrature splits there.  Beyond ``r_max`` the profile is constant.
    """

    value: Callable[[np.ndarray], np.ndarray]
    derivative: Callable[[np.ndarray], np.ndarray]
    breakpoints: tuple = ()
    r_max: float = np.inf
    name: str = "profile"

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            if np.isfinite(self.r_max):
                r = np.minimum(r, self.r_max)
            return np.asarray(self.value(r), dtype=float)

    def d(self, r):
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            out = np.asarray(self.derivative(r), dtype=float)
        if np.isfinite(self.r_max):
            out = np.where(r > self.r_max, 0.0, out)
        return out


def power_profile(n: int) -> RadialProfile:
    """``f(r) = r**n``: with winding ``n`` this is the lump ``W = z**n``."""
    return RadialProfile(
        lambda r: r ** n,
        lambda r: n * r ** (n - 1),
        breakpoints=(1.0,),
        name=f"r^{n}",
    )


def constant_profile(c: float) -> RadialProfile:
    return RadialProfile(
        lambda r: np.full(np.shape(r), float(c)),
        lambda r: np.zeros(np.shape(r)),
        r_max=np.inf,
        name=f"const {c:g}",
    )


def hedgehog_w(profile: RadialProfile, m: int) -> Callable[[np.ndarray], np.ndarray]:
    """The equivariant map ``W(z) = f(|z|) (z/|z|)**m`` as a callable."""

    def w(z):
        z = np.asarray(z, dtype=complex)
        r = np.abs(z)
        fr = profile(r)
        with np.errstate(invalid="ignore", divide="ignore"):
            phase = np.exp(1j * m * np.angle(z))
            out = fr * phase
        out = np.where(np.isinf(fr), INF, out)
        undefined = ((r == 0.0) | ~np.isfinite(r)) & (m != 0)
        if np.any(undefined):
            f_end = fr[undefined]
            bad = (f_end != 0.0) & ~np.isinf(f_end)
            if np.any(bad):
                raise InvalidCoordinate(
                    "hedgehog direction is undefined where the profile is finite and nonzero at z=0 or z=inf"
                )
            out = np.where(undefined, np.where(np.isinf(fr), INF, 0.0), out)
        return out

    return w


def hedgehog_field(
    mesh: DomainMesh,
    profile: RadialProfile,
    m: int,
    basing: BasingData | None = None,
) -> LatticeField:
    """Sample the equivariant field ``W = f(|z|) (z/|z|)**m``."""
    return sample_from_stereo_map(mesh, hedgehog_w(profile, m), basing)


def random_based_field(
    mesh: DomainMesh,
    basing: BasingData,
    rng: np.random.Generator,
    base: LatticeField | None = None,
    amplitude: float = 0.3,
    smooth: int = 0,
) -> LatticeField:
    """A field near ``base`` (or random) with basing vertices pinned exactly.

    ``smooth`` passes of neighbour averaging make the perturbation long-wave.
    """
    noise = rng.standard_normal((mesh.n_vertices, 3))
    if smooth:
        e = mesh.edges
        deg = np.bincount(e.ravel(), minlength=mesh.n_vertices).astype(float)
        for _ in range(smooth):
            acc = noise.copy()
            for c in range(3):
                acc[:, c] += np.bincount(e[:, 0], weights=noise[e[:, 1], c], minlength=mesh.n_vertices)
                acc[:, c] += np.bincount(e[:, 1], weights=noise[e[:, 0], c], minlength=mesh.n_vertices)
            noise = acc / (deg + 1.0)[:, None]
        noise /= np.abs(noise).max()
    if base is None:
        v = noise
    else:
        v = base.values + amplitude * noise
    v = v / np.linalg.norm(v, axis=1, keepdims=True)
    if basing.k:
        v[basing.vertices] = basing.values
    return LatticeField(v, mesh, basing)


# ---------------------------------------------------------------------------
# snapshot I/O


def write_field(f: LatticeField, path, mesh_file: str = "mesh.txt") -> None:
    """Plain-text snapshot: header naming the mesh file and basing tuple,
    then one ``x y z`` line per vertex."""
    with open(path, "w") as fh:
        fh.write(f"# mesh {mesh_file}\n")
        pairs = " ".join(
            f"{int(v)}:{' '.join(repr(float(c)) for c in q)}"
            for v, q in zip(f.basing.vertices, f.basing.values)
        )
        fh.write(f"# basing {f.basing.k} {pairs}\n".rstrip() + "\n")
        for x in f.values:
            fh.write(" ".join(repr(float(c)) for c in x) + "\n")


def read_field(path, mesh: DomainMesh) -> LatticeField:
    with open(path) as fh:
        lines = fh.read().splitlines()
    basing_tokens = lines[1].split()[2:]
    k = int(lines[1].split()[2])
    verts, vals = [], []
    toks = basing_tokens[1:]
    for i in range(k):
        head, y, zc = toks[3 * i], toks[3 * i + 1], toks[3 * i + 2]
        v, x = head.split(":")
        verts.append(int(v))
        vals.append([float(x), float(y), float(zc)])
    values = np.array([[float(c) for c in ln.split()] for ln in lines[2:] if ln.strip()])
    basing = BasingData(np.array(verts, dtype=np.int64), np.array(vals).reshape(-1, 3))
    return LatticeField(values, mesh, basing)

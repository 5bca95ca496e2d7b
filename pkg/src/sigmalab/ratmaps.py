"""Rational maps as exact lumps, and degree-1 maps with two basing conditions.

Coefficient lists are in ascending powers: ``[a0, a1, a2]`` is
``a0 + a1 z + a2 z**2``.  Extended-complex values use ``complex(inf, 0)``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .energy import EnergyReport, lattice_energy
from .errors import IndeterminateValue, UnderResolved
from .field import BasingData, LatticeField, format_w, sample_from_stereo_map, target_from_w
from .geometry import SpherePoint, build_icosphere, iter_points

INF = complex(np.inf, 0.0)
RESULTANT_TOL = 1e-12


def _trim(c) -> np.ndarray:
    c = np.array(c, dtype=complex).reshape(-1)
    nz = np.flatnonzero(c)
    if len(nz) == 0:
        return np.zeros(1, dtype=complex)
    return c[: nz[-1] + 1]


def resultant(p, q) -> complex:
    """Sylvester resultant of two polynomials in ascending coefficient order."""
    p, q = _trim(p), _trim(q)
    m, n = len(p) - 1, len(q) - 1
    if m == 0 and n == 0:
        return complex(1.0)
    size = m + n
    S = np.zeros((size, size), dtype=complex)
    pd, qd = p[::-1], q[::-1]
    for i in range(n):
        S[i, i:i + m + 1] = pd
    for i in range(m):
        S[n + i, i:i + n + 1] = qd
    return complex(np.linalg.det(S))


def chordal(w1, w2) -> np.ndarray:
    """Chordal distance between extended-complex values on the unit sphere."""
    return np.linalg.norm(target_from_w(w1) - target_from_w(w2), axis=-1)


@dataclass(frozen=True)
class RationalMap:
    """``W(z) = p(z) / q(z)`` with coprime ``p`` and ``q``."""

    numerator: tuple
    denominator: tuple

    def __post_init__(self):
        p, q = _trim(self.numerator), _trim(self.denominator)
        if not np.any(q):
            raise ValueError("denominator is identically zero")
        object.__setattr__(self, "numerator", tuple(complex(c) for c in p))
        object.__setattr__(self, "denominator", tuple(complex(c) for c in q))
        if self.normalized_resultant() <= RESULTANT_TOL:
            raise ValueError("numerator and denominator share a root")

    @property
    def degree(self) -> int:
        return max(len(self.numerator), len(self.denominator)) - 1

    def normalized_resultant(self) -> float:
        p = np.array(self.numerator)
        q = np.array(self.denominator)
        if not np.any(p):
            return 1.0
        p = p / np.linalg.norm(p)
        q = q / np.linalg.norm(q)
        return abs(resultant(p, q))

    def __call__(self, z):
        return evaluate(self, z)

    def zeros(self) -> np.ndarray:
        return _roots(self.numerator)

    def poles(self) -> np.ndarray:
        return _roots(self.denominator)

    def to_json(self) -> str:
        enc = lambda cs: [[c.real, c.imag] for c in cs]  # noqa: E731
        return json.dumps({"numerator": enc(self.numerator), "denominator": enc(self.denominator)})

    @classmethod
    def from_json(cls, text: str) -> "RationalMap":
        d = json.loads(text)
        dec = lambda cs: [complex(a, b) for a, b in cs]  # noqa: E731
        return cls(dec(d["numerator"]), dec(d["denominator"]))

    @classmethod
    def mobius(cls, a, b, c, d) -> "RationalMap":
        """``(a z + b) / (c z + d)``."""
        return cls([b, a], [d, c])


def _roots(coeffs) -> np.ndarray:
    c = _trim(coeffs)
    if len(c) <= 1:
        return np.zeros(0, dtype=complex)
    return np.roots(c[::-1])


def _horner(c: np.ndarray, z: np.ndarray) -> np.ndarray:
    out = np.zeros_like(z)
    for a in c[::-1]:
        out = out * z + a
    return out


def evaluate(rmap: RationalMap, z):
    """``p(z) / q(z)`` on the extended plane.

    For ``|z| > 1`` both polynomials are evaluated in ``1/z`` to avoid
    overflow; ``z = inf`` is decided by the leading coefficients.

    Raises
    ------
    IndeterminateValue
        If both polynomials vanish at ``z``.
    """
    scalar = np.ndim(z) == 0
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    p, q = np.array(rmap.numerator), np.array(rmap.denominator)
    dp, dq = len(p) - 1, len(q) - 1
    out = np.empty(z.shape, dtype=complex)
    inf = ~np.isfinite(z)
    big = (np.abs(z) > 1.0) & ~inf
    small = ~big & ~inf

    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if np.any(small):
            zs = z[small]
            pn, qn = _horner(p, zs), _horner(q, zs)
            out[small] = _divide(pn, qn)
        if np.any(big):
            u = 1.0 / z[big]
            n = max(dp, dq)
            # z**-n p(z) = sum a_k u**(n-k)
            pr = _horner(np.concatenate([np.zeros(n - dp, dtype=complex), p[::-1]]), u)
            qr = _horner(np.concatenate([np.zeros(n - dq, dtype=complex), q[::-1]]), u)
            out[big] = _divide(pr, qr)
        if np.any(inf):
            if dp > dq:
                out[inf] = INF
            elif dp < dq:
                out[inf] = 0.0
            else:
                out[inf] = p[-1] / q[-1]
    return complex(out[0]) if scalar else out


def _divide(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    if np.any((num == 0) & (den == 0)):
        raise IndeterminateValue("0/0 in rational map evaluation")
    out = np.empty(num.shape, dtype=complex)
    pole = den == 0
    out[pole] = INF
    out[~pole] = num[~pole] / den[~pole]
    return out


# ---------------------------------------------------------------------------
# based Moebius maps


def _to_zero_inf(a: complex, b: complex) -> np.ndarray:
    """Matrix of a Moebius map sending ``a -> 0`` and ``b -> inf``."""
    if not np.isfinite(a):
        return np.array([[0, 1], [1, -b]], dtype=complex)
    if not np.isfinite(b):
        return np.array([[1, -a], [0, 1]], dtype=complex)
    return np.array([[1, -a], [1, -b]], dtype=complex)


def _matrix_map(M: np.ndarray) -> RationalMap:
    M = M / np.sqrt(complex(np.linalg.det(M)))
    (a, b), (c, d) = M
    return RationalMap.mobius(a, b, c, d)


@dataclass(frozen=True)
class BasedMobiusFamily:
    """All degree-1 maps with ``W(p1) = q1`` and ``W(p2) = q2``.

    They are ``W = B^-1(lam * A(z))`` for ``lam != 0``, where ``A`` sends
    ``p1, p2`` to ``0, inf`` and ``B`` sends ``q1, q2`` to ``0, inf``: one
    complex parameter.
    """

    p1: complex
    p2: complex
    q1: complex
    q2: complex

    def member(self, lam: complex = 1.0) -> RationalMap:
        A = _to_zero_inf(self.p1, self.p2)
        B = _to_zero_inf(self.q1, self.q2)
        Binv = np.array([[B[1, 1], -B[0, 1]], [-B[1, 0], B[0, 0]]])
        return _matrix_map(Binv @ np.diag([lam, 1.0]) @ A)

    def descriptor(self) -> str:
        return (
            f"W = B^-1(lam * A(z)), lam in C\\{{0}}; A: ({_fmt(self.p1)},{_fmt(self.p2)}) -> (0,inf), "
            f"B: ({_fmt(self.q1)},{_fmt(self.q2)}) -> (0,inf); complex dimension 1"
        )


def _fmt(w: complex) -> str:
    return format_w(complex(w))


def solve_based_mobius(p1, p2, q1, q2) -> tuple[list, BasedMobiusFamily | None]:
    """Degree-1 maps with ``W(p1) = q1`` and ``W(p2) = q2``.

    Returns ``([representative], family)`` or ``([], None)``.  A degree-1
    map is a bijection of the sphere, so the set is empty exactly when
    ``q1 == q2``.
    """
    p1, p2, q1, q2 = (complex(x) for x in (p1, p2, q1, q2))
    if float(chordal(p1, p2)) == 0.0:
        raise ValueError("marked points must be distinct")
    if float(chordal(q1, q2)) == 0.0:
        return [], None
    fam = BasedMobiusFamily(p1, p2, q1, q2)
    return [fam.member(1.0)], fam


def basing_residuals(rmap: RationalMap, points: Sequence[complex], values: Sequence[complex]) -> np.ndarray:
    """Chordal residuals of ``W(p_i) = q_i``: membership test for the based moduli."""
    got = evaluate(rmap, np.asarray(points, dtype=complex))
    return chordal(got, np.asarray(values, dtype=complex))


def is_based_map(rmap: RationalMap, points, values, tol: float = 1e-12) -> bool:
    return bool(np.all(basing_residuals(rmap, points, values) < tol))


# ---------------------------------------------------------------------------
# lattice check


def rational_mesh(rmap: RationalMap, subdivisions: int = 5, marked_points=None, radius: float | None = 0.3):
    """Icosphere refined around the finite zeros and poles of the map.

    ``radius=None`` skips the refinement.
    """
    centers = [SpherePoint.from_stereo(w) for w in np.concatenate([rmap.zeros(), rmap.poles()])]
    refine = None if radius is None else [(c, radius) for c in centers]
    return build_icosphere(subdivisions, iter_points(marked_points or []), refine)


def rational_field(rmap: RationalMap, mesh, basing: BasingData | None = None) -> LatticeField:
    return sample_from_stereo_map(mesh, lambda z: evaluate(rmap, z), basing)


def rat_energy_check(rmap: RationalMap, mesh=None, basing: BasingData | None = None,
                     rel_tol: float = 0.005) -> EnergyReport:
    """Sample a rational map and check Bogomolny saturation on the lattice.

    Raises
    ------
    UnderResolved
        If the lattice degree is not within 0.01 of an integer or differs
        from the map degree.
    AssertionError
        If ``E`` is not within ``rel_tol`` of ``pi * degree``.
    """
    mesh = rational_mesh(rmap) if mesh is None else mesh
    rep = lattice_energy(rational_field(rmap, mesh, basing))
    # the solid-angle sum is an integer for generic values, so a coarse mesh
    # usually shows up as a wrong integer rather than a fractional one
    if not rep.resolved or rep.degree != rmap.degree:
        raise UnderResolved(
            f"lattice degree {rep.degree_raw:.4f} does not resolve map degree {rmap.degree}",
            hint="increase subdivisions or refine near the zeros and poles",
        )
    if abs(rep.E - math.pi * rmap.degree) > rel_tol * math.pi * rmap.degree:
        raise AssertionError(f"E = {rep.E:.6f} not within {rel_tol:.1%} of {math.pi * rmap.degree:.6f}")
    return rep

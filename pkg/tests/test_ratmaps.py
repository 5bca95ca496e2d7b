import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sigmalab.errors import IndeterminateValue, UnderResolved
from sigmalab.geometry import build_icosphere, cylinder_marked_points
from sigmalab.ratmaps import (
    INF,
    RationalMap,
    basing_residuals,
    chordal,
    evaluate,
    is_based_map,
    rat_energy_check,
    rational_mesh,
    resultant,
    solve_based_mobius,
)

finite = st.complex_numbers(max_magnitude=1e3, allow_nan=False, allow_infinity=False)


class TestEvaluate:
    def test_polynomial(self):
        assert evaluate(RationalMap([0, 1], [1]), 2.0) == 2.0

    def test_pole(self):
        assert np.isinf(evaluate(RationalMap([1], [0, 1]), 0.0).real)

    def test_inner_branch(self):
        eps = 0.1
        assert abs(evaluate(RationalMap([eps * eps], [0, 1]), eps) - eps) < 1e-15

    def test_infinity_by_leading_coefficients(self):
        assert np.isinf(evaluate(RationalMap([0, 0, 1], [1]), INF).real)
        assert evaluate(RationalMap([1], [0, 1]), INF) == 0
        assert evaluate(RationalMap([1, 2], [3, 4]), INF) == 0.5

    def test_large_z_no_overflow(self):
        w = evaluate(RationalMap([0, 0, 0, 1], [1, 0, 1]), 1e200)
        assert abs(w / 1e200 - 1) < 1e-12

    def test_array(self):
        z = np.array([0.5, 2.0, 1e8, INF])
        w = evaluate(RationalMap([-1, 1], [1, 1]), z)
        np.testing.assert_allclose(w[:3], (z[:3] - 1) / (z[:3] + 1))
        assert w[3] == 1

    def test_indeterminate(self):
        m = RationalMap([1], [1])
        object.__setattr__(m, "numerator", (0j,))
        object.__setattr__(m, "denominator", (0j, 1 + 0j))
        with pytest.raises(IndeterminateValue):
            evaluate(m, 0.0)


class TestRationalMap:
    def test_degree(self):
        assert RationalMap([0, 0, 1], [1]).degree == 2
        assert RationalMap.mobius(1, -1, 1, 1).degree == 1

    def test_common_root_rejected(self):
        with pytest.raises(ValueError):
            RationalMap([-1, 0, 1], [-1, 1])  # (z^2-1)/(z-1)

    def test_zero_denominator(self):
        with pytest.raises(ValueError):
            RationalMap([1], [0])

    def test_resultant(self):
        # Res(z - a, z - b) = b - a up to sign
        assert abs(abs(resultant([-2, 1], [-5, 1])) - 3) < 1e-12
        assert abs(resultant([-1, 0, 1], [-1, 1])) < 1e-12

    def test_json_roundtrip(self):
        m = RationalMap([1 + 2j, 0, 3], [0.5, -1j])
        assert RationalMap.from_json(m.to_json()) == m

    def test_zeros_and_poles(self):
        m = RationalMap.mobius(1, -1, 1, 1)
        np.testing.assert_allclose(m.zeros(), [1.0])
        np.testing.assert_allclose(m.poles(), [-1.0])


class TestBasedMobius:
    def test_coincident_empty_examples(self):
        assert solve_based_mobius(1, -1, 0, 0) == ([], None)
        assert solve_based_mobius(1, -1, INF, INF) == ([], None)

    def test_coincident_empty_random(self, rng):
        q = (rng.normal(size=100) + 1j * rng.normal(size=100)) * np.exp(rng.uniform(-3, 3, 100))
        for qi in q:
            assert solve_based_mobius(1, -1, qi, qi) == ([], None)

    @given(finite, finite, finite)
    def test_coincident_empty_triples(self, p1, p2, q):
        if float(chordal(p1, p2)) == 0.0:
            return
        assert solve_based_mobius(p1, p2, q, q)[0] == []

    def test_distinct_random(self, rng):
        for _ in range(100):
            q1, q2 = rng.normal(size=2) + 1j * rng.normal(size=2)
            maps, fam = solve_based_mobius(1, -1, q1, q2)
            assert len(maps) == 1 and maps[0].degree == 1
            assert basing_residuals(maps[0], [1, -1], [q1, q2]).max() < 1e-12

    def test_zero_infinity_representative(self):
        (m,), fam = solve_based_mobius(1, -1, 0, INF)
        assert abs(evaluate(m, 1.0)) < 1e-12
        assert abs(1 / evaluate(m, -1.0)) < 1e-12
        z = np.array([0.3 + 0.1j, 2.0, -0.5j])
        np.testing.assert_allclose(evaluate(m, z), (z - 1) / (z + 1), atol=1e-14)
        assert "complex dimension 1" in fam.descriptor()

    def test_identity_representative(self):
        (m,), _ = solve_based_mobius(1, -1, 1, -1)
        z = np.array([0.3 + 0.1j, 2.0, -0.5j])
        np.testing.assert_allclose(evaluate(m, z), z, atol=1e-14)

    def test_infinite_marked_point(self):
        (m,), _ = solve_based_mobius(INF, 0, 2, 3j)
        assert is_based_map(m, [INF, 0], [2, 3j])

    def test_family_members_all_based(self):
        _, fam = solve_based_mobius(1, -1, 0.5, INF)
        for lam in (1.0, 2j, -0.3 + 0.1j):
            assert is_based_map(fam.member(lam), [1, -1], [0.5, INF])

    def test_equal_marked_points(self):
        with pytest.raises(ValueError):
            solve_based_mobius(1, 1, 0, INF)


class TestEnergyCheck:
    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_powers(self, n):
        rep = rat_energy_check(RationalMap([0] * n + [1], [1]))
        assert rep.degree == n
        assert abs(rep.E - n * math.pi) < 0.005 * n * math.pi

    def test_based_mobius(self):
        (m,), _ = solve_based_mobius(1, -1, 0, INF)
        mesh = rational_mesh(m, marked_points=cylinder_marked_points())
        rep = rat_energy_check(m, mesh)
        assert rep.degree == 1 and abs(rep.E - math.pi) < 0.005 * math.pi

    def test_bogomolny_gap(self):
        rep = rat_energy_check(RationalMap([0, 0, 1], [1]))
        assert rep.bogomolny_gap < 0.005 * 2 * math.pi

    def test_under_resolved(self):
        # a tight lump on the bare icosahedron: the lattice cannot see its degree
        m = RationalMap([0, 0, 0, 0, 0, 1], [1e-4])
        with pytest.raises(UnderResolved) as exc:
            rat_energy_check(m, build_icosphere(0))
        assert exc.value.hint

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from frozen import C_CONSTANT, C_SMOOTHSTEP, FAMILY_ENERGY
from sigmalab.energy import lattice_degree, radial_energy
from sigmalab.errors import EpsilonTooLarge, ExperimentFailure
from sigmalab.family import (
    CutoffFunction,
    cutoff_constant,
    fit_quadratic_law,
    shrinking_field,
    shrinking_map,
    shrinking_mesh,
    smoothstep_cutoff,
    sweep_shrinking_family,
    unit_test_double,
)
from sigmalab.field import is_based
from sigmalab.flow import lump_width


class TestCutoff:
    def test_endpoints(self):
        h = smoothstep_cutoff()
        assert h(1.0) == 1.0 and h(2.0) == 0.0
        assert abs(h(1.5) - 0.5) < 1e-15
        assert h.derivative(1.0) == 0.0 and h.derivative(2.0) == 0.0

    def test_outside_interval(self):
        h = smoothstep_cutoff()
        np.testing.assert_array_equal(h([0.0, 0.5, 2.5, 10.0]), [1, 1, 0, 0])

    def test_monotone(self):
        rho = np.linspace(1, 2, 2001)
        assert np.all(np.diff(smoothstep_cutoff()(rho)) <= 0)

    @given(st.floats(1.0, 2.0))
    def test_derivative_matches_difference(self, rho):
        h = smoothstep_cutoff()
        d = 1e-6
        a, b = max(1.0, rho - d), min(2.0, rho + d)
        if b - a < d:
            return
        fd = (float(h.h(b)) - float(h.h(a))) / (b - a)
        assert abs(fd - float(h.dh(rho))) < 1e-5

    def test_constant_smoothstep(self):
        c = cutoff_constant(smoothstep_cutoff())
        assert c > 0
        assert abs(c - C_SMOOTHSTEP) < 1e-10

    def test_constant_test_double(self):
        assert abs(cutoff_constant(unit_test_double()) - C_CONSTANT) < 1e-9

    def test_pluggable_cutoff(self):
        lin = CutoffFunction(lambda r: 2.0 - r, lambda r: -np.ones(np.shape(r)), "linear")
        # integrand reduces to 8/rho^3 - 4/rho^2 + 1/rho on [1, 2]
        assert abs(cutoff_constant(lin) - math.pi * (1 + math.log(2))) < 1e-10


class TestShrinkingMap:
    def test_profile_continuity(self):
        eps = 0.1
        g = shrinking_map(eps).profile
        assert abs(float(g(eps)) - eps) < 1e-15
        assert abs(float(g(eps * (1 - 1e-12))) - eps) < 1e-12
        assert float(g(2 * eps)) == 0.0 and float(g(2 * eps * (1 + 1e-9))) == 0.0
        assert abs(float(g(2 * eps * (1 - 1e-6)))) < 1e-12

    def test_origin_is_target_pole(self):
        assert np.isinf(float(shrinking_map(0.1).profile(0.0)))

    def test_closed_form_branches(self):
        sm = shrinking_map(0.2)
        z = np.array([0.1 + 0.05j, 0.3j, 0.5, 0.0])
        w = sm.w(z)
        assert abs(w[0] - 0.04 / z[0]) < 1e-15
        assert w[2] == 0
        assert np.isinf(w[3].real)

    @pytest.mark.parametrize("eps", [0.5, 0.6, 0.0, -0.1])
    def test_eps_range(self, eps):
        with pytest.raises(EpsilonTooLarge):
            shrinking_map(eps)

    def test_eps_error_is_value_error(self):
        with pytest.raises(ValueError):
            shrinking_map(0.75)

    @given(st.floats(0.01, 0.49))
    def test_energy_in_bound(self, eps):
        sm = shrinking_map(eps)
        E = radial_energy(sm.profile, sm.m)
        assert math.pi < E <= math.pi + C_SMOOTHSTEP * eps * eps

    def test_energy_decreases_towards_pi(self):
        E = [radial_energy(shrinking_map(e).profile, -1) for e in (0.2, 0.1, 0.05, 0.02)]
        assert all(a > b for a, b in zip(E, E[1:])) and E[-1] > math.pi


class TestLatticeFamily:
    @pytest.mark.parametrize("eps", [0.05, 0.1, 0.2])
    def test_based_and_degree_one(self, eps):
        f = shrinking_field(eps, shrinking_mesh(eps))
        assert is_based(f) == (True, 0.0)
        d = lattice_degree(f)
        assert d.degree == 1 and abs(d.raw - 1) < 0.01

    def test_width_increases_with_eps(self):
        w = [lump_width(shrinking_field(e, shrinking_mesh(e))) for e in (0.05, 0.1, 0.2)]
        assert w[0] < w[1] < w[2]


class TestSweep:
    def test_sweep(self):
        res = sweep_shrinking_family([0.2, 0.05, 0.1])
        assert res.epsilons == [0.05, 0.1, 0.2]
        assert all(d == 1 for d in res.degrees)
        for e, E, L, _, bound in res.rows():
            assert math.pi < E <= bound
            assert abs(E - FAMILY_ENERGY[e]) < 1e-10
            assert abs(L - E) < 0.02 * E
        assert 0 < res.fit_relative_residual < 0.05

    def test_sweep_too_few(self):
        with pytest.raises(ValueError):
            sweep_shrinking_family([0.1, 0.2], lattice=False)

    def test_sweep_bad_eps(self):
        with pytest.raises(EpsilonTooLarge):
            sweep_shrinking_family([0.1, 0.2, 0.5], lattice=False)

    def test_sweep_failure_is_reported(self):
        # the constant test double breaks the decay requirement, so the bound fails
        with pytest.raises(ExperimentFailure):
            sweep_shrinking_family([0.05, 0.1, 0.2], h=unit_test_double(), lattice=False)

    def test_fit_exact_quadratic(self):
        eps = np.array([0.05, 0.1, 0.2])
        a, rel, b = fit_quadratic_law(eps, math.pi + 3.0 * eps ** 2)
        assert abs(a - 3.0) < 1e-12 and rel < 1e-12 and abs(b - math.pi) < 1e-12

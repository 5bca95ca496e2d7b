import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sigmalab.errors import BasingViolation, InvalidCoordinate, ShapeMismatch
from sigmalab.family import shrinking_map
from sigmalab.field import (
    BasingData,
    LatticeField,
    constant_field,
    constant_profile,
    format_w,
    hedgehog_field,
    hedgehog_w,
    is_based,
    power_profile,
    random_based_field,
    read_field,
    sample_from_stereo_map,
    target_from_w,
    w_from_target,
    write_field,
)
from sigmalab.geometry import read_mesh, write_mesh

INF = complex(math.inf, 0)


def test_target_conventions():
    np.testing.assert_allclose(target_from_w(0), [0, 0, -1])
    np.testing.assert_allclose(target_from_w(INF), [0, 0, 1])
    np.testing.assert_allclose(target_from_w(1), [1, 0, 0], atol=1e-15)
    with pytest.raises(InvalidCoordinate):
        target_from_w(complex(math.nan, 0))


@given(st.complex_numbers(max_magnitude=1e6, allow_nan=False, allow_infinity=False))
def test_w_roundtrip(w):
    back = complex(w_from_target(target_from_w(w)))
    assert abs(back - w) <= 1e-9 * max(1.0, abs(w))


def test_format_w():
    assert format_w(0) == "0"
    assert format_w(INF) == "inf"
    assert format_w(1 - 2j) == "1-2j"
    assert format_w(0.5j) == "0.5j"


class TestSampling:
    def test_constant_zero(self, ico3):
        f = sample_from_stereo_map(ico3, lambda z: np.zeros_like(z))
        np.testing.assert_allclose(f.values, np.tile([0, 0, -1.0], (ico3.n_vertices, 1)))

    def test_identity_reproduces_mesh(self, ico3):
        f = sample_from_stereo_map(ico3, lambda z: z)
        assert np.abs(f.values - ico3.vertices).max() < 1e-12

    def test_readback(self, cyl3):
        wf = lambda z: (z * z + 0.3) / (z - 2.0)  # noqa: E731
        f = sample_from_stereo_map(cyl3, wf)
        z = cyl3.vertex_stereo
        ok = np.isfinite(z)
        w = wf(z[ok])
        back = f.w()[ok]
        fin = np.isfinite(w) & (np.abs(w) < 1e8)
        rel = np.abs(back[fin] - w[fin]) / np.maximum(1.0, np.abs(w[fin]))
        assert rel.max() < 1e-9

    def test_pole_vertex_limit(self, ico3):
        # z^2 at z = inf gives nan from inf*inf arithmetic; the sampler takes the limit
        f = sample_from_stereo_map(ico3, lambda z: z ** 2)
        north = np.flatnonzero(~np.isfinite(ico3.vertex_stereo))
        np.testing.assert_allclose(f.values[north], [[0, 0, 1.0]])

    def test_unit_norm(self, cyl3):
        f = sample_from_stereo_map(cyl3, lambda z: np.exp(z))
        assert np.abs(np.linalg.norm(f.values, axis=1) - 1).max() < 1e-10

    def test_basing_violation(self, cyl3):
        basing = BasingData.for_mesh(cyl3, [0.0, 0.0])
        with pytest.raises(BasingViolation):
            sample_from_stereo_map(cyl3, lambda z: z, basing)

    def test_small_residual_pinned(self, cyl3):
        basing = BasingData.for_mesh(cyl3, [1.0, -1.0])
        f = sample_from_stereo_map(cyl3, lambda z: z * (1 + 1e-8), basing)
        assert 0 < f.sample_residual < 1e-6
        ok, res = is_based(f)
        assert ok and res == 0.0

    def test_shrinking_map_is_based(self, cyl3):
        sm = shrinking_map(0.1)
        basing = BasingData.for_mesh(cyl3, [0.0, 0.0])
        f = hedgehog_field(cyl3, sm.profile, sm.m, basing)
        assert is_based(f) == (True, 0.0)

    def test_hedgehog_matches_closed_form(self, cyl3):
        sm = shrinking_map(0.2)
        a = hedgehog_field(cyl3, sm.profile, sm.m)
        b = sample_from_stereo_map(cyl3, sm.w)
        assert np.abs(a.values - b.values).max() < 1e-12


class TestHedgehog:
    def test_zero_profile_is_constant(self, ico3):
        f = hedgehog_field(ico3, constant_profile(0.0), 1)
        np.testing.assert_allclose(f.values, np.tile([0, 0, -1.0], (ico3.n_vertices, 1)))

    def test_identity(self, ico3):
        f = hedgehog_field(ico3, power_profile(1), 1)
        assert np.abs(f.values - ico3.vertices).max() < 1e-12

    def test_winding_sign(self):
        w = hedgehog_w(power_profile(1), -1)
        z = np.array([0.5 + 0.5j])
        np.testing.assert_allclose(w(z), np.conj(z))

    def test_origin_and_infinity(self):
        w = hedgehog_w(shrinking_map(0.1).profile, -1)
        out = w(np.array([0j, INF]))
        assert np.isinf(out[0].real) and out[1] == 0


class TestBasing:
    def test_constant_field_based(self, cyl3):
        q = 0.3 + 2j
        basing = BasingData.for_mesh(cyl3, [q, q])
        ok, res = is_based(constant_field(cyl3, q, basing))
        assert ok and res == 0.0

    def test_mismatch_detected(self, cyl3):
        basing = BasingData.for_mesh(cyl3, [0.0, 1.0])
        f = LatticeField(np.tile(target_from_w(0.0), (cyl3.n_vertices, 1)), cyl3, basing)
        ok, res = is_based(f)
        assert not ok and res > 1.0

    def test_repeated_values_allowed(self, cyl3):
        b = BasingData.for_mesh(cyl3, [INF, INF])
        assert b.k == 2 and b.label() == "(inf,inf)"

    def test_distinct_vertices_required(self):
        with pytest.raises(ValueError):
            BasingData.from_w([3, 3], [0, 1])

    def test_wrong_count(self, cyl3):
        with pytest.raises(ValueError):
            BasingData.for_mesh(cyl3, [0.0])

    def test_vertex_out_of_range(self, ico3):
        with pytest.raises(ValueError):
            constant_field(ico3, 0.0, BasingData.from_w([ico3.n_vertices], [0]))

    def test_same_as(self):
        a = BasingData.from_w([1, 2], [0, INF])
        assert a.same_as(BasingData.from_w([1, 2], [1e-12, INF]))
        assert not a.same_as(BasingData.from_w([2, 1], [0, INF]))
        assert not a.same_as(BasingData.from_w([1, 2], [0, 1]))


class TestLatticeField:
    def test_shape_mismatch(self, ico3):
        with pytest.raises(ShapeMismatch):
            LatticeField(np.zeros((3, 3)), ico3)

    def test_unit_norm_enforced(self, ico3):
        with pytest.raises(ValueError):
            LatticeField(np.ones((ico3.n_vertices, 3)), ico3)

    def test_immutable(self, ico3):
        f = constant_field(ico3, 0.0)
        with pytest.raises(ValueError):
            f.values[0, 0] = 1.0

    def test_random_based_field(self, cyl3, rng):
        basing = BasingData.for_mesh(cyl3, [0.5, INF])
        f = random_based_field(cyl3, basing, rng, smooth=2)
        assert is_based(f) == (True, 0.0)
        assert np.abs(np.linalg.norm(f.values, axis=1) - 1).max() < 1e-10


def test_field_io_roundtrip(tmp_path, cyl3, rng):
    basing = BasingData.for_mesh(cyl3, [0.0, INF])
    f = random_based_field(cyl3, basing, rng)
    write_mesh(cyl3, tmp_path / "mesh.txt")
    write_field(f, tmp_path / "field.txt", "mesh.txt")
    head = (tmp_path / "field.txt").read_text().splitlines()[:2]
    assert head[0] == "# mesh mesh.txt"
    assert head[1].startswith("# basing 2 ")
    g = read_field(tmp_path / "field.txt", read_mesh(tmp_path / "mesh.txt"))
    assert np.array_equal(g.values, f.values)
    assert g.basing.same_as(f.basing, tol=0.0) or np.array_equal(g.basing.values, f.basing.values)

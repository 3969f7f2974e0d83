import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tricrit import elliptic, triangle_map as tm
from tricrit.elliptic import INF, SQRT3, is_inf
from tricrit.errors import MetricSingularity, OutsideDomain

A = elliptic.compute_constants().a
V0, V1, V2 = tm.DELTA.vertices  # 0, i, (sqrt3 + i)/2

barycentric = st.tuples(st.floats(0.02, 0.96), st.floats(0.02, 0.96)).filter(lambda p: p[0] + p[1] < 0.98)


def point(p):
    return V0 + p[0] * (V1 - V0) + p[1] * (V2 - V0)


class TestDomain:
    def test_unit_sides(self):
        for k in range(3):
            assert abs(tm.DELTA.vertices[k] - tm.DELTA.vertices[(k + 1) % 3]) == pytest.approx(1.0)

    def test_contains(self):
        assert tm.DELTA.contains(0.4 + 0.5j)
        assert not tm.DELTA.contains(-0.1 + 0.5j)


class TestMapG:
    def test_vertices(self):
        assert is_inf(tm.map_g(V0))
        assert abs(tm.map_g(V2) - 1j * A) < 1e-8
        assert abs(tm.map_g(V1) + 1j * A) < 1e-8

    def test_edge_midpoint(self):
        assert abs(tm.map_g((V1 + V2) / 2)) < 1e-10

    def test_image_in_right_half_plane(self, rng):
        for _ in range(50):
            u = point(rng.random(2) * 0.49)
            assert tm.map_g(u).real >= -1e-9

    def test_outside(self):
        with pytest.raises(OutsideDomain):
            tm.map_g(1 + 1j)
        with pytest.raises(OutsideDomain):
            tm.map_g_inverse(-1.0)

    def test_interior_sample(self):
        u = 0.4 + 0.5j
        # the inverse is a Schwarz-Christoffel quadrature, independent of wp'
        assert abs(tm.map_g_inverse(elliptic.wp_prime(u)) - u) < 1e-8

    @given(barycentric)
    def test_roundtrip(self, p):
        u = point(p)
        assert abs(tm.map_g_inverse(tm.map_g(u)) - u) < 1e-8

    @given(st.floats(0, 50), st.floats(-50, 50))
    def test_inverse_lands_in_triangle(self, x, y):
        u = tm.map_g_inverse(complex(x, y))
        assert tm.DELTA.contains(u, 1e-9)
        w = tm.map_g(u, tol=1e-9)
        if not is_inf(w):
            assert abs(w - complex(x, y)) < 1e-8 * max(1, abs(w))

    @pytest.mark.parametrize("re", [0.0, -0.0, 1e-300, 1e-13, 1e-9])
    @pytest.mark.parametrize("im", [-60.0, -11.0, -9.0, -6.0, -2.0, 0.5, 6.0, 9.0, 11.0, 45.0])
    def test_inverse_near_boundary(self, re, im):
        # points on or numerically on the imaginary axis, beyond and between the prevertices
        w = complex(re, im)
        u = tm.map_g_inverse(w)
        assert tm.DELTA.contains(u, 1e-9)
        assert abs(elliptic.wp_prime(u) - w) < 1e-8 * max(1, abs(w))

    def test_inverse_vertices(self):
        assert tm.map_g_inverse(INF) == V0
        assert abs(tm.map_g_inverse(-1j * A) - V1) < 1e-10
        assert abs(tm.map_g_inverse(1j * A) - V2) < 1e-10

    def test_boundary_to_boundary(self):
        # the imaginary axis is the image of the three sides
        for y in (-20.0, -3.0, 0.0, 2.0, 40.0):
            u = tm.map_g_inverse(1j * y)
            dists = [abs(((tm.DELTA.vertices[(k + 1) % 3] - tm.DELTA.vertices[k]).conjugate()
                          * (u - tm.DELTA.vertices[k])).imag) for k in range(3)]
            assert min(dists) < 1e-9

    def test_cauchy_riemann(self):
        h = 1e-5
        for u in (0.3 + 0.5j, 0.5 + 0.45j, 0.2 + 0.6j):
            gx = (tm.map_g(u + h) - tm.map_g(u - h)) / (2 * h)
            gy = (tm.map_g(u + 1j * h) - tm.map_g(u - 1j * h)) / (2 * h)
            assert abs(gx + 1j * gy) < 1e-6 * abs(gx)

    def test_vertex_exponent(self):
        # |g^-1(w) - vertex| ~ |w - value|**(1/3) at the finite critical values
        for value, vertex in ((1j * A, V2), (-1j * A, V1)):
            eps = np.logspace(-6, -3, 8)
            d = [abs(tm.map_g_inverse(value + e) - vertex) for e in eps]
            slope = np.polyfit(np.log(eps), np.log(d), 1)[0]
            assert slope == pytest.approx(1 / 3, abs=0.01)


class TestRealTriple:
    triple = tm.CriticalTriple(-1.0, 0.5, 2.0)

    def test_vertices(self):
        assert abs(tm.map_g(V0, self.triple) + 1.0) < 1e-8
        assert abs(tm.map_g(V2, self.triple) - 0.5) < 1e-8
        assert abs(tm.map_g(V1, self.triple) - 2.0) < 1e-8

    def test_roundtrip(self):
        for u in (0.3 + 0.5j, 0.5 + 0.45j):
            assert abs(tm.map_g_inverse(tm.map_g(u, self.triple), self.triple) - u) < 1e-8

    def test_reflection_symmetry(self, rng):
        for _ in range(20):
            w = complex(*rng.normal(size=2))
            assert tm.rho0_density(w, self.triple) == pytest.approx(
                tm.rho0_density(tm.reflect(w, self.triple), self.triple), rel=1e-10)

    def test_distinct_points_required(self):
        with pytest.raises(ValueError):
            tm.CriticalTriple(1.0, 1.0, 2.0)


class TestRho0:
    def test_reflection_symmetry(self, rng):
        for _ in range(100):
            w = complex(*rng.normal(scale=5, size=2))
            assert tm.rho0_density(w) == pytest.approx(tm.rho0_density(tm.reflect(w)), rel=1e-12)

    def test_density_is_inverse_derivative(self):
        w, h = 1.3 + 0.7j, 1e-6
        d = abs(tm.map_g_inverse(w + h) - tm.map_g_inverse(w - h)) / (2 * h)
        assert tm.rho0_density(w) == pytest.approx(d, rel=1e-6)

    def test_punctures(self):
        for p in (1j * A, -1j * A, INF):
            with pytest.raises(MetricSingularity):
                tm.rho0_density(p)

    def test_areas(self):
        assert tm.rho0_area(half=True) == pytest.approx(SQRT3 / 4, rel=1e-5)
        assert tm.rho0_area() == pytest.approx(SQRT3 / 2, rel=1e-5)

    def test_segment_image_length(self):
        # g is an isometry from the Euclidean triangle
        p, q = 0.2 + 0.5j, 0.6 + 0.55j
        us = p + (q - p) * np.linspace(0, 1, 801)
        path = [complex(elliptic.wp_prime(u)) for u in us]
        assert tm.rho0_length(path) == pytest.approx(abs(q - p), rel=1e-5)

    def test_reflected_path(self):
        path = [0.5 + 0.2j, 2.0 - 1.0j, 3.0 + 4.0j]
        mirrored = [tm.reflect(w) for w in path]
        assert tm.rho0_length(path) == pytest.approx(tm.rho0_length(mirrored), rel=1e-8)

    def test_boundary_circle(self):
        # the three sides of the triangle: inf -> ia -> -ia -> inf along the imaginary axis
        assert tm.rho0_length([INF, 1j * A, -1j * A, INF]) == pytest.approx(3.0, rel=1e-5)
        assert tm.rho0_length([1j * A, -1j * A]) == pytest.approx(1.0, rel=1e-5)

    def test_path_through_puncture(self):
        with pytest.raises(MetricSingularity):
            tm.rho0_length([2j * A, 0.0])

    def test_sampler_balance(self, rng):
        w = tm.sample_rho0_measure(rng, 4000)
        frac = np.mean(w.real > 0)
        assert abs(frac - 0.5) < 4 * math.sqrt(0.25 / 4000)
        # mean of |g^-1| distance to the ia vertex is symmetric in both halves
        assert np.all(np.isfinite(w))

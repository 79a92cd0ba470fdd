import cmath
import math

import numpy as np
import pytest

from blochmap.sphere import (
    INF,
    DegenerateImageError,
    SpherePoint,
    apply_map,
    bloch_from_point,
    chordal_distance,
    critical_points,
    point_from_bloch,
    point_from_z,
    spherical_derivative,
)


def rand_p(rng):
    return complex(*rng.normal(size=2))


def rand_point(rng):
    v = rng.normal(size=3)
    v /= np.linalg.norm(v)
    return point_from_bloch(*v)


class TestSpherePoint:
    def test_normalization(self):
        s = SpherePoint.from_components(3.0 + 0j, 4j)
        assert abs(s.a) ** 2 + abs(s.b) ** 2 == pytest.approx(1.0, abs=1e-15)
        assert s.z == pytest.approx(4j / 3)

    def test_canonical_phase_makes_equality_work(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            a, b = complex(*rng.normal(size=2)), complex(*rng.normal(size=2))
            phase = cmath.exp(1j * rng.uniform(0, 2 * math.pi))
            s1 = SpherePoint.from_components(a, b)
            s2 = SpherePoint.from_components(phase * a, phase * b)
            assert s1.a == pytest.approx(s2.a, abs=1e-12)
            assert s1.b == pytest.approx(s2.b, abs=1e-12)
            assert s1.a.real >= 0.0 and s1.a.imag == 0.0

    def test_zero_vector_rejected(self):
        with pytest.raises(DegenerateImageError):
            SpherePoint.from_components(0j, 0j)

    def test_poles(self):
        assert point_from_z(0j).z == 0j
        assert point_from_z(INF).z == INF
        assert point_from_z(complex("inf")).a == 0j

    def test_huge_z_no_overflow(self):
        s = point_from_z(1e200 + 1e200j)
        assert abs(s.a) ** 2 + abs(s.b) ** 2 == pytest.approx(1.0)
        img = apply_map(1j, s)
        assert math.isfinite(abs(img.a)) and math.isfinite(abs(img.b))


class TestBlochConversion:
    def test_roundtrip(self):
        rng = np.random.default_rng(5)
        for _ in range(200):
            v = rng.normal(size=3)
            v /= np.linalg.norm(v)
            u2, v2, w2 = bloch_from_point(point_from_bloch(*v))
            assert np.allclose([u2, v2, w2], v, atol=1e-12)

    def test_known_axes(self):
        # |0> at north pole, |1> at south pole, z = 1 on the +u axis
        assert bloch_from_point(point_from_z(0j)) == pytest.approx((0, 0, 1))
        assert bloch_from_point(point_from_z(INF)) == pytest.approx((0, 0, -1))
        assert bloch_from_point(point_from_z(1.0)) == pytest.approx((1, 0, 0))
        assert bloch_from_point(point_from_z(1j)) == pytest.approx((0, 1, 0))

    def test_unit_norm(self):
        rng = np.random.default_rng(6)
        for _ in range(100):
            u, v, w = bloch_from_point(rand_point(rng))
            assert u * u + v * v + w * w == pytest.approx(1.0, abs=1e-12)


class TestApplyMap:
    def test_matches_affine_formula(self):
        rng = np.random.default_rng(7)
        for _ in range(300):
            p = rand_p(rng)
            z = complex(*rng.normal(size=2))
            expected = (z * z - p.conjugate()) / (1.0 + p * z * z)
            got = apply_map(p, point_from_z(z)).z
            assert chordal_distance(point_from_z(got), point_from_z(expected)) < 1e-12

    def test_critical_values(self):
        # z = 0 -> -conj(p), z = inf -> 1/p
        p = 0.4 + 1.2j
        assert apply_map(p, point_from_z(0j)).z == pytest.approx(-p.conjugate())
        assert apply_map(p, point_from_z(INF)).z == pytest.approx(1.0 / p)

    def test_lattes_fixed_point(self):
        # z = 1 is fixed for p = i: (1 + i)/(1 + i) = 1
        s = point_from_z(1.0)
        assert chordal_distance(apply_map(1j, s), s) < 1e-15

    def test_p_zero_is_squaring(self):
        rng = np.random.default_rng(8)
        for _ in range(50):
            z = complex(*rng.normal(size=2))
            got = apply_map(0j, point_from_z(z)).z
            assert got == pytest.approx(z * z, rel=1e-12)

    def test_conjugacy_inversion(self):
        # 1/f_p(z) = f_{-conj(p)}(1/z)
        rng = np.random.default_rng(9)
        for _ in range(10_000):
            p = rand_p(rng)
            s = rand_point(rng)
            lhs = apply_map(p, s)
            lhs_inv = SpherePoint.from_components(lhs.b, lhs.a)
            s_inv = SpherePoint.from_components(s.b, s.a)
            rhs = apply_map(-p.conjugate(), s_inv)
            assert chordal_distance(lhs_inv, rhs) < 1e-12

    def test_conjugacy_reflection(self):
        # conj(f_p(z)) = f_{conj(p)}(conj(z))
        rng = np.random.default_rng(10)
        for _ in range(10_000):
            p = rand_p(rng)
            s = rand_point(rng)
            lhs = apply_map(p, s)
            lhs_conj = SpherePoint.from_components(lhs.a.conjugate(), lhs.b.conjugate())
            s_conj = SpherePoint.from_components(s.a.conjugate(), s.b.conjugate())
            rhs = apply_map(p.conjugate(), s_conj)
            assert chordal_distance(lhs_conj, rhs) < 1e-12


class TestSphericalDerivative:
    def test_zero_at_critical_points(self):
        for p in (0j, 1j, 0.4 + 1.2j):
            for s in critical_points(p):
                assert spherical_derivative(p, s) == 0.0

    def test_lattes_multiplier_at_fixed_point(self):
        # the fixed point z = 1 of the p = i map is repelling with
        # spherical multiplier exactly 2
        assert spherical_derivative(1j, point_from_z(1.0)) == pytest.approx(2.0)

    def test_matches_chart_formula(self):
        # |f'(z)| (1 + |z|^2) / (1 + |f(z)|^2) against the chart-free form
        rng = np.random.default_rng(11)
        for _ in range(300):
            p = rand_p(rng)
            z = complex(*rng.normal(size=2))
            num = 1.0 + p * z * z
            if abs(num) < 1e-6:
                continue
            fz = (z * z - p.conjugate()) / num
            fprime = 2.0 * z * (1.0 + abs(p) ** 2) / num**2
            expected = abs(fprime) * (1.0 + abs(z) ** 2) / (1.0 + abs(fz) ** 2)
            got = spherical_derivative(p, point_from_z(z))
            assert got == pytest.approx(expected, rel=1e-9)

    def test_finite_difference(self):
        # q is the local chordal expansion rate
        rng = np.random.default_rng(12)
        for _ in range(50):
            p = rand_p(rng)
            s = rand_point(rng)
            q = spherical_derivative(p, s)
            eps = 1e-7
            s2 = SpherePoint.from_components(s.a + eps * s.b.conjugate(), s.b - eps * s.a.conjugate())
            num = chordal_distance(apply_map(p, s), apply_map(p, s2))
            den = chordal_distance(s, s2)
            assert num / den == pytest.approx(q, rel=1e-4, abs=1e-6)


class TestChordalDistance:
    def test_range_and_symmetry(self):
        rng = np.random.default_rng(13)
        for _ in range(200):
            s1, s2 = rand_point(rng), rand_point(rng)
            d = chordal_distance(s1, s2)
            assert 0.0 <= d <= 2.0 + 1e-15
            assert d == chordal_distance(s2, s1)
            assert chordal_distance(s1, s1) == 0.0

    def test_antipodal(self):
        assert chordal_distance(point_from_z(0j), point_from_z(INF)) == pytest.approx(2.0)
        assert chordal_distance(point_from_z(1.0), point_from_z(-1.0)) == pytest.approx(2.0)

    def test_matches_euclidean_bloch_distance(self):
        rng = np.random.default_rng(14)
        for _ in range(200):
            s1, s2 = rand_point(rng), rand_point(rng)
            e = np.linalg.norm(np.subtract(bloch_from_point(s1), bloch_from_point(s2)))
            assert chordal_distance(s1, s2) == pytest.approx(e, abs=1e-12)


def test_critical_points_are_poles():
    c0, cinf = critical_points(0.7 - 0.2j)
    assert c0.z == 0j
    assert cinf.z == INF

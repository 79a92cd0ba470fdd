"""Rational qubit maps on the Riemann/Bloch sphere.

Points are kept in normalized homogeneous form (a, b) with |a|^2 + |b|^2 = 1,
representing z = b/a (state a|0> + b|1>).  All operations are chart-free, so
z = 0 and z = infinity need no special cases and nothing can overflow even
when orbits pass arbitrarily close to the poles.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

INF = complex(math.inf, 0.0)


class DegenerateImageError(ArithmeticError):
    """Both homogeneous image components vanished (arithmetic bug)."""


@dataclass(frozen=True)
class SpherePoint:
    """Normalized homogeneous coordinates on the sphere.

    Canonical phase: a is real and >= 0 when a != 0, otherwise b is real
    and >= 0 (so equality and hashing are well defined).
    """

    a: complex
    b: complex

    @staticmethod
    def from_components(a: complex, b: complex) -> "SpherePoint":
        norm = math.hypot(abs(a), abs(b))
        if norm == 0.0:
            raise DegenerateImageError("zero homogeneous vector")
        a /= norm
        b /= norm
        if a != 0:
            phase = a / abs(a)
            a = complex(abs(a), 0.0)
            b *= phase.conjugate()
        else:
            b = complex(abs(b), 0.0)
        return SpherePoint(a, b)

    @property
    def z(self) -> complex:
        """Affine coordinate b/a; INF at the south pole."""
        if self.a == 0:
            return INF
        return self.b / self.a


def point_from_z(z: complex) -> SpherePoint:
    """Point with affine coordinate z; any non-finite z means infinity."""
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        return SpherePoint(0j, complex(1.0, 0.0))
    if abs(z) <= 1.0:
        return SpherePoint.from_components(1.0 + 0j, z)
    # build from the inverted chart so huge |z| cannot overflow on squaring
    return SpherePoint.from_components(1.0 / z, 1.0 + 0j)


def bloch_from_point(s: SpherePoint) -> tuple[float, float, float]:
    """Bloch vector (u, v, w) of the pure state (a, b); unit norm."""
    cross = s.a.conjugate() * s.b
    return (2.0 * cross.real, 2.0 * cross.imag, abs(s.a) ** 2 - abs(s.b) ** 2)


def point_from_bloch(u: float, v: float, w: float) -> SpherePoint:
    """Inverse of bloch_from_point for unit vectors (u, v, w)."""
    if 1.0 + w > 1e-12:
        a = math.sqrt((1.0 + w) / 2.0)
        b = complex(u, v) / (2.0 * a)
        return SpherePoint.from_components(a, b)
    return SpherePoint(0j, complex(1.0, 0.0))


def _image_components(p: complex, s: SpherePoint) -> tuple[complex, complex]:
    # homogeneous form of f_p(z) = (z^2 - conj(p)) / (1 + p z^2)
    a2 = s.a * s.a
    b2 = s.b * s.b
    return a2 + p * b2, b2 - p.conjugate() * a2


def apply_map(p: complex, s: SpherePoint) -> SpherePoint:
    """One application of the degree-2 map selected by the complex parameter p."""
    big_a, big_b = _image_components(p, s)
    if big_a == 0 and big_b == 0:
        raise DegenerateImageError(f"degenerate image at p={p}, point={s}")
    return SpherePoint.from_components(big_a, big_b)


def spherical_derivative(p: complex, s: SpherePoint) -> float:
    """Expansion factor of the map at s in the chordal metric.

    Chart-free closed form: 2 |a| |b| (1 + |p|^2) / (|A|^2 + |B|^2) where
    (A, B) is the unnormalized homogeneous image.  Finite everywhere,
    zero exactly at the two critical points (the poles).
    """
    big_a, big_b = _image_components(p, s)
    s2 = abs(big_a) ** 2 + abs(big_b) ** 2
    return 2.0 * abs(s.a) * abs(s.b) * (1.0 + abs(p) ** 2) / s2


def critical_points(p: complex) -> tuple[SpherePoint, SpherePoint]:
    """The two critical points z = 0 and z = infinity (independent of p)."""
    return point_from_z(0j), point_from_z(INF)


def chordal_distance(s1: SpherePoint, s2: SpherePoint) -> float:
    """Chordal metric on the unit sphere, in [0, 2]; chart-free."""
    return 2.0 * abs(s1.a * s2.b - s2.a * s1.b)

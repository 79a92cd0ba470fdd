"""Mixed-state dynamics of the iterated protocol inside the Bloch ball.

One protocol step squares the density-matrix entries (post-selected CNOT),
renormalizes, and conjugates by the final single-qubit unitary U(p).  The
closed-form Bloch recursion for p = i is kept as an independent
implementation for cross-validation.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

_BALL_SLACK = 1e-10


class BallExitError(ArithmeticError):
    """Bloch norm left the closed ball by more than floating-point drift."""


@dataclass(frozen=True)
class BlochState:
    """A density matrix as a real Bloch vector, valid in the closed unit ball."""

    u: float
    v: float
    w: float

    def __post_init__(self):
        n2 = self.u**2 + self.v**2 + self.w**2
        if n2 > 1.0 + _BALL_SLACK:
            raise BallExitError(f"Bloch norm {math.sqrt(n2)} outside the ball")

    @property
    def norm(self) -> float:
        return math.sqrt(self.u**2 + self.v**2 + self.w**2)


def _clamped(u: float, v: float, w: float) -> BlochState:
    """Clamp tiny floating-point overshoots back onto the sphere."""
    n = math.sqrt(u * u + v * v + w * w)
    if n > 1.0:
        if n > 1.0 + _BALL_SLACK:
            raise BallExitError(f"Bloch norm {n} outside the ball")
        u, v, w = u / n, v / n, w / n
    return BlochState(u, v, w)


def density_matrix(rho: BlochState) -> np.ndarray:
    """2x2 density matrix (1/2)(I + uX + vY + wZ)."""
    return 0.5 * np.array(
        [
            [1.0 + rho.w, rho.u - 1j * rho.v],
            [rho.u + 1j * rho.v, 1.0 - rho.w],
        ],
        dtype=np.complex128,
    )


def state_from_density(m: np.ndarray) -> BlochState:
    return _clamped(2.0 * m[1, 0].real, 2.0 * m[1, 0].imag, (m[0, 0] - m[1, 1]).real)


def selection_map(rho: BlochState) -> BlochState:
    """Entrywise square of the density matrix, renormalized to trace one."""
    m = density_matrix(rho)
    sq = np.array(
        [[m[0, 0] ** 2, m[0, 1] ** 2], [m[1, 0] ** 2, m[1, 1] ** 2]],
        dtype=np.complex128,
    )
    return state_from_density(sq / (m[0, 0] ** 2 + m[1, 1] ** 2).real)


def unitary_from_p(p: complex) -> np.ndarray:
    """Final single-qubit unitary [[1, p], [-conj(p), 1]] / sqrt(1 + |p|^2)."""
    c = 1.0 / math.sqrt(1.0 + abs(p) ** 2)
    return c * np.array([[1.0, p], [-p.conjugate(), 1.0]], dtype=np.complex128)


def unitary_from_angles(xi: float, phi: float, omega: float) -> np.ndarray:
    """Three-angle single-qubit unitary; omega = 0 reduces to unitary_from_p
    with p = tan(xi) exp(-i phi) up to global phase."""
    return np.array(
        [
            [math.cos(xi) * cmath.exp(-1j * omega), math.sin(xi) * cmath.exp(-1j * phi)],
            [-math.sin(xi) * cmath.exp(1j * phi), math.cos(xi) * cmath.exp(1j * omega)],
        ],
        dtype=np.complex128,
    )


def mixed_step(p: complex, rho: BlochState) -> BlochState:
    """One full protocol step U(p) S(rho) U(p)^dagger on the Bloch ball."""
    up = unitary_from_p(p)
    m = density_matrix(selection_map(rho))
    return state_from_density(up @ m @ up.conj().T)


def mixed_step_lattes(rho: BlochState) -> BlochState:
    """Closed-form Bloch recursion for p = i; independent of mixed_step."""
    d = 1.0 + rho.w**2
    return _clamped(
        (rho.u**2 - rho.v**2) / d,
        2.0 * rho.w / d,
        -2.0 * rho.u * rho.v / d,
    )


def purity(rho: BlochState) -> float:
    """Tr rho^2 = (1 + u^2 + v^2 + w^2) / 2, in [1/2, 1]."""
    return 0.5 * (1.0 + rho.u**2 + rho.v**2 + rho.w**2)


def mixed_step_ensemble(
    p: complex, u: np.ndarray, v: np.ndarray, w: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized mixed_step over parallel arrays of Bloch coordinates.

    Same operator algebra as mixed_step, expanded once for speed; the scalar
    path is the reference in tests.
    """
    r11 = 0.5 * (1.0 + w)
    r22 = 0.5 * (1.0 - w)
    r12 = 0.5 * (u - 1j * v)
    n = r11 * r11 + r22 * r22
    s11 = r11 * r11 / n
    s22 = r22 * r22 / n
    s12 = r12 * r12 / n
    s21 = np.conj(s12)

    c2 = 1.0 / (1.0 + abs(p) ** 2)
    pc = p.conjugate()
    # U S U^dag with U = c [[1, p], [-conj(p), 1]]
    m11 = s11 + p * s21
    m12 = s12 + p * s22
    m21 = -pc * s11 + s21
    m22 = -pc * s12 + s22
    o11 = c2 * (m11 + m12 * pc)
    o21 = c2 * (m21 + m22 * pc)
    o22 = c2 * (-m21 * p + m22)

    uu = 2.0 * o21.real
    vv = 2.0 * o21.imag
    ww = (o11 - o22).real
    nn = np.sqrt(uu * uu + vv * vv + ww * ww)
    if np.any(nn > 1.0 + _BALL_SLACK):
        raise BallExitError("ensemble step left the Bloch ball")
    over = nn > 1.0
    if np.any(over):
        uu[over] /= nn[over]
        vv[over] /= nn[over]
        ww[over] /= nn[over]
    return uu, vv, ww

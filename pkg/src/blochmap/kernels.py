"""Numba kernels for long sequential orbits on the sphere.

Everything operates on normalized homogeneous pairs (a, b); the update is
the homogeneous form of f_p, renormalized each step.  Kernels release the
GIL so sweeps can run them from a thread pool.
"""
from __future__ import annotations

import numpy as np
from numba import njit

LOG_FLOOR = np.log(1e-15)

TWO_PI = 2.0 * np.pi


@njit(cache=True, nogil=True)
def _step(a, b, p, pc):
    big_a = a * a + p * b * b
    big_b = b * b - pc * a * a
    s2 = abs(big_a) ** 2 + abs(big_b) ** 2
    s = np.sqrt(s2)
    return big_a / s, big_b / s, s2


@njit(cache=True, nogil=True)
def lyapunov_orbit(a, b, p, n_steps, burn_in):
    """Accumulate log spherical derivatives along one orbit.

    Returns (sum_log, sum_log_sq, n_clamped, hit_critical).  Terms below
    exp(LOG_FLOOR) are clamped and counted; hit_critical is set when the
    derivative is exactly zero (orbit landed on a pole).
    """
    pc = np.conj(p)
    scale = 1.0 + abs(p) ** 2
    for _ in range(burn_in):
        a, b, _ = _step(a, b, p, pc)
    total = 0.0
    total_sq = 0.0
    n_clamped = 0
    for _ in range(n_steps):
        q = 2.0 * abs(a) * abs(b) * scale
        a, b, s2 = _step(a, b, p, pc)
        q /= s2
        if q == 0.0:
            return total, total_sq, n_clamped, True
        term = np.log(q)
        if term < LOG_FLOOR:
            term = LOG_FLOOR
            n_clamped += 1
        total += term
        total_sq += term * term
    return total, total_sq, n_clamped, False


@njit(cache=True, nogil=True)
def advance_orbit(a, b, p, n_steps):
    pc = np.conj(p)
    for _ in range(n_steps):
        a, b, _ = _step(a, b, p, pc)
    return a, b


@njit(cache=True, nogil=True)
def orbit_window(a, b, p, n_out):
    """Record n_out consecutive orbit points and their spherical derivatives."""
    pc = np.conj(p)
    scale = 1.0 + abs(p) ** 2
    aa = np.empty(n_out, dtype=np.complex128)
    bb = np.empty(n_out, dtype=np.complex128)
    qq = np.empty(n_out, dtype=np.float64)
    for k in range(n_out):
        aa[k] = a
        bb[k] = b
        q = 2.0 * abs(a) * abs(b) * scale
        a, b, s2 = _step(a, b, p, pc)
        qq[k] = q / s2
    return aa, bb, qq


@njit(cache=True, nogil=True)
def orbit_visits(a, b, p, n_steps, counts):
    """Accumulate grid-cell visits of one forward orbit into counts.

    counts has shape (n_c, n_phi); each of the n_steps successive states
    (including the start, excluding the final image) is binned once.
    """
    pc = np.conj(p)
    n_c, n_phi = counts.shape
    for _ in range(n_steps):
        cross = np.conj(a) * b
        u = 2.0 * cross.real
        v = 2.0 * cross.imag
        w = abs(a) ** 2 - abs(b) ** 2
        phi = np.arctan2(v, u) % TWO_PI
        iphi = int(n_phi * phi / TWO_PI) % n_phi
        ic = int(n_c * (w + 1.0) / 2.0)
        if ic > n_c - 1:
            ic = n_c - 1
        counts[ic, iphi] += 1
        a, b, _ = _step(a, b, p, pc)
    return a, b


@njit(cache=True, nogil=True)
def iterate_pure_ensemble(a, b, p, n_steps):
    """Advance arrays of homogeneous pairs n_steps times, in place."""
    pc = np.conj(p)
    for _ in range(n_steps):
        for i in range(a.shape[0]):
            a[i], b[i], _ = _step(a[i], b[i], p, pc)


@njit(cache=True, nogil=True)
def mixed_ensemble_step(u, v, w, p):
    """One protocol step applied in place to Bloch-coordinate arrays.

    Same algebra as mixed.mixed_step_ensemble, loop form for numba.
    Returns the count of states pushed outside the ball beyond drift
    tolerance (always 0 for a correct map).
    """
    pc = np.conj(p)
    c2 = 1.0 / (1.0 + abs(p) ** 2)
    bad = 0
    for i in range(u.shape[0]):
        r11 = 0.5 * (1.0 + w[i])
        r22 = 0.5 * (1.0 - w[i])
        r12 = 0.5 * (u[i] - 1j * v[i])
        n = r11 * r11 + r22 * r22
        s11 = r11 * r11 / n
        s22 = r22 * r22 / n
        s12 = r12 * r12 / n
        s21 = np.conj(s12)
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
        if nn > 1.0:
            if nn > 1.0 + 1e-10:
                bad += 1
            uu /= nn
            vv /= nn
            ww /= nn
        u[i] = uu
        v[i] = vv
        w[i] = ww
    return bad


@njit(cache=True, nogil=True)
def bin_directions(u, v, w, counts):
    """Mark visited cells of the current point cloud; states within 1e-14 of
    the center are skipped.  counts shape (n_c, n_phi), any integer dtype."""
    n_c, n_phi = counts.shape
    skipped = 0
    for i in range(u.shape[0]):
        n = np.sqrt(u[i] * u[i] + v[i] * v[i] + w[i] * w[i])
        if n < 1e-14:
            skipped += 1
            continue
        phi = np.arctan2(v[i], u[i]) % TWO_PI
        iphi = int(n_phi * phi / TWO_PI) % n_phi
        ic = int(n_c * (w[i] / n + 1.0) / 2.0)
        if ic > n_c - 1:
            ic = n_c - 1
        counts[ic, iphi] += 1
    return skipped

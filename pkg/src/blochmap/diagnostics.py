"""Ergodicity and purification diagnostics for the iterated protocol.

Implements the measurement battery: Lyapunov exponents along orbits,
attracting-cycle detection on critical orbits, time- and ensemble-averaged
invariant densities, angular coverage time of localized ensembles, purity
trajectory statistics, purification fractions for mixed inputs, and the
combined four-criteria ergodicity classifier.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .sampling import (
    EqualAreaGrid,
    Histogram,
    Patch,
    SeededSampler,
    patch_states,
    ball_states,
    random_patch,
    shell_states,
    uniform_directions,
)
from .sphere import SpherePoint, critical_points, point_from_bloch


class CriticalOrbitHitError(ArithmeticError):
    """Orbit landed exactly on a critical point; the log-derivative sum
    diverges.  Resample the start point."""


# ---------------------------------------------------------------------------
# Lyapunov exponents


@dataclass(frozen=True)
class LyapunovEstimate:
    value: float
    stderr: float
    n_steps: int
    n_clamped: int = 0


def lyapunov(p: complex, z0: SpherePoint, n_steps: int, burn_in: int = 1000) -> LyapunovEstimate:
    """Mean log spherical derivative along the orbit of z0, after burn-in.

    Terms where the derivative underflows are clamped at ln(1e-15) and
    counted; a clean orbit never clamps.
    """
    total, total_sq, n_clamped, hit = kernels.lyapunov_orbit(
        z0.a, z0.b, complex(p), n_steps, burn_in
    )
    if hit:
        raise CriticalOrbitHitError(f"orbit of {z0} hit a critical point at p={p}")
    mean = total / n_steps
    var = max(0.0, total_sq / n_steps - mean * mean)
    return LyapunovEstimate(mean, math.sqrt(var / n_steps), n_steps, n_clamped)


def lyapunov_spectrum(
    p: complex,
    sampler: SeededSampler,
    n_starts: int,
    n_steps: int,
    burn_in: int = 1000,
    max_retries: int = 3,
) -> list[LyapunovEstimate]:
    """Lyapunov estimates from independent uniform random starts.

    A start whose orbit hits a critical point exactly is resampled from a
    shifted stream (vanishing-probability event, but cheap to handle).
    """
    out = []
    for i in range(n_starts):
        for attempt in range(max_retries + 1):
            d = uniform_directions(sampler.child(i * (max_retries + 1) + attempt), 1)[0]
            z0 = point_from_bloch(*d)
            try:
                out.append(lyapunov(p, z0, n_steps, burn_in))
                break
            except CriticalOrbitHitError:
                if attempt == max_retries:
                    raise
    return out


# ---------------------------------------------------------------------------
# Attracting cycles


@dataclass(frozen=True)
class CycleReport:
    found: bool
    period: int = 0
    multiplier_modulus: float = 0.0
    representative: SpherePoint | None = None
    steps_used: int = 0


def detect_attracting_cycle(
    p: complex,
    z0: SpherePoint,
    max_period: int = 500,
    burn_in: int = 100_000,
    window: int | None = None,
    tol: float = 1e-9,
    tol_mult: float = 1e-6,
) -> CycleReport:
    """Search the orbit of z0 for an attracting cycle of period <= max_period.

    After burn-in, a period q is accepted when the orbit recurs within
    chordal tol over the whole verification window AND the q-step multiplier
    (product of spherical derivatives) is below 1 - tol_mult; the multiplier
    test rejects neutral recurrences.  Super-attracting cycles show up with
    multiplier 0.
    """
    if window is None:
        window = 3 * max_period
    p = complex(p)
    a, b = kernels.advance_orbit(z0.a, z0.b, p, burn_in)
    aa, bb, qq = kernels.orbit_window(a, b, p, window + max_period)
    steps_used = burn_in + window + max_period
    for per in range(1, max_period + 1):
        d = 2.0 * np.abs(aa[:window] * bb[per : per + window] - aa[per : per + window] * bb[:window])
        if d.max() >= tol:
            continue
        qs = qq[:per]
        if np.any(qs == 0.0):
            mult = 0.0
        else:
            log_mult = float(np.log(qs).sum())
            mult = math.exp(log_mult) if log_mult < 50.0 else math.inf
        if mult < 1.0 - tol_mult:
            return CycleReport(
                True, per, mult, SpherePoint(complex(aa[0]), complex(bb[0])), steps_used
            )
    return CycleReport(False, steps_used=steps_used)


# ---------------------------------------------------------------------------
# Invariant densities


def _homogeneous_from_bloch(uvw: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized unit Bloch vectors -> normalized (a, b) pairs."""
    w = np.clip(uvw[:, 2], -1.0, 1.0)
    a = np.sqrt((1.0 + w) / 2.0).astype(np.complex128)
    phi = np.arctan2(uvw[:, 1], uvw[:, 0])
    b = np.sqrt((1.0 - w) / 2.0) * np.exp(1j * phi)
    return a, b


def _bloch_from_homogeneous(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    cross = np.conj(a) * b
    return np.column_stack(
        (2.0 * cross.real, 2.0 * cross.imag, np.abs(a) ** 2 - np.abs(b) ** 2)
    )


def time_average_density(
    p: complex,
    n_orbits: int,
    orbit_len: int,
    grid: EqualAreaGrid,
    sampler: SeededSampler,
) -> Histogram:
    """Visit histogram of forward orbits from uniform random pure starts."""
    h = Histogram(grid)
    counts = h.counts
    for i in range(n_orbits):
        d = uniform_directions(sampler.child(i), 1)[0]
        z0 = point_from_bloch(*d)
        kernels.orbit_visits(z0.a, z0.b, complex(p), orbit_len, counts)
    return h


def ensemble_average_density(
    p: complex,
    n_patches: int,
    samples_per_patch: int,
    n_steps: int,
    grid: EqualAreaGrid,
    sampler: SeededSampler,
) -> Histogram:
    """Histogram of final positions of patch-localized pure ensembles."""
    h = Histogram(grid)
    for j in range(n_patches):
        patch = random_patch(sampler.child(2 * j))
        uvw = patch_states(sampler.child(2 * j + 1), patch, 1.0, samples_per_patch)
        a, b = _homogeneous_from_bloch(uvw)
        kernels.iterate_pure_ensemble(a, b, complex(p), n_steps)
        h.accumulate(_bloch_from_homogeneous(a, b))
    return h


# ---------------------------------------------------------------------------
# Coverage time


@dataclass(frozen=True)
class CoverageReport:
    n_crit: int | None
    covered_fraction_series: np.ndarray
    mean_purity_series: np.ndarray
    mean_purity_at_ncrit: float | None

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("step,covered_fraction,mean_purity\n")
            for k, (c, q) in enumerate(
                zip(self.covered_fraction_series, self.mean_purity_series)
            ):
                fh.write(f"{k},{c:.10g},{q:.10g}\n")


def coverage_time(
    p: complex,
    patch: Patch,
    p0: float,
    n_samples: int,
    grid: EqualAreaGrid,
    max_steps: int,
    sampler: SeededSampler,
) -> CoverageReport:
    """Steps until the current-step point cloud of a patch ensemble hits
    every grid cell.  States at the ball center are skipped when binning."""
    uvw = patch_states(sampler, patch, p0, n_samples)
    u = np.ascontiguousarray(uvw[:, 0])
    v = np.ascontiguousarray(uvw[:, 1])
    w = np.ascontiguousarray(uvw[:, 2])
    p = complex(p)
    fracs = []
    purities = []
    counts = np.zeros((grid.n_c, grid.n_phi), dtype=np.int64)
    n_cells = grid.n_cells

    def snapshot() -> float:
        counts[:] = 0
        kernels.bin_directions(u, v, w, counts)
        return np.count_nonzero(counts) / n_cells

    fracs.append(snapshot())
    purities.append(0.5 * (1.0 + float(np.mean(u * u + v * v + w * w))))
    n_crit = None
    for step in range(1, max_steps + 1):
        kernels.mixed_ensemble_step(u, v, w, p)
        fracs.append(snapshot())
        purities.append(0.5 * (1.0 + float(np.mean(u * u + v * v + w * w))))
        if fracs[-1] == 1.0:
            n_crit = step
            break
    return CoverageReport(
        n_crit,
        np.array(fracs),
        np.array(purities),
        purities[n_crit] if n_crit is not None else None,
    )


# ---------------------------------------------------------------------------
# Purity statistics


@dataclass(frozen=True)
class PurityStats:
    threshold: float
    fraction_step_increase: np.ndarray
    fraction_above_initial: np.ndarray
    mean_purity: np.ndarray
    fraction_above_threshold: np.ndarray
    final_purity: np.ndarray = field(repr=False, default=None)  # type: ignore[assignment]

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("step,frac_step_increase,frac_above_initial,mean_purity,frac_above_threshold\n")
            for k in range(len(self.mean_purity)):
                fh.write(
                    f"{k + 1},{self.fraction_step_increase[k]:.10g},"
                    f"{self.fraction_above_initial[k]:.10g},"
                    f"{self.mean_purity[k]:.10g},"
                    f"{self.fraction_above_threshold[k]:.10g}\n"
                )


def purity_stats(
    p: complex,
    p0: float,
    n_samples: int,
    n_steps: int,
    sampler: SeededSampler,
    threshold: float = 0.55,
) -> PurityStats:
    """Per-step purity statistics of a shell-sampled ensemble."""
    uvw = shell_states(sampler, p0, n_samples)
    u = np.ascontiguousarray(uvw[:, 0])
    v = np.ascontiguousarray(uvw[:, 1])
    w = np.ascontiguousarray(uvw[:, 2])
    p = complex(p)
    prev = 0.5 * (1.0 + u * u + v * v + w * w)
    f_inc = np.empty(n_steps)
    f_above0 = np.empty(n_steps)
    means = np.empty(n_steps)
    f_thresh = np.empty(n_steps)
    for k in range(n_steps):
        kernels.mixed_ensemble_step(u, v, w, p)
        cur = 0.5 * (1.0 + u * u + v * v + w * w)
        f_inc[k] = np.mean(cur > prev)
        f_above0[k] = np.mean(cur > p0)
        means[k] = np.mean(cur)
        f_thresh[k] = np.mean(cur > threshold)
        prev = cur
    return PurityStats(threshold, f_inc, f_above0, means, f_thresh, prev)


# ---------------------------------------------------------------------------
# Purification fraction


@dataclass(frozen=True)
class PurificationReport:
    fraction: float
    n_purified: int
    n_mixed: int
    n_unresolved: int
    n_samples: int


def purification_fraction(
    p: complex,
    n_samples: int,
    max_steps: int,
    sampler: SeededSampler,
    eps_pure: float = 1e-6,
    eps_mixed: float = 1e-6,
    confirm_steps: int = 10,
) -> PurificationReport:
    """Fraction of volume-uniform ball states driven to the sphere surface.

    A trajectory is purified once it either lands exactly on the sphere
    (numerically absorbing: pure states stay pure) or holds purity above
    1 - eps_pure for confirm_steps consecutive steps; the confirmation
    window rejects transient purity excursions that later fall back to the
    mixed attractor.  Mixed means purity < 1/2 + eps_mixed.  Anything
    unresolved at max_steps counts as mixed (the headline fraction is a
    lower bound) but is reported.
    """
    if eps_pure <= 0 or eps_mixed <= 0:
        raise ValueError("classification margins must be positive")
    uvw = ball_states(sampler, n_samples)
    u = np.ascontiguousarray(uvw[:, 0])
    v = np.ascontiguousarray(uvw[:, 1])
    w = np.ascontiguousarray(uvw[:, 2])
    p = complex(p)
    idx = np.arange(n_samples)
    above_run = np.zeros(n_samples, dtype=np.int64)
    n_purified = 0
    n_mixed = 0
    for _ in range(max_steps):
        if idx.size == 0:
            break
        au, av, aw = u[idx].copy(), v[idx].copy(), w[idx].copy()
        kernels.mixed_ensemble_step(au, av, aw, p)
        u[idx], v[idx], w[idx] = au, av, aw
        pur = 0.5 * (1.0 + au * au + av * av + aw * aw)
        above = pur > 1.0 - eps_pure
        above_run[idx] = np.where(above, above_run[idx] + 1, 0)
        is_pure = (pur >= 1.0) | (above_run[idx] >= confirm_steps)
        is_mixed = pur < 0.5 + eps_mixed
        n_purified += int(is_pure.sum())
        n_mixed += int(is_mixed.sum())
        idx = idx[~(is_pure | is_mixed)]
    return PurificationReport(
        n_purified / n_samples, n_purified, n_mixed, int(idx.size), n_samples
    )


# ---------------------------------------------------------------------------
# Combined classifier


@dataclass(frozen=True)
class ErgodicityFlags:
    no_attracting_cycles: bool
    ensemble_spreads: bool
    orbit_dense: bool
    lyapunov_positive: bool

    @property
    def ergodic_like(self) -> bool:
        return (
            self.no_attracting_cycles
            and self.ensemble_spreads
            and self.orbit_dense
            and self.lyapunov_positive
        )

    def as_tuple(self) -> tuple[bool, bool, bool, bool]:
        return (
            self.no_attracting_cycles,
            self.ensemble_spreads,
            self.orbit_dense,
            self.lyapunov_positive,
        )


@dataclass(frozen=True)
class ClassifyConfig:
    """Per-criterion budgets; desk defaults, paper() for full-scale runs."""

    cycle_burn_in: int = 100_000
    cycle_max_period: int = 100
    cycle_tol: float = 1e-9
    n_orbits: int = 1
    orbit_len: int = 1_000_000
    grid_n_phi: int = 100
    grid_n_c: int = 100
    coverage_samples: int = 1_000_000
    coverage_max_steps: int = 200
    lyap_starts: int = 10
    lyap_steps: int = 100_000
    lyap_burn_in: int = 1000
    lambda_min: float = 0.01
    spread_max: float = 0.05

    @staticmethod
    def desk() -> "ClassifyConfig":
        return ClassifyConfig()

    @staticmethod
    def paper() -> "ClassifyConfig":
        return ClassifyConfig(
            cycle_burn_in=10_000_000,
            cycle_max_period=500,
            n_orbits=100,
            orbit_len=10_000_000,
            grid_n_phi=500,
            grid_n_c=500,
            coverage_samples=10_000_000,
            lyap_starts=100,
            lyap_steps=10_000_000,
        )

    @property
    def grid(self) -> EqualAreaGrid:
        return EqualAreaGrid(self.grid_n_phi, self.grid_n_c)


def classify_ergodic(
    p: complex, sampler: SeededSampler, config: ClassifyConfig | None = None
) -> ErgodicityFlags:
    """Run the four ergodicity criteria at the configured budgets."""
    cfg = config or ClassifyConfig()
    p = complex(p)
    grid = cfg.grid

    no_cycles = True
    for z0 in critical_points(p):
        rep = detect_attracting_cycle(
            p, z0, cfg.cycle_max_period, cfg.cycle_burn_in, tol=cfg.cycle_tol
        )
        if rep.found:
            no_cycles = False
            break

    patch = random_patch(sampler.child(1))
    cov = coverage_time(
        p, patch, 1.0, cfg.coverage_samples, grid, cfg.coverage_max_steps, sampler.child(2)
    )
    spreads = cov.n_crit is not None

    dens = time_average_density(p, cfg.n_orbits, cfg.orbit_len, grid, sampler.child(3))
    dense = bool(np.all(dens.counts > 0))

    try:
        ests = lyapunov_spectrum(
            p, sampler.child(4), cfg.lyap_starts, cfg.lyap_steps, cfg.lyap_burn_in
        )
        vals = np.array([e.value for e in ests])
        positive = bool(np.all(vals > cfg.lambda_min)) and (
            float(vals.max() - vals.min()) < cfg.spread_max * abs(float(vals.mean()))
        )
    except CriticalOrbitHitError:
        positive = False

    return ErgodicityFlags(no_cycles, spreads, dense, positive)

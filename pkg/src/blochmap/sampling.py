"""Seeded state sampling and equal-area sphere histograms.

Sampling is built on numpy's counter-based Philox generator keyed by
(seed, stream), so every parallel task can own a disjoint, reproducible
stream regardless of worker count or scheduling.
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field

import numpy as np

_MASK64 = (1 << 64) - 1
TWO_PI = 2.0 * math.pi

_BLH_MAGIC = b"BLH1"


class CenterStateError(ValueError):
    """Direction requested for a state at the center of the ball."""


class GridMismatchError(ValueError):
    """Histogram operation across two different grids."""


class HistogramFormatError(ValueError):
    """Malformed BLH1 histogram file."""


def mix64(*parts: int) -> int:
    """Deterministic 64-bit mix of integers (splitmix64 finalizer chain)."""
    h = 0x9E3779B97F4A7C15
    for p in parts:
        h = (h ^ (p & _MASK64)) * 0xBF58476D1CE4E5B9 & _MASK64
        h = (h ^ (h >> 27)) * 0x94D049BB133111EB & _MASK64
        h ^= h >> 31
    return h


@dataclass(frozen=True)
class SeededSampler:
    """Value-type handle on a (seed, stream) Philox stream."""

    seed: int
    stream: int = 0

    def generator(self) -> np.random.Generator:
        key = np.array([self.seed & _MASK64, self.stream & _MASK64], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))

    def child(self, index: int) -> "SeededSampler":
        """Disjoint stream derived deterministically from this one."""
        return SeededSampler(self.seed, mix64(self.stream, index))


def uniform_directions(sampler: SeededSampler, n: int) -> np.ndarray:
    """(n, 3) unit vectors uniform on the sphere (phi uniform, cos-theta uniform)."""
    rng = sampler.generator()
    phi = rng.random(n) * TWO_PI
    c = rng.random(n) * 2.0 - 1.0
    s = np.sqrt(np.maximum(0.0, 1.0 - c * c))
    return np.column_stack((s * np.cos(phi), s * np.sin(phi), c))


def shell_radius(p0: float) -> float:
    if not 0.5 <= p0 <= 1.0:
        raise ValueError(f"purity {p0} outside [0.5, 1]")
    return math.sqrt(2.0 * p0 - 1.0)


def shell_states(sampler: SeededSampler, p0: float, n: int) -> np.ndarray:
    """(n, 3) Bloch vectors uniform on the shell of purity p0."""
    return shell_radius(p0) * uniform_directions(sampler, n)


@dataclass(frozen=True)
class Patch:
    """Rectangle in (phi, cos-theta) coordinates; defaults cover exactly
    1/10000 of the sphere."""

    phi0: float = 0.0
    c0: float = 0.0
    dphi: float = TWO_PI / 100.0
    dc: float = 2.0 / 100.0

    def __post_init__(self):
        if not (-1.0 <= self.c0 <= 1.0 and self.c0 + self.dc <= 1.0 + 1e-12):
            raise ValueError("patch leaves the c = cos(theta) range [-1, 1]")

    @property
    def solid_angle(self) -> float:
        return self.dphi * self.dc


def random_patch(sampler: SeededSampler, dphi: float = TWO_PI / 100.0, dc: float = 2.0 / 100.0) -> Patch:
    rng = sampler.generator()
    return Patch(rng.random() * TWO_PI, -1.0 + rng.random() * (2.0 - dc), dphi, dc)


def patch_states(sampler: SeededSampler, patch: Patch, p0: float, n: int) -> np.ndarray:
    """(n, 3) Bloch vectors with directions uniform in the patch rectangle
    and radius fixed by the purity p0."""
    r = shell_radius(p0)
    rng = sampler.generator()
    phi = patch.phi0 + rng.random(n) * patch.dphi
    c = np.clip(patch.c0 + rng.random(n) * patch.dc, -1.0, 1.0)
    s = np.sqrt(np.maximum(0.0, 1.0 - c * c))
    return r * np.column_stack((s * np.cos(phi), s * np.sin(phi), c))


def ball_states(sampler: SeededSampler, n: int) -> np.ndarray:
    """(n, 3) Bloch vectors uniform w.r.t. Euclidean volume of the ball."""
    rng = sampler.generator()
    phi = rng.random(n) * TWO_PI
    c = rng.random(n) * 2.0 - 1.0
    r = np.cbrt(rng.random(n))
    s = np.sqrt(np.maximum(0.0, 1.0 - c * c))
    return np.column_stack((r * s * np.cos(phi), r * s * np.sin(phi), r * c))


@dataclass(frozen=True)
class EqualAreaGrid:
    """n_phi x n_c grid of cells of equal solid angle 4 pi / (n_phi n_c)."""

    n_phi: int
    n_c: int

    def __post_init__(self):
        if self.n_phi < 1 or self.n_c < 1:
            raise ValueError("grid dimensions must be positive")

    @property
    def n_cells(self) -> int:
        return self.n_phi * self.n_c

    def cell_index(self, u: float, v: float, w: float) -> int:
        """Cell id of the direction of (u, v, w); id = ic * n_phi + iphi."""
        n = math.sqrt(u * u + v * v + w * w)
        if n < 1e-14:
            raise CenterStateError("direction undefined at the ball center")
        phi = math.atan2(v, u) % TWO_PI
        iphi = int(self.n_phi * phi / TWO_PI) % self.n_phi
        ic = min(int(self.n_c * (w / n + 1.0) / 2.0), self.n_c - 1)
        return ic * self.n_phi + iphi

    def cell_indices(self, uvw: np.ndarray) -> np.ndarray:
        """Vectorized cell ids for an (n, 3) array of non-center states."""
        n = np.linalg.norm(uvw, axis=1)
        if np.any(n < 1e-14):
            raise CenterStateError("direction undefined at the ball center")
        phi = np.arctan2(uvw[:, 1], uvw[:, 0]) % TWO_PI
        iphi = (self.n_phi * phi / TWO_PI).astype(np.int64) % self.n_phi
        c = uvw[:, 2] / n
        ic = np.minimum((self.n_c * (c + 1.0) / 2.0).astype(np.int64), self.n_c - 1)
        return ic * self.n_phi + iphi


@dataclass
class Histogram:
    """Per-cell visit counts on an equal-area grid.

    counts has shape (n_c, n_phi); merge order never matters because counts
    are plain integers added cellwise.
    """

    grid: EqualAreaGrid
    counts: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.counts is None:
            self.counts = np.zeros((self.grid.n_c, self.grid.n_phi), dtype=np.uint64)
        else:
            self.counts = np.asarray(self.counts, dtype=np.uint64)
            if self.counts.shape != (self.grid.n_c, self.grid.n_phi):
                raise GridMismatchError("counts shape does not match grid")

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def accumulate(self, uvw: np.ndarray) -> None:
        ids = self.grid.cell_indices(uvw)
        self.counts += np.bincount(ids, minlength=self.grid.n_cells).astype(
            np.uint64
        ).reshape(self.counts.shape)

    def merge(self, other: "Histogram") -> "Histogram":
        if other.grid != self.grid:
            raise GridMismatchError("cannot merge histograms on different grids")
        return Histogram(self.grid, self.counts + other.counts)

    def normalized(self) -> np.ndarray:
        t = self.total
        if t == 0:
            raise ValueError("empty histogram has no normalization")
        return self.counts.astype(np.float64) / t

    def save(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(_BLH_MAGIC)
            fh.write(struct.pack("<IIQ", self.grid.n_phi, self.grid.n_c, self.total))
            fh.write(self.counts.astype("<u8").tobytes())

    @staticmethod
    def load(path) -> "Histogram":
        with open(path, "rb") as fh:
            magic = fh.read(4)
            if magic != _BLH_MAGIC:
                raise HistogramFormatError(f"bad magic {magic!r}")
            n_phi, n_c, total = struct.unpack("<IIQ", fh.read(16))
            raw = fh.read(8 * n_phi * n_c)
            if len(raw) != 8 * n_phi * n_c:
                raise HistogramFormatError("truncated histogram payload")
            counts = np.frombuffer(raw, dtype="<u8").reshape(n_c, n_phi)
            h = Histogram(EqualAreaGrid(n_phi, n_c), counts.copy())
            if h.total != total:
                raise HistogramFormatError("count total does not match header")
            return h

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("iphi,ic,count\n")
            for ic in range(self.grid.n_c):
                for iphi in range(self.grid.n_phi):
                    fh.write(f"{iphi},{ic},{int(self.counts[ic, iphi])}\n")


def histogram_distance(h1: Histogram, h2: Histogram) -> float:
    """Total-variation distance of the normalized histograms, in [0, 1]."""
    if h1.grid != h2.grid:
        raise GridMismatchError("histograms live on different grids")
    return 0.5 * float(np.abs(h1.normalized() - h2.normalized()).sum())

"""Parameter-plane sweeps with checkpoint/resume.

A sweep evaluates one diagnostic (classify, lyapunov, or purification) at
every node of a rectangular grid in the complex parameter plane.  Each cell
owns a sampler stream derived from (seed, cell id), so results are
independent of worker count and schedule, and a resumed sweep never
recomputes a finished cell.
"""
from __future__ import annotations

import struct
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .diagnostics import (
    ClassifyConfig,
    CriticalOrbitHitError,
    ErgodicityFlags,
    classify_ergodic,
    lyapunov_spectrum,
    purification_fraction,
)
from .sampling import SeededSampler, mix64

_BSW_MAGIC = b"BSW1"
_BSW_VERSION = 1

STATUS_PENDING = 0
STATUS_DONE = 1
STATUS_FAILED = 2

TASK_CLASSIFY = "classify"
TASK_LYAPUNOV = "lyapunov"
TASK_PURIFICATION = "purification"
_TASK_CODES = {TASK_CLASSIFY: 0, TASK_LYAPUNOV: 1, TASK_PURIFICATION: 2}
_TASK_NAMES = {v: k for k, v in _TASK_CODES.items()}


class TaskMismatchError(ValueError):
    """Operation applied to a sweep result of the wrong task kind."""


class CheckpointFormatError(ValueError):
    """Corrupt or incompatible checkpoint file."""


@dataclass(frozen=True)
class ParameterGrid:
    """Inclusive-endpoint rectangular grid in the complex parameter plane."""

    re_min: float
    re_max: float
    im_min: float
    im_max: float
    n_re: int
    n_im: int

    def __post_init__(self):
        if self.re_min > self.re_max or self.im_min > self.im_max:
            raise ValueError("grid bounds out of order")
        if self.n_re < 1 or self.n_im < 1:
            raise ValueError("grid counts must be >= 1")

    @property
    def n_cells(self) -> int:
        return self.n_re * self.n_im

    def parameter(self, cell_id: int) -> complex:
        """Cell id -> complex p; row-major with im outer, re inner."""
        k, j = divmod(cell_id, self.n_re)
        dre = (self.re_max - self.re_min) / (self.n_re - 1) if self.n_re > 1 else 0.0
        dim = (self.im_max - self.im_min) / (self.n_im - 1) if self.n_im > 1 else 0.0
        return complex(self.re_min + j * dre, self.im_min + k * dim)


@dataclass
class SweepResult:
    grid: ParameterGrid
    task: str
    status: np.ndarray  # uint8, per cell
    payload: np.ndarray  # uint8 flag bits (classify) or float64

    @staticmethod
    def empty(grid: ParameterGrid, task: str) -> "SweepResult":
        if task not in _TASK_CODES:
            raise TaskMismatchError(f"unknown task {task!r}")
        n = grid.n_cells
        dtype = np.uint8 if task == TASK_CLASSIFY else np.float64
        return SweepResult(grid, task, np.zeros(n, np.uint8), np.zeros(n, dtype))

    def flags(self, cell_id: int) -> ErgodicityFlags:
        if self.task != TASK_CLASSIFY:
            raise TaskMismatchError("flags only defined for classify sweeps")
        bits = int(self.payload[cell_id])
        return ErgodicityFlags(*(bool(bits >> k & 1) for k in range(4)))

    def to_csv(self, path) -> None:
        name = {
            TASK_CLASSIFY: "flags",
            TASK_LYAPUNOV: "lyapunov",
            TASK_PURIFICATION: "purified_fraction",
        }[self.task]
        with open(path, "w") as fh:
            fh.write(f"re,im,status,{name}\n")
            for cid in range(self.grid.n_cells):
                p = self.grid.parameter(cid)
                if self.task == TASK_CLASSIFY:
                    val = int(self.payload[cid])
                else:
                    val = f"{float(self.payload[cid]):.17g}"
                fh.write(f"{p.real:.17g},{p.imag:.17g},{int(self.status[cid])},{val}\n")


def checkpoint_save(result: SweepResult, path) -> None:
    g = result.grid
    with open(path, "wb") as fh:
        fh.write(_BSW_MAGIC)
        fh.write(struct.pack("<I", _BSW_VERSION))
        fh.write(struct.pack("<4d2I", g.re_min, g.re_max, g.im_min, g.im_max, g.n_re, g.n_im))
        fh.write(struct.pack("<B", _TASK_CODES[result.task]))
        if result.task == TASK_CLASSIFY:
            body = np.column_stack((result.status, result.payload)).astype(np.uint8)
            fh.write(body.tobytes())
        else:
            for cid in range(g.n_cells):
                fh.write(struct.pack("<Bd", int(result.status[cid]), float(result.payload[cid])))


def checkpoint_load(path) -> SweepResult:
    with open(path, "rb") as fh:
        if fh.read(4) != _BSW_MAGIC:
            raise CheckpointFormatError("bad checkpoint magic")
        (version,) = struct.unpack("<I", fh.read(4))
        if version != _BSW_VERSION:
            raise CheckpointFormatError(f"unsupported checkpoint version {version}")
        re_min, re_max, im_min, im_max, n_re, n_im = struct.unpack("<4d2I", fh.read(40))
        (task_code,) = struct.unpack("<B", fh.read(1))
        if task_code not in _TASK_NAMES:
            raise CheckpointFormatError(f"unknown task code {task_code}")
        task = _TASK_NAMES[task_code]
        grid = ParameterGrid(re_min, re_max, im_min, im_max, n_re, n_im)
        result = SweepResult.empty(grid, task)
        n = grid.n_cells
        if task == TASK_CLASSIFY:
            raw = fh.read(2 * n)
            if len(raw) != 2 * n:
                raise CheckpointFormatError(f"truncated at cell {len(raw) // 2}")
            body = np.frombuffer(raw, np.uint8).reshape(n, 2)
            result.status[:] = body[:, 0]
            result.payload[:] = body[:, 1]
        else:
            rec = struct.Struct("<Bd")
            raw = fh.read(rec.size * n)
            if len(raw) != rec.size * n:
                raise CheckpointFormatError(f"truncated at cell {len(raw) // rec.size}")
            for cid, (st, val) in enumerate(rec.iter_unpack(raw)):
                result.status[cid] = st
                result.payload[cid] = val
        bad = (result.status > STATUS_FAILED).nonzero()[0]
        if bad.size:
            raise CheckpointFormatError(f"invalid status byte at cell {int(bad[0])}")
        return result


@dataclass(frozen=True)
class SweepConfig:
    """Budgets for the per-cell tasks."""

    classify: ClassifyConfig = field(default_factory=ClassifyConfig)
    lyap_starts: int = 10
    lyap_steps: int = 100_000
    purification_samples: int = 10_000
    purification_max_steps: int = 10_000
    eps_pure: float = 1e-6
    eps_mixed: float = 1e-6


def _evaluate_cell(task: str, p: complex, sampler: SeededSampler, cfg: SweepConfig):
    if task == TASK_CLASSIFY:
        flags = classify_ergodic(p, sampler, cfg.classify)
        return sum(int(f) << k for k, f in enumerate(flags.as_tuple()))
    if task == TASK_LYAPUNOV:
        ests = lyapunov_spectrum(p, sampler, cfg.lyap_starts, cfg.lyap_steps)
        return float(np.mean([e.value for e in ests]))
    rep = purification_fraction(
        p,
        cfg.purification_samples,
        cfg.purification_max_steps,
        sampler,
        cfg.eps_pure,
        cfg.eps_mixed,
    )
    return rep.fraction


def run_sweep(
    grid: ParameterGrid,
    task: str,
    seed: int,
    config: SweepConfig | None = None,
    n_workers: int = 1,
    checkpoint_path=None,
    resume: SweepResult | None = None,
) -> SweepResult:
    """Evaluate the task at every pending cell of the grid.

    Cell seeds mix (seed, cell id), so reruns are reproducible for any
    worker count; a failing cell is retried once on a shifted stream and
    then marked failed without aborting the sweep.  A checkpoint, when
    requested, is written after every completed grid row.
    """
    cfg = config or SweepConfig()
    if resume is not None:
        if resume.grid != grid or resume.task != task:
            raise TaskMismatchError("resume checkpoint does not match this sweep")
        result = resume
    else:
        result = SweepResult.empty(grid, task)

    pending = [cid for cid in range(grid.n_cells) if result.status[cid] == STATUS_PENDING]
    lock = threading.Lock()
    row_remaining = np.zeros(grid.n_im, np.int64)
    for cid in pending:
        row_remaining[cid // grid.n_re] += 1

    def work(cid: int) -> None:
        p = grid.parameter(cid)
        value = None
        status = STATUS_FAILED
        for attempt in range(2):
            sampler = SeededSampler(mix64(seed, cid, attempt))
            try:
                value = _evaluate_cell(task, p, sampler, cfg)
                status = STATUS_DONE
                break
            except (CriticalOrbitHitError, ArithmeticError):
                continue
        with lock:
            result.status[cid] = status
            if status == STATUS_DONE:
                result.payload[cid] = value
            row = cid // grid.n_re
            row_remaining[row] -= 1
            if checkpoint_path is not None and row_remaining[row] == 0:
                checkpoint_save(result, checkpoint_path)

    if n_workers <= 1:
        for cid in pending:
            work(cid)
    else:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            list(pool.map(work, pending))
    if checkpoint_path is not None:
        checkpoint_save(result, checkpoint_path)
    return result


def agreement_rate(result: SweepResult) -> float:
    """Fraction of done classify cells whose four flags are mixed
    (neither all true nor all false)."""
    if result.task != TASK_CLASSIFY:
        raise TaskMismatchError("agreement_rate needs a classify sweep")
    done = result.status == STATUS_DONE
    if not np.all(result.status != STATUS_PENDING):
        raise TaskMismatchError("sweep has pending cells")
    bits = result.payload[done]
    mixed = (bits != 0) & (bits != 15)
    return float(mixed.mean()) if bits.size else 0.0

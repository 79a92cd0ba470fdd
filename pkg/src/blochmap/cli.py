"""Command-line interface: bind configs to diagnostics and sweeps.

All numeric output is reproducible from (resolved config, seed); every run
writes a run_config.json sidecar with the fully resolved parameters next
to its output files.
"""
from __future__ import annotations

import json
import os
import sys
import time
from pathlib import Path

import click
import numpy as np

from . import diagnostics, sampling, sphere, sweep as sweep_mod
from .diagnostics import ClassifyConfig
from .sampling import EqualAreaGrid, Patch, SeededSampler
from .sweep import ParameterGrid, SweepConfig

DEFAULT_THREADS = int(os.environ.get("BLOCHMAP_THREADS", "1"))


class ComplexParam(click.ParamType):
    """Complex number given as 're,im'."""

    name = "re,im"

    def convert(self, value, param, ctx):
        if isinstance(value, complex):
            return value
        try:
            re, im = (float(x) for x in str(value).split(","))
            return complex(re, im)
        except ValueError:
            self.fail(f"{value!r} is not a 're,im' pair", param, ctx)


COMPLEX = ComplexParam()


def _load_config_file(ctx, param, value):
    """Flat 'key = value' config file; keys mirror flag names and unknown
    keys are rejected.  Explicit flags override the file."""
    if not value:
        return None
    known = {
        p.name: p for p in ctx.command.params if isinstance(p, click.Option)
    }
    defaults = {}
    for lineno, line in enumerate(Path(value).read_text().splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise click.UsageError(f"{value}:{lineno}: expected 'key = value'")
        key, _, raw = line.partition("=")
        key = key.strip().replace("-", "_")
        if key not in known or key == "config":
            raise click.UsageError(f"{value}:{lineno}: unknown config key '{key.strip()}'")
        defaults[key] = raw.strip()
    ctx.default_map = {**defaults, **(ctx.default_map or {})}
    return value


def config_option(fn):
    return click.option(
        "--config",
        type=click.Path(exists=True, dir_okay=False),
        callback=_load_config_file,
        is_eager=True,
        expose_value=False,
        help="Flat key = value file mirroring the flag names.",
    )(fn)


def _run_dir(ctx, out: str | None) -> Path:
    if out is None:
        stamp = time.strftime("%Y%m%d-%H%M%S")
        out = f"runs/{ctx.info_name}-{stamp}"
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_sidecar(ctx, out_dir: Path, **resolved) -> None:
    doc = {"command": ctx.info_name}
    for key, val in sorted(resolved.items()):
        if isinstance(val, complex):
            val = f"{val.real:.17g},{val.imag:.17g}"
        doc[key] = val
    (out_dir / "run_config.json").write_text(json.dumps(doc, indent=2) + "\n")


def _preset_config(preset: str) -> ClassifyConfig:
    return ClassifyConfig.paper() if preset == "paper" else ClassifyConfig.desk()


@click.group()
@click.version_option()
def main():
    """Iterated measurement-induced qubit map diagnostics."""


@main.command()
@config_option
@click.option("--p", "p", type=COMPLEX, required=True, help="Map parameter as re,im.")
@click.option("--z0", type=COMPLEX, default=None, help="Start point (default: random pure state).")
@click.option("--steps", type=int, default=1000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(), default=None, help="Output directory.")
@click.pass_context
def orbit(ctx, p, z0, steps, seed, out):
    """Write one forward orbit of the pure-state map to orbit.csv."""
    sampler = SeededSampler(seed)
    if z0 is None:
        d = sampling.uniform_directions(sampler, 1)[0]
        pt = sphere.point_from_bloch(*d)
    else:
        pt = sphere.point_from_z(z0)
    out_dir = _run_dir(ctx, out)
    with open(out_dir / "orbit.csv", "w") as fh:
        fh.write("step,re,im,u,v,w\n")
        for k in range(steps + 1):
            u, v, w = sphere.bloch_from_point(pt)
            z = pt.z
            fh.write(f"{k},{z.real:.17g},{z.imag:.17g},{u:.17g},{v:.17g},{w:.17g}\n")
            pt = sphere.apply_map(p, pt)
    _write_sidecar(ctx, out_dir, p=p, z0=None if z0 is None else z0, steps=steps, seed=seed)
    click.echo(f"orbit written to {out_dir / 'orbit.csv'}")


@main.command()
@config_option
@click.option("--p", "p", type=COMPLEX, required=True)
@click.option("--steps", type=int, default=1_000_000, show_default=True)
@click.option("--starts", type=int, default=1, show_default=True)
@click.option("--burn-in", type=int, default=1000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(), default=None)
@click.pass_context
def lyapunov(ctx, p, steps, starts, burn_in, seed, out):
    """Estimate the Lyapunov exponent from random starts."""
    ests = diagnostics.lyapunov_spectrum(p, SeededSampler(seed), starts, steps, burn_in)
    out_dir = _run_dir(ctx, out)
    with open(out_dir / "lyapunov.csv", "w") as fh:
        fh.write("value,stderr,n_steps\n")
        for e in ests:
            fh.write(f"{e.value:.17g},{e.stderr:.17g},{e.n_steps}\n")
    vals = [e.value for e in ests]
    mean = sum(vals) / len(vals)
    err = sum(e.stderr for e in ests) / len(ests)
    _write_sidecar(ctx, out_dir, p=p, steps=steps, starts=starts, burn_in=burn_in, seed=seed)
    click.echo(f"lyapunov value {mean:.6f} stderr {err:.2g} over {starts} start(s)")


@main.command()
@config_option
@click.option("--p", "p", type=COMPLEX, required=True)
@click.option("--max-period", type=int, default=100, show_default=True)
@click.option("--burn-in", type=int, default=100_000, show_default=True)
@click.option("--tol", type=float, default=1e-9, show_default=True)
@click.option("--out", type=click.Path(), default=None)
@click.pass_context
def cycles(ctx, p, max_period, burn_in, tol, out):
    """Search both critical orbits for an attracting cycle."""
    out_dir = _run_dir(ctx, out)
    lines = []
    for label, z0 in zip(("0", "inf"), sphere.critical_points(p)):
        rep = diagnostics.detect_attracting_cycle(p, z0, max_period, burn_in, tol=tol)
        if rep.found:
            lines.append(
                f"critical point {label}: attracting cycle period {rep.period} "
                f"multiplier {rep.multiplier_modulus:.3g}"
            )
        else:
            lines.append(f"critical point {label}: no attracting cycle found")
    (out_dir / "cycles.txt").write_text("\n".join(lines) + "\n")
    _write_sidecar(ctx, out_dir, p=p, max_period=max_period, burn_in=burn_in, tol=tol)
    for line in lines:
        click.echo(line)


def _grid_options(fn):
    fn = click.option("--grid-phi", type=int, default=100, show_default=True)(fn)
    fn = click.option("--grid-c", type=int, default=100, show_default=True)(fn)
    return fn


@main.command("density-time")
@config_option
@click.option("--p", "p", type=COMPLEX, required=True)
@click.option("--orbits", type=int, default=10, show_default=True)
@click.option("--orbit-len", type=int, default=1_000_000, show_default=True)
@_grid_options
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(), default=None)
@click.pass_context
def density_time(ctx, p, orbits, orbit_len, grid_phi, grid_c, seed, out):
    """Time-averaged visit density of long forward orbits (BLH1 + CSV)."""
    grid = EqualAreaGrid(grid_phi, grid_c)
    h = diagnostics.time_average_density(p, orbits, orbit_len, grid, SeededSampler(seed))
    out_dir = _run_dir(ctx, out)
    h.save(out_dir / "density.blh1")
    h.to_csv(out_dir / "density.csv")
    _write_sidecar(
        ctx, out_dir, p=p, orbits=orbits, orbit_len=orbit_len,
        grid_phi=grid_phi, grid_c=grid_c, seed=seed,
    )
    click.echo(f"visited {np.count_nonzero(h.counts)}/{grid.n_cells} cells")


@main.command("density-ensemble")
@config_option
@click.option("--p", "p", type=COMPLEX, required=True)
@click.option("--patches", type=int, default=50, show_default=True)
@click.option("--samples", type=int, default=100_000, show_default=True)
@click.option("--steps", type=int, default=100, show_default=True)
@_grid_options
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(), default=None)
@click.pass_context
def density_ensemble(ctx, p, patches, samples, steps, grid_phi, grid_c, seed, out):
    """Ensemble-averaged density of patch-localized ensembles (BLH1 + CSV)."""
    grid = EqualAreaGrid(grid_phi, grid_c)
    h = diagnostics.ensemble_average_density(p, patches, samples, steps, grid, SeededSampler(seed))
    out_dir = _run_dir(ctx, out)
    h.save(out_dir / "density.blh1")
    h.to_csv(out_dir / "density.csv")
    _write_sidecar(
        ctx, out_dir, p=p, patches=patches, samples=samples, steps=steps,
        grid_phi=grid_phi, grid_c=grid_c, seed=seed,
    )
    click.echo(f"visited {np.count_nonzero(h.counts)}/{grid.n_cells} cells")


@main.command("compare-densities")
@click.argument("file1", type=click.Path(exists=True, dir_okay=False))
@click.argument("file2", type=click.Path(exists=True, dir_okay=False))
def compare_densities(file1, file2):
    """Total-variation distance between two BLH1 histograms."""
    h1 = sampling.Histogram.load(file1)
    h2 = sampling.Histogram.load(file2)
    click.echo(f"tv-distance {sampling.histogram_distance(h1, h2):.6f}")


@main.command()
@config_option
@click.option("--p", "p", type=COMPLEX, required=True)
@click.option("--p0", type=float, default=1.0, show_default=True, help="Initial purity.")
@click.option("--samples", type=int, default=1_000_000, show_default=True)
@click.option("--max-steps", type=int, default=200, show_default=True)
@_grid_options
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(), default=None)
@click.pass_context
def coverage(ctx, p, p0, samples, max_steps, grid_phi, grid_c, seed, out):
    """Angular coverage time of a random-patch ensemble at fixed purity."""
    sampler = SeededSampler(seed)
    patch = sampling.random_patch(sampler.child(0))
    rep = diagnostics.coverage_time(
        p, patch, p0, samples, EqualAreaGrid(grid_phi, grid_c), max_steps, sampler.child(1)
    )
    out_dir = _run_dir(ctx, out)
    rep.to_csv(out_dir / "coverage.csv")
    _write_sidecar(
        ctx, out_dir, p=p, p0=p0, samples=samples, max_steps=max_steps,
        grid_phi=grid_phi, grid_c=grid_c, seed=seed,
    )
    if rep.n_crit is None:
        click.echo(f"not covered within {max_steps} steps")
    else:
        click.echo(f"n_crit {rep.n_crit} mean_purity {rep.mean_purity_at_ncrit:.6f}")


@main.command("purity-stats")
@config_option
@click.option("--p", "p", type=COMPLEX, required=True)
@click.option("--p0", type=float, default=0.95, show_default=True)
@click.option("--samples", type=int, default=100_000, show_default=True)
@click.option("--steps", type=int, default=200, show_default=True)
@click.option("--threshold", type=float, default=0.55, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(), default=None)
@click.pass_context
def purity_stats(ctx, p, p0, samples, steps, threshold, seed, out):
    """Per-step purity statistics of a fixed-purity shell ensemble."""
    stats = diagnostics.purity_stats(p, p0, samples, steps, SeededSampler(seed), threshold)
    out_dir = _run_dir(ctx, out)
    stats.to_csv(out_dir / "purity_stats.csv")
    _write_sidecar(
        ctx, out_dir, p=p, p0=p0, samples=samples, steps=steps,
        threshold=threshold, seed=seed,
    )
    click.echo(
        f"step1 frac_increase {stats.fraction_step_increase[0]:.4f} "
        f"final mean purity {stats.mean_purity[-1]:.6f}"
    )


@main.command()
@config_option
@click.option("--p", "p", type=COMPLEX, required=True)
@click.option("--samples", type=int, default=10_000, show_default=True)
@click.option("--max-steps", type=int, default=10_000, show_default=True)
@click.option("--eps-pure", type=float, default=1e-6, show_default=True)
@click.option("--eps-mixed", type=float, default=1e-6, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(), default=None)
@click.pass_context
def purification(ctx, p, samples, max_steps, eps_pure, eps_mixed, seed, out):
    """Fraction of random ball states that purify to the surface."""
    rep = diagnostics.purification_fraction(
        p, samples, max_steps, SeededSampler(seed), eps_pure, eps_mixed
    )
    out_dir = _run_dir(ctx, out)
    with open(out_dir / "purification.csv", "w") as fh:
        fh.write("fraction,n_purified,n_mixed,n_unresolved,n_samples\n")
        fh.write(
            f"{rep.fraction:.17g},{rep.n_purified},{rep.n_mixed},"
            f"{rep.n_unresolved},{rep.n_samples}\n"
        )
    _write_sidecar(
        ctx, out_dir, p=p, samples=samples, max_steps=max_steps,
        eps_pure=eps_pure, eps_mixed=eps_mixed, seed=seed,
    )
    click.echo(f"purified fraction {rep.fraction:.6f} (unresolved {rep.n_unresolved})")


@main.command()
@config_option
@click.option("--p", "p", type=COMPLEX, required=True)
@click.option("--preset", type=click.Choice(["desk", "paper"]), default="desk", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(), default=None)
@click.pass_context
def classify(ctx, p, preset, seed, out):
    """Run the four ergodicity criteria at one parameter value."""
    flags = diagnostics.classify_ergodic(p, SeededSampler(seed), _preset_config(preset))
    out_dir = _run_dir(ctx, out)
    doc = {
        "no_attracting_cycles": flags.no_attracting_cycles,
        "ensemble_spreads": flags.ensemble_spreads,
        "orbit_dense": flags.orbit_dense,
        "lyapunov_positive": flags.lyapunov_positive,
        "ergodic_like": flags.ergodic_like,
    }
    (out_dir / "classify.json").write_text(json.dumps(doc, indent=2) + "\n")
    _write_sidecar(ctx, out_dir, p=p, preset=preset, seed=seed)
    for name, val in doc.items():
        click.echo(f"{name}: {val}")


@main.command("sweep")
@config_option
@click.option(
    "--task",
    type=click.Choice([sweep_mod.TASK_CLASSIFY, sweep_mod.TASK_LYAPUNOV, sweep_mod.TASK_PURIFICATION]),
    required=True,
)
@click.option("--re-min", type=float, required=True)
@click.option("--re-max", type=float, required=True)
@click.option("--im-min", type=float, required=True)
@click.option("--im-max", type=float, required=True)
@click.option("--n-re", type=int, required=True)
@click.option("--n-im", type=int, required=True)
@click.option("--preset", type=click.Choice(["desk", "paper"]), default="desk", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--threads", type=int, default=DEFAULT_THREADS, show_default=True)
@click.option("--resume", is_flag=True, help="Continue from an existing checkpoint.")
@click.option("--out", type=click.Path(), default=None)
@click.pass_context
def sweep(ctx, task, re_min, re_max, im_min, im_max, n_re, n_im, preset, seed, threads, resume, out):
    """Run a diagnostic over a rectangular grid in the parameter plane."""
    grid = ParameterGrid(re_min, re_max, im_min, im_max, n_re, n_im)
    cfg = SweepConfig(classify=_preset_config(preset))
    out_dir = _run_dir(ctx, out)
    ckpt = out_dir / "sweep.bsw1"
    prior = None
    if resume:
        if not ckpt.exists():
            raise click.UsageError(f"--resume given but {ckpt} does not exist")
        prior = sweep_mod.checkpoint_load(ckpt)
    result = sweep_mod.run_sweep(
        grid, task, seed, cfg, n_workers=max(1, threads), checkpoint_path=ckpt, resume=prior
    )
    result.to_csv(out_dir / "sweep.csv")
    _write_sidecar(
        ctx, out_dir, task=task, re_min=re_min, re_max=re_max, im_min=im_min,
        im_max=im_max, n_re=n_re, n_im=n_im, preset=preset, seed=seed,
    )
    n_done = int((result.status == sweep_mod.STATUS_DONE).sum())
    n_failed = int((result.status == sweep_mod.STATUS_FAILED).sum())
    click.echo(f"{n_done}/{grid.n_cells} cells done, {n_failed} failed")
    if task == sweep_mod.TASK_CLASSIFY and n_done == grid.n_cells:
        click.echo(f"criterion disagreement rate {sweep_mod.agreement_rate(result):.4f}")


def run(args=None) -> int:
    try:
        main(args=args, standalone_mode=False)
        return 0
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.UsageError as exc:
        exc.show()
        return 2
    except click.ClickException as exc:
        exc.show()
        return 1
    except click.exceptions.Abort:
        return 1
    except Exception as exc:  # runtime failure, not usage
        click.echo(f"error: {exc}", err=True)
        return 1


def entry() -> None:
    sys.exit(run())


if __name__ == "__main__":
    entry()

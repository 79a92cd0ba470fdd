"""Ergodicity classification along a line in the parameter plane.

Sweeps the segment p = t*i for t in [0, 1.2] with the four-criteria
classifier and prints one row per parameter: which criteria pass, and the
verdict. Small t gives an attracting cycle (all criteria fail); near t = 1
the map is ergodic-like on all four.

Run from the repo root:  python3 demos/classify_line.py
"""
from blochmap import (
    ClassifyConfig,
    SeededSampler,
    classify_ergodic,
)

# reduced budgets so the whole line runs in under a minute
cfg = ClassifyConfig(
    cycle_burn_in=50_000,
    cycle_max_period=100,
    orbit_len=500_000,
    grid_n_phi=50,
    grid_n_c=50,
    coverage_samples=200_000,
    coverage_max_steps=100,
    lyap_starts=5,
    lyap_steps=50_000,
)

print("p = t*i     cycles spread dense lyap  verdict")
for k in range(13):
    t = 0.1 * k
    flags = classify_ergodic(t * 1j, SeededSampler(3), cfg)
    marks = ["yes " if f else "no  " for f in flags.as_tuple()]
    verdict = "ergodic-like" if flags.ergodic_like else "not ergodic-like"
    print(f"t = {t:4.1f}    {marks[0]}   {marks[1]}  {marks[2]}  {marks[3]} {verdict}")

"""Two fates for mixed states: transient vs genuine purification.

Starts ensembles of slightly mixed states (purity 0.95) and follows their
purity statistics. At p = i roughly half the states gain purity on the first
step, but the gain dies out within a few dozen iterations and everything
relaxes to the maximally mixed state. At p = 0.4 + 1.2i a finite fraction
keeps purifying all the way to the sphere surface and stays there.

Run from the repo root:  python3 demos/purification_tale.py
"""
from blochmap import SeededSampler, purification_fraction, purity_stats

for name, p in (("p = i", 1j), ("p = 0.4+1.2i", 0.4 + 1.2j)):
    stats = purity_stats(p, p0=0.95, n_samples=50_000, n_steps=200,
                         sampler=SeededSampler(5))
    print(name)
    print(f"  step   1: frac gaining purity {stats.fraction_step_increase[0]:.3f},"
          f" frac above start {stats.fraction_above_initial[0]:.3f}")
    for step in (10, 30, 100, 200):
        print(f"  step {step:3d}: frac above start {stats.fraction_above_initial[step - 1]:.3f},"
              f" mean purity {stats.mean_purity[step - 1]:.4f}")
    rep = purification_fraction(p, n_samples=5000, max_steps=5000,
                                sampler=SeededSampler(6))
    print(f"  asymptotic purified fraction of random ball states: {rep.fraction:.3f}"
          f" ({rep.n_unresolved} unresolved)")

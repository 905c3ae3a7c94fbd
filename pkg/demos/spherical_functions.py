"""Spherical functions and the Plancherel grid.

Builds the s-grid for a few trees, checks the density moments and compares the
closed-form spherical function with its boundary average.
"""
import numpy as np

from treepdo.spectral import build_grid, spherical_explicit, spherical_via_boundary

for q in (2, 3, 5):
    grid = build_grid(q, 256)
    print(f"q={q}: tau={grid.tau:.4f}  M_0={grid.moment(0).real:.16f}  M_2={grid.moment(2).real:+.3e}")

q = 2
s = np.linspace(0, np.pi / np.log(q), 5)
print("\n  d   " + "  ".join(f"s={t:5.3f}" for t in s))
for d in range(6):
    x = tuple(i % 2 for i in range(d))
    vals = [spherical_explicit(t, d, q) for t in s]
    gap = max(abs(v - spherical_via_boundary(t, x, q)) for v, t in zip(vals, s))
    print(f"  {d}   " + "  ".join(f"{v:+7.4f}" for v in vals) + f"   |explicit - boundary| = {gap:.1e}")

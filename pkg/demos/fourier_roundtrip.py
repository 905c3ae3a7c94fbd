"""Fourier-Helgason transform of a random function on a ball, and back."""
import numpy as np

from treepdo.fourier import fh_forward, fh_inverse, plancherel_inner
from treepdo.spectral import build_grid
from treepdo.tree import ball

q, radius = 3, 3
grid = build_grid(q, 256)
rng = np.random.default_rng(0)
verts = ball((), radius, q)
f = dict(zip(verts, rng.standard_normal(len(verts)) + 1j * rng.standard_normal(len(verts))))

F = fh_forward(f, grid)
print(f"{len(verts)} vertices -> table of {len(F.stubs)} cylinders x {grid.size} nodes")
err = max(abs(fh_inverse(F, grid, x) - f[x]) for x in verts)
norm2 = sum(abs(v) ** 2 for v in f.values())
print(f"max roundtrip error       {err:.2e}")
print(f"||f||^2 on the tree       {norm2:.12f}")
print(f"||Hf||^2 on the spectrum  {plancherel_inner(f, f, grid).real:.12f}")

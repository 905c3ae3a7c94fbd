"""Kernels of quantized symbols: identities, decay and the commutator with the Laplacian."""
import numpy as np

from treepdo.quantize import (
    commutator_symbol,
    decay_profile,
    kernel_of_symbol,
    laplacian_kernel,
    matrix_commutator,
    opnorm_estimate,
)
from treepdo.spectral import build_grid
from treepdo.symbols import builtin_family, constant_symbol, eigencurve_profile, profile_symbol

q, R = 2, 4
grid = build_grid(q, 256)

K1 = kernel_of_symbol(constant_symbol(q), R, grid)
KL = kernel_of_symbol(profile_symbol(q, eigencurve_profile(q)), R, grid)
print(f"|Op(1) - I|_max       = {np.abs(K1.matrix - np.eye(K1.size)).max():.1e}")
print(f"|Op(lambda) - D|_max  = {np.abs(KL.matrix - laplacian_kernel(q, R).matrix).max():.1e}")

bump = kernel_of_symbol(builtin_family("bump_profile_only", q), 6, grid)
print("\n(1+d)^4 q^(d/2) max|k| by distance, bump profile, R=6:")
print(np.array2string(decay_profile(bump).weighted(4), precision=4))

a = builtin_family("shifted_k", q, 0.2, k=2)
Ka = kernel_of_symbol(a, R, grid)
comm = matrix_commutator(laplacian_kernel(q, R), Ka, R - 1)
Kc = kernel_of_symbol(commutator_symbol(a), R - 1, grid)
print(f"\n{a.label}: ||Op(a)|| ~ {opnorm_estimate(Ka).norm:.5f}")
print(f"|[D, Op(a)] - Op(c)|_max = {np.abs(comm.matrix - Kc.matrix).max():.1e}")

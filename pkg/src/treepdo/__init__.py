"""Harmonic analysis and pseudo-differential operators on homogeneous trees.

Modules, from the bottom up:

- ``tree``: word addressing, metric, spheres, balls and boundary stubs
- ``boundary``: cylinder measures, heights, Radon-Nikodym factors, E-partitions
- ``spectral``: c-function, Plancherel density, the s-grid, spherical functions
- ``fourier``: the Fourier-Helgason transform and its inverse
- ``symbols``: cylindrical symbols, shift/transfer/averaging, class validation
- ``quantize``: kernels of Op(a), composition, adjoints, commutators, norms
- ``config``, ``verify``, ``sweep``, ``cli``: the batch front end
"""

__version__ = "0.1.0"

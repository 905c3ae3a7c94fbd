"""Fourier-Helgason transform of finitely supported functions.

The boundary variable is represented by the depth-``D`` cylinders at the
reference vertex, which is exact as long as ``D`` covers the support, and the
spectral variable by the nodes of an :class:`~treepdo.spectral.SGrid`.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .boundary import cylinder_measure
from .spectral import SGrid
from .tree import CapExceeded, Vertex, common_prefix_lengths, stub_array, stubs

FiniteFunction = Mapping[Vertex, complex]


@dataclass(frozen=True)
class SpectralFunction:
    """Values on (depth-``depth`` cylinder at ``o``) x (grid node).

    ``reflected`` holds the same defining sum evaluated at ``-s_k``; it is only
    available for tables produced by :func:`fh_forward` (or built by hand).
    """

    q: int
    depth: int
    table: np.ndarray
    reflected: np.ndarray | None = None

    @property
    def stubs(self):
        return stubs(self.depth, self.q, cap=None)


def _heights_from_root(x: Vertex, depth: int, q: int) -> np.ndarray:
    j = common_prefix_lengths(stub_array(depth, q), x)
    return 2 * j - len(x)


def _support_depth(*fs: FiniteFunction) -> int:
    return max((len(y) for f in fs for y in f), default=0)


def fh_forward(f: FiniteFunction, grid: SGrid, depth: int | None = None) -> SpectralFunction:
    q = grid.q
    need = _support_depth(f)
    if depth is None:
        depth = need
    elif depth < need:
        raise ValueError(f"depth {depth} too small for support reaching |y| = {need}")
    n_stubs = len(stubs(depth, q))
    table = np.zeros((n_stubs, grid.size), dtype=complex)
    reflected = np.zeros_like(table)
    for y, value in f.items():
        h = _heights_from_root(y, depth, q)
        amp = value * np.power(float(q), 0.5 * h)[:, None]
        ph = grid.phase(h)
        table += amp * ph
        reflected += amp * ph.conj()
    return SpectralFunction(q, depth, table, reflected)


def fh_inverse(F: SpectralFunction, grid: SGrid, x: Vertex) -> complex:
    if len(x) > F.depth:
        raise ValueError(f"|x| = {len(x)} exceeds the table depth {F.depth}")
    h = _heights_from_root(x, F.depth, F.q)
    kern = np.power(float(F.q), 0.5 * h)[:, None] * grid.phase(h).conj()
    nu = float(cylinder_measure(F.depth, F.q))
    return complex(nu * np.sum(kern * F.table * grid.weights))


def plancherel_inner(f: FiniteFunction, g: FiniteFunction, grid: SGrid) -> complex:
    depth = _support_depth(f, g)
    F = fh_forward(f, grid, depth)
    G = fh_forward(g, grid, depth)
    nu = float(cylinder_measure(depth, grid.q))
    return complex(nu * np.sum(F.table * G.table.conj() * grid.weights))


def symmetry_check(F: SpectralFunction, grid: SGrid, x: Vertex) -> float:
    """Largest violation over the nodes of the symmetry condition at ``x``."""
    if F.reflected is None:
        raise ValueError("symmetry check needs the table at -s (reflected values)")
    if len(x) > F.depth:
        raise ValueError(f"|x| = {len(x)} exceeds the table depth {F.depth}")
    h = _heights_from_root(x, F.depth, F.q)
    amp = np.power(float(F.q), 0.5 * h)[:, None]
    ph = grid.phase(h)
    lhs = np.sum(amp * ph.conj() * F.table, axis=0)
    rhs = np.sum(amp * ph * F.reflected, axis=0)
    nu = float(cylinder_measure(F.depth, F.q))
    return float(nu * np.max(np.abs(lhs - rhs)))

"""Spectral side: c-function, Plancherel density, quadrature grid, spherical functions."""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from itertools import count

import numpy as np

from .boundary import e_partition
from .tree import TreeParams, Vertex

DEFAULT_NODES = 256
MIN_NODES = 8

_grid_ids = count()


def _params(q_or_params) -> TreeParams:
    if isinstance(q_or_params, TreeParams):
        return q_or_params
    return TreeParams(int(q_or_params))


def plancherel_constant(q: int) -> float:
    return q * math.log(q) / (4 * math.pi * (q + 1))


def c_function(z, q: int):
    """Harish-Chandra c-function, for complex ``z`` off ``tau * Z``."""
    z = np.asarray(z, dtype=complex)
    lq = math.log(q)
    num = np.exp((0.5 + 1j * z) * lq) - np.exp(-(0.5 + 1j * z) * lq)
    den = np.exp(1j * z * lq) - np.exp(-1j * z * lq)
    return math.sqrt(q) / (q + 1) * num / den


def c_abs_inv_sq(s, q) -> np.ndarray | float:
    """``|c(s)|**-2`` on ``[0, tau]``; vanishes at both endpoints."""
    q = _params(q).q
    s = np.asarray(s, dtype=float)
    lq = math.log(q)
    out = (q + 1) ** 2 / q * 4 * np.sin(s * lq) ** 2 / (q + 1 / q - 2 * np.cos(2 * s * lq))
    return float(out) if out.ndim == 0 else out


def plancherel_density(s, q) -> np.ndarray | float:
    """Density of the Plancherel measure folded onto ``[0, tau]`` (total mass 1)."""
    q = _params(q).q
    return 2 * plancherel_constant(q) * c_abs_inv_sq(s, q)


@dataclass(eq=False)
class SGrid:
    """Gauss-Legendre nodes on ``[0, tau]`` with the Plancherel density in the weights."""

    q: int
    nodes: np.ndarray
    weights: np.ndarray
    grid_id: int = field(default_factory=lambda: next(_grid_ids))
    _moments: dict = field(default_factory=dict, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    @property
    def size(self) -> int:
        return len(self.nodes)

    @property
    def tau(self) -> float:
        return math.pi / math.log(self.q)

    def phase(self, h) -> np.ndarray:
        """``q**(i s_k h)`` at every node; broadcasts over an array of ``h``."""
        h = np.asarray(h, dtype=float)
        return np.exp(1j * math.log(self.q) * np.multiply.outer(h, self.nodes))

    def integrate(self, values) -> complex:
        return complex(np.sum(self.weights * values))

    def moment(self, m: int) -> complex:
        """``M_m = sum_k w_k q**(i m s_k)``; conjugate-symmetric in ``m``."""
        m = int(m)
        if m < 0:
            return self.moment(-m).conjugate()
        try:
            return self._moments[m]
        except KeyError:
            pass
        val = complex(np.sum(self.weights * self.phase(m)))
        with self._lock:
            self._moments.setdefault(m, val)
        return self._moments[m]


def build_grid(q, n_nodes: int = DEFAULT_NODES) -> SGrid:
    q = _params(q).q
    if n_nodes < MIN_NODES:
        raise ValueError(f"need at least {MIN_NODES} quadrature nodes, got {n_nodes}")
    tau = math.pi / math.log(q)
    x, w = np.polynomial.legendre.leggauss(n_nodes)
    nodes = 0.5 * tau * (x + 1.0)
    weights = 0.5 * tau * w * plancherel_density(nodes, q)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return SGrid(q, nodes, weights)


def laplacian_eigencurve(s, q):
    """Eigenvalue ``2 sqrt(q) cos(s log q) / (q + 1)`` of the normalised Laplacian."""
    q = _params(q).q
    out = 2 * math.sqrt(q) * np.cos(np.asarray(s, dtype=float) * math.log(q)) / (q + 1)
    return float(out) if np.ndim(out) == 0 else out


_LATTICE_TOL = 1e-7


def spherical_explicit(s: float, d: int, q) -> float:
    """Spherical function ``phi_s`` at radius ``d`` from the closed form."""
    q = _params(q).q
    lq = math.log(q)
    base = ((q - 1) / (q + 1) * d + 1) * q ** (-d / 2)
    sn = math.sin(s * lq)
    if abs(sn) < _LATTICE_TOL:
        # s on the lattice tau*Z; the sign picks 0 versus tau
        return base if math.cos(s * lq) > 0 else base * (-1) ** d
    c_plus = complex(c_function(s, q))
    c_minus = complex(c_function(-s, q))
    val = c_plus * q ** ((1j * s - 0.5) * d) + c_minus * q ** ((-1j * s - 0.5) * d)
    return val.real


def spherical_via_boundary(s: float, x: Vertex, q) -> float:
    """Spherical function as the boundary average of ``q**((1/2 + i s) h(x))``."""
    q = _params(q).q
    n = len(x)
    masses = e_partition(x, q).masses
    total = sum(float(m) * q ** ((0.5 + 1j * s) * (2 * j - n)) for j, m in enumerate(masses))
    return total.real

"""Boundary combinatorics: cylinder measures, confluence, heights, E-partitions.

Boundary points are never materialised.  Every integral over the boundary is a
finite sum over a cylinder partition fine enough for the integrand to be
constant on each cylinder, and every measure is an exact ``Fraction``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .tree import Stub, Vertex, distance, extensions, path_word, sphere_size, transport_stub


def cylinder_measure(depth: int, q: int) -> Fraction:
    """``nu_x`` of one depth-``depth`` cylinder at ``x``."""
    return Fraction(1, sphere_size(depth, q))


def confluence_depth(x: Vertex, y: Vertex, stub: Stub) -> int:
    """Distance from ``x`` to the last vertex of ``[x, y]`` on the ray ``stub``."""
    g = path_word(x, y)
    if len(stub) < len(g):
        raise ValueError(
            f"stub of length {len(stub)} does not determine the confluence point "
            f"for d(x, y) = {len(g)}"
        )
    j = 0
    while j < len(g) and stub[j] == g[j]:
        j += 1
    return j


def height_diff(x: Vertex, y: Vertex, stub: Stub) -> int:
    """``h_w(y) - h_w(x)`` for the boundary points of the cylinder ``stub`` at ``x``."""
    return 2 * confluence_depth(x, y, stub) - distance(x, y)


def radon_nikodym(x: Vertex, y: Vertex, stub: Stub, q: int) -> Fraction:
    """``d nu_y / d nu_x`` on the cylinder ``stub`` at ``x``."""
    return Fraction(q) ** height_diff(x, y, stub)


@dataclass(frozen=True)
class EPartition:
    base: Vertex
    masses: tuple[Fraction, ...]


def e_partition(x: Vertex, q: int) -> EPartition:
    """Masses ``nu(E_i(x))`` of the confluence classes, ``0 <= i <= |x|``."""
    n = len(x)
    if n == 0:
        return EPartition(x, (Fraction(1),))
    qq = Fraction(q)
    masses = [qq / (q + 1)]
    masses += [Fraction(q - 1, q + 1) / qq**i for i in range(1, n)]
    masses.append(qq / (q + 1) / qq**n)
    return EPartition(x, tuple(masses))


def refinement_stubs(base: Vertex, y: Vertex, stub_y: Stub, n: int, m: int, q: int) -> list[Stub]:
    """Depth-``m`` stubs at ``y`` over a depth-``n`` cylinder at ``base``.

    The cylinder is the one containing the ray ``stub_y`` from ``y``.  It is
    refined to a depth where the ray from ``y`` is determined to ``m`` letters,
    and for each (equal-mass) refinement the stub seen from ``y`` is returned.
    Averaging a function of those stubs gives the conditional expectation of
    ``nu_base`` on the cylinder.
    """
    to_y = path_word(base, y)
    head = transport_stub(path_word(y, base), stub_y, n) if n > 0 else ()
    depth = max(n, len(to_y) + m)
    return [transport_stub(to_y, v, m) for v in extensions(head, depth - n, q, cap=None)]

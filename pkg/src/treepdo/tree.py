"""Addressing, metric and enumeration on the (q+1)-regular tree.

Vertices are reduced words over the colours ``0..q`` of a proper edge
colouring.  Following the edge of colour ``c`` from ``w`` leads to ``w + (c,)``,
or back to ``w[:-1]`` when ``w`` already ends in ``c``.  The empty word is the
reference vertex ``o``.

A *stub* is a non-backtracking colour sequence read from some base vertex; the
stubs of length ``n`` at a base name the ``(q+1) q**(n-1)`` cylinders of depth
``n`` in the boundary as seen from that base.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple, Sequence

import numpy as np

Vertex = tuple[int, ...]
Stub = tuple[int, ...]

ROOT: Vertex = ()
DEFAULT_MAX_VERTICES = 100_000
# dense kernel matrices: 25M complex entries is about 400 MB
MAX_KERNEL_ENTRIES = 25_000_000


class CapExceeded(ValueError):
    """An enumeration would exceed the configured desk-scale size limit."""


@dataclass(frozen=True)
class TreeParams:
    q: int
    max_vertices: int = DEFAULT_MAX_VERTICES

    def __post_init__(self):
        if int(self.q) != self.q or self.q < 2:
            raise ValueError(f"branching number q must be an integer >= 2, got {self.q!r}")

    @property
    def log_q(self) -> float:
        return math.log(self.q)

    @property
    def tau(self) -> float:
        return math.pi / math.log(self.q)


class NbWord(NamedTuple):
    """A cylinder name: a base vertex and a non-backtracking stub read from it."""

    base: Vertex
    stub: Stub

    @property
    def end(self) -> Vertex:
        return reduce_concat(self.base, self.stub)


def is_reduced(word: Sequence[int]) -> bool:
    return all(a != b for a, b in zip(word, word[1:]))


def reduce_concat(a: Sequence[int], b: Sequence[int]) -> tuple[int, ...]:
    out = list(a)
    for c in b:
        if out and out[-1] == c:
            out.pop()
        else:
            out.append(c)
    return tuple(out)


def step(x: Vertex, colour: int) -> Vertex:
    if x and x[-1] == colour:
        return x[:-1]
    return x + (colour,)


def path_word(x: Vertex, y: Vertex) -> tuple[int, ...]:
    """Colours read along the geodesic from ``x`` to ``y``."""
    k = 0
    n = min(len(x), len(y))
    while k < n and x[k] == y[k]:
        k += 1
    return tuple(reversed(x[k:])) + tuple(y[k:])


def distance(x: Vertex, y: Vertex) -> int:
    k = 0
    n = min(len(x), len(y))
    while k < n and x[k] == y[k]:
        k += 1
    return len(x) + len(y) - 2 * k


def geodesic(x: Vertex, y: Vertex) -> list[Vertex]:
    out = [x]
    v = x
    for c in path_word(x, y):
        v = step(v, c)
        out.append(v)
    return out


def sphere_size(n: int, q: int) -> int:
    return 1 if n == 0 else (q + 1) * q ** (n - 1)


def ball_size(radius: int, q: int) -> int:
    return 1 + (q + 1) * (q**radius - 1) // (q - 1)


def _check_cap(count: int, cap: int | None) -> None:
    if cap is not None and count > cap:
        raise CapExceeded(f"enumeration of {count} items exceeds the cap of {cap}")


@lru_cache(maxsize=None)
def _stub_table(n: int, q: int) -> tuple[Stub, ...]:
    if n == 0:
        return ((),)
    out = []
    for w in _stub_table(n - 1, q):
        for c in range(q + 1):
            if not w or w[-1] != c:
                out.append(w + (c,))
    return tuple(out)


def stubs(n: int, q: int, cap: int | None = DEFAULT_MAX_VERTICES) -> tuple[Stub, ...]:
    """All non-backtracking stubs of length ``n`` (base independent), lexicographic."""
    _check_cap(sphere_size(n, q), cap)
    return _stub_table(n, q)


@lru_cache(maxsize=None)
def stub_array(n: int, q: int) -> np.ndarray:
    """``stubs(n, q)`` as an integer array of shape ``(count, n)``."""
    arr = np.array(_stub_table(n, q), dtype=np.int64).reshape(sphere_size(n, q), n)
    arr.setflags(write=False)
    return arr


def extensions(stub: Stub, k: int, q: int, cap: int | None = DEFAULT_MAX_VERTICES) -> list[Stub]:
    """Non-backtracking extensions of ``stub`` by ``k`` letters, lexicographic."""
    count = q**k if stub else sphere_size(k, q)
    _check_cap(count, cap)
    out = [tuple(stub)]
    for _ in range(k):
        nxt = []
        for w in out:
            for c in range(q + 1):
                if not w or w[-1] != c:
                    nxt.append(w + (c,))
        out = nxt
    return out


def extension_count(m: int, n: int, q: int) -> int:
    """Number of depth-``n`` stubs refining a given depth-``m`` stub (``m <= n``)."""
    if m == n:
        return 1
    if m == 0:
        return sphere_size(n, q)
    return q ** (n - m)


def nb_extensions(w: NbWord, k: int, q: int, cap: int | None = DEFAULT_MAX_VERTICES) -> list[NbWord]:
    return [NbWord(w.base, s) for s in extensions(w.stub, k, q, cap)]


def sphere(x: Vertex, n: int, q: int, cap: int | None = DEFAULT_MAX_VERTICES) -> list[Vertex]:
    _check_cap(sphere_size(n, q), cap)
    return sorted(reduce_concat(x, w) for w in _stub_table(n, q))


def ball(x: Vertex, radius: int, q: int, cap: int | None = DEFAULT_MAX_VERTICES) -> list[Vertex]:
    """Vertices within ``radius`` of ``x``, ordered by distance then lexicographically."""
    _check_cap(ball_size(radius, q), cap)
    out: list[Vertex] = []
    for n in range(radius + 1):
        out.extend(sphere(x, n, q, cap=None))
    return out


def transport_stub(path: Sequence[int], w: Stub, m: int) -> Stub:
    """Re-read a ray as a stub of length ``m`` from the far end of ``path``.

    ``path`` is the colour word of the geodesic from the base ``x`` to another
    vertex ``y`` and ``w`` is a stub at ``x``.  Returns the first ``m`` colours
    of the ray from ``y`` towards the same boundary point.
    """
    d = len(path)
    j = 0
    while j < d and j < len(w) and w[j] == path[j]:
        j += 1
    if j == d:
        need = d + m
        out = tuple(w[d:d + m])
    else:
        if j == len(w):
            raise ValueError("stub too short to locate the confluence point")
        back = tuple(reversed(path[j:]))
        need = j + max(0, m - len(back))
        out = (back + tuple(w[j:need]))[:m]
    if len(w) < need:
        raise ValueError(f"stub of length {len(w)} too short; need {need}")
    return out


def word_str(word: Sequence[int]) -> str:
    return "".join(str(c) for c in word)


def parse_word(text: str, q: int | None = None) -> tuple[int, ...]:
    text = text.strip()
    if text in ("", "-", "o"):
        return ()
    word = tuple(int(ch) for ch in text)
    if q is not None and any(c > q for c in word):
        raise ValueError(f"colour out of range 0..{q} in {text!r}")
    return word


def common_prefix_lengths(stub_arr: np.ndarray, word: Sequence[int]) -> np.ndarray:
    """Length of the common prefix of each row of ``stub_arr`` with ``word``."""
    n = min(stub_arr.shape[1], len(word))
    if n == 0:
        return np.zeros(stub_arr.shape[0], dtype=np.int64)
    eq = stub_arr[:, :n] == np.asarray(word[:n], dtype=np.int64)
    return np.cumprod(eq, axis=1).sum(axis=1)

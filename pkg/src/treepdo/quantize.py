"""Kernels of quantized symbols and the operator calculus built on them.

All kernels live on ``ball(o, R)`` in shortlex order, so the kernel of a
smaller concentric ball is the leading principal block.  The boundary
integral in a kernel entry is an exact finite sum over cylinders; the only
numerical error is the ``s``-quadrature of the grid.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np
from scipy.special import polygamma

from .boundary import cylinder_measure
from .spectral import SGrid
from .symbols import (
    CylSymbol,
    DoubleSymbol,
    SClassReport,
    exp_profile,
    shift_compose,
    transfer_L,
)
from .tree import (
    DEFAULT_MAX_VERTICES,
    MAX_KERNEL_ENTRIES,
    CapExceeded,
    Vertex,
    ball,
    ball_size,
    common_prefix_lengths,
    distance,
    extension_count,
    path_word,
    sphere_size,
    stub_array,
    stubs,
    transport_stub,
)

N_DECAY = 4
POWER_TOL = 1e-10
POWER_MAX_ITER = 2000
RESIDUAL_TOL = 1e-4
DEFAULT_TAIL = 3
# largest opnorm / (||a||_{Omega,4} + sum_{k<=4} ||d_s^k a||_inf) over the built-in
# families at q=2 was 0.0275 (R=5, test radius 3); frozen with headroom
CONTINUITY_CONSTANT = 0.05


@dataclass(frozen=True)
class KernelMatrix:
    q: int
    radius: int
    vertices: tuple[Vertex, ...]
    matrix: np.ndarray
    grid_id: int | None = None
    source: str = ""
    bandwidth: int | None = None  # entries vanish beyond this distance, when known
    symbol_depth: int | None = None

    @property
    def size(self) -> int:
        return len(self.vertices)

    @property
    def index(self) -> dict[Vertex, int]:
        return _index(self.vertices)

    def distances(self) -> np.ndarray:
        return distance_matrix(self.q, self.radius)[: self.size, : self.size]

    def restrict(self, radius: int) -> KernelMatrix:
        if radius > self.radius:
            raise ValueError(f"cannot restrict radius {self.radius} kernel to radius {radius}")
        n = ball_size(radius, self.q)
        return replace(self, radius=radius, vertices=self.vertices[:n], matrix=self.matrix[:n, :n])

    def entry(self, x: Vertex, y: Vertex) -> complex:
        idx = self.index
        return complex(self.matrix[idx[x], idx[y]])

    def _combine(self, other: KernelMatrix, matrix: np.ndarray, source: str) -> KernelMatrix:
        _check_compatible(self, other)
        band = None
        if self.bandwidth is not None and other.bandwidth is not None:
            band = max(self.bandwidth, other.bandwidth)
        return KernelMatrix(self.q, self.radius, self.vertices, matrix,
                            _merge_grid(self.grid_id, other.grid_id), source, band)

    def __sub__(self, other: KernelMatrix) -> KernelMatrix:
        return self._combine(other, self.matrix - other.matrix, f"({self.source} - {other.source})")

    def __add__(self, other: KernelMatrix) -> KernelMatrix:
        return self._combine(other, self.matrix + other.matrix, f"({self.source} + {other.source})")

    def scaled(self, c: complex) -> KernelMatrix:
        return replace(self, matrix=c * self.matrix, source=f"{c}*{self.source}")


@lru_cache(maxsize=64)
def _index(vertices: tuple[Vertex, ...]) -> dict[Vertex, int]:
    return {v: i for i, v in enumerate(vertices)}


@lru_cache(maxsize=16)
def distance_matrix(q: int, radius: int) -> np.ndarray:
    verts = ball((), radius, q, cap=None)
    out = np.array([[distance(x, y) for y in verts] for x in verts], dtype=np.int64)
    out.setflags(write=False)
    return out


def _merge_grid(a: int | None, b: int | None) -> int | None:
    if a is not None and b is not None and a != b:
        raise ValueError("kernels were assembled on different s-grids")
    return a if a is not None else b


def _check_compatible(a: KernelMatrix, b: KernelMatrix) -> None:
    if a.q != b.q or a.radius != b.radius:
        raise ValueError("kernels live on different balls")
    _merge_grid(a.grid_id, b.grid_id)


def _ball_vertices(q: int, radius: int, cap: int | None) -> tuple[Vertex, ...]:
    n = ball_size(radius, q)
    if cap is not None and n * n > MAX_KERNEL_ENTRIES:
        raise CapExceeded(f"a dense kernel on {n} vertices exceeds {MAX_KERNEL_ENTRIES} entries")
    return tuple(ball((), radius, q, cap=cap))


# --------------------------------------------------------------------------
# kernels of symbols


def spectral_table(a: CylSymbol | DoubleSymbol, grid: SGrid, hmax: int) -> np.ndarray:
    """``I[i, h + hmax] = sum_k w_k q**(i s_k h) eta_i(s_k)`` for ``|h| <= hmax``."""
    h = np.arange(-hmax, hmax + 1)
    wphase = grid.phase(h) * grid.weights  # (2hmax+1, nodes)
    if not a.terms:
        return np.zeros((0, len(h)), dtype=complex)
    eta = np.stack([t.profile.derivatives(grid.nodes, 0)[0] for t in a.terms])
    return eta @ wphase.T


def _check_symbol(a: CylSymbol, grid: SGrid, radius: int) -> None:
    if a.q != grid.q:
        raise ValueError(f"symbol on q={a.q} but grid on q={grid.q}")
    if a.domain_radius is not None and a.domain_radius < radius:
        raise ValueError(f"symbol domain radius {a.domain_radius} < kernel radius {radius}")


def _spatial_rows(a: CylSymbol, x: Vertex, m: int) -> np.ndarray:
    rows = [a.spatial_values(x, p) for p in stubs(m, a.q, cap=None)]
    return np.array(rows, dtype=complex).reshape(len(rows), len(a.terms))


def _match_counts(m: int, d: int, q: int) -> tuple[np.ndarray, np.ndarray]:
    """Confluence depths ``j = m..d`` of the stubs refining the prefix of the path, with counts."""
    js = np.arange(m, d + 1)
    counts = np.empty(len(js))
    for i, j in enumerate(js):
        if j == d:
            counts[i] = 1
        elif j == 0:
            counts[i] = q**d
        else:
            counts[i] = (q - 1) * q ** (d - j - 1)
    return js, counts


def kernel_of_symbol(a: CylSymbol, radius: int, grid: SGrid, method: str = "grouped",
                     cap: int | None = DEFAULT_MAX_VERTICES) -> KernelMatrix:
    """Kernel ``k_a(x, y)`` of ``Op(a)`` on ``ball(o, radius)``.

    ``method="grouped"`` sums over (stub prefix, confluence depth) classes with
    their multiplicities; ``method="naive"`` enumerates every cylinder.
    """
    if method not in ("grouped", "naive"):
        raise ValueError(f"unknown kernel method {method!r}")
    _check_symbol(a, grid, radius)
    q = a.q
    verts = _ball_vertices(q, radius, cap)
    hmax = 2 * radius
    table = spectral_table(a, grid, hmax)
    sqrt_q = np.sqrt(float(q))
    out = np.zeros((len(verts), len(verts)), dtype=complex)
    for ix, x in enumerate(verts):
        m = a.stub_depth(x)
        if cap is not None and sphere_size(m, q) > cap:
            raise CapExceeded(f"{sphere_size(m, q)} depth-{m} stubs exceed the cap of {cap}")
        gi = _spatial_rows(a, x, m) @ table  # (stubs, 2hmax+1)
        if method == "grouped":
            out[ix] = _grouped_row(x, verts, m, gi, q, hmax, sqrt_q)
        else:
            out[ix] = _naive_row(x, verts, m, gi, q, hmax, sqrt_q)
    return KernelMatrix(q, radius, verts, out, grid.grid_id, f"Op({a.label})",
                        symbol_depth=a.depth)


def _grouped_row(x, verts, m, gi, q, hmax, sqrt_q):
    sarr = stub_array(m, q)
    row = np.empty(len(verts), dtype=complex)
    for iy, y in enumerate(verts):
        g = path_word(x, y)
        d = len(g)
        j = common_prefix_lengths(sarr, g)
        if m >= d:
            h = 2 * j - d
            val = float(cylinder_measure(m, q)) * np.sum(sqrt_q**h * gi[np.arange(len(j)), h + hmax])
        else:
            match = j == m
            h = 2 * j[~match] - d
            rest = extension_count(m, d, q) * np.sum(sqrt_q**h * gi[np.flatnonzero(~match), h + hmax])
            star = np.flatnonzero(match)[0]
            js, counts = _match_counts(m, d, q)
            hs = 2 * js - d
            val = float(cylinder_measure(d, q)) * (rest + np.sum(counts * sqrt_q**hs * gi[star, hs + hmax]))
        row[iy] = val
    return row


def _naive_row(x, verts, m, gi, q, hmax, sqrt_q):
    row = np.empty(len(verts), dtype=complex)
    prefix_index = {p: i for i, p in enumerate(stubs(m, q, cap=None))}
    for iy, y in enumerate(verts):
        g = path_word(x, y)
        d = len(g)
        depth = max(m, d)
        total = 0j
        nu = 1.0 / sphere_size(depth, q)
        for w in stubs(depth, q, cap=None):
            j = 0
            while j < d and w[j] == g[j]:
                j += 1
            h = 2 * j - d
            total += nu * sqrt_q**h * gi[prefix_index[w[:m]], h + hmax]
        row[iy] = total
    return row


def kernel_via_reference(a: CylSymbol, radius: int, grid: SGrid, ref: Vertex) -> KernelMatrix:
    """``k_a`` with the boundary integral taken against ``nu_ref`` instead of ``nu_x``.

    The integrand picks up the Radon-Nikodym factor ``q**(h(x) - h(ref))`` and
    the ray seen from ``x`` is read off the cylinders at ``ref``.
    """
    _check_symbol(a, grid, radius)
    q = a.q
    ref = tuple(ref)
    verts = _ball_vertices(q, radius, None)
    hmax = 2 * radius
    table = spectral_table(a, grid, hmax)
    sqrt_q = np.sqrt(float(q))
    out = np.zeros((len(verts), len(verts)), dtype=complex)
    for ix, x in enumerate(verts):
        m = a.stub_depth(x)
        gi = _spatial_rows(a, x, m) @ table
        prefix_index = {p: i for i, p in enumerate(stubs(m, q, cap=None))}
        to_x = path_word(ref, x)
        dx = len(to_x)
        for iy, y in enumerate(verts):
            to_y = path_word(ref, y)
            depth = max(dx + m, len(to_y))
            warr = stub_array(depth, q)
            hx = 2 * common_prefix_lengths(warr, to_x) - dx
            hy = 2 * common_prefix_lengths(warr, to_y) - len(to_y)
            rows = [prefix_index[transport_stub(to_x, w, m)] for w in stubs(depth, q, cap=None)]
            h = hy - hx
            vals = float(q) ** hx * sqrt_q**h * gi[rows, h + hmax]
            out[ix, iy] = np.sum(vals) / sphere_size(depth, q)
    return KernelMatrix(q, radius, verts, out, grid.grid_id, f"Op({a.label})@ref", symbol_depth=a.depth)


def kernel_of_double(c: DoubleSymbol, radius: int, grid: SGrid,
                     cap: int | None = DEFAULT_MAX_VERTICES) -> KernelMatrix:
    """Kernel ``K_c(x, y)`` of ``OP(c)``, by enumeration of the cylinders at ``x``."""
    if c.q != grid.q:
        raise ValueError(f"symbol on q={c.q} but grid on q={grid.q}")
    q = c.q
    verts = _ball_vertices(q, radius, cap)
    hmax = 2 * radius
    table = spectral_table(c, grid, hmax)
    sqrt_q = np.sqrt(float(q))
    out = np.zeros((len(verts), len(verts)), dtype=complex)
    if not c.terms:
        return KernelMatrix(q, radius, verts, out, grid.grid_id, f"OP({c.label})")
    for ix, x in enumerate(verts):
        for iy, y in enumerate(verts):
            g = path_word(x, y)
            d = len(g)
            depth = max(c.depth_fn(x, y), d)
            warr = stub_array(depth, q)
            h = 2 * common_prefix_lengths(warr, g) - d
            vals = np.array([c.spatial_values(x, y, w) for w in stubs(depth, q, cap=None)])
            integ = np.einsum("wi,iw->w", vals, table[:, h + hmax])
            out[ix, iy] = np.sum(sqrt_q**h * integ) / sphere_size(depth, q)
    return KernelMatrix(q, radius, verts, out, grid.grid_id, f"OP({c.label})")


def laplacian_kernel(q: int, radius: int) -> KernelMatrix:
    verts = _ball_vertices(q, radius, DEFAULT_MAX_VERTICES)
    d = distance_matrix(q, radius)
    mat = np.where(d == 1, 1.0 / (q + 1), 0.0).astype(complex)
    return KernelMatrix(q, radius, verts, mat, None, "Delta", bandwidth=1, symbol_depth=0)


def identity_kernel(q: int, radius: int) -> KernelMatrix:
    verts = _ball_vertices(q, radius, DEFAULT_MAX_VERTICES)
    return KernelMatrix(q, radius, verts, np.eye(len(verts), dtype=complex), None, "I",
                        bandwidth=0, symbol_depth=0)


def zero_kernel(q: int, radius: int) -> KernelMatrix:
    verts = _ball_vertices(q, radius, DEFAULT_MAX_VERTICES)
    n = len(verts)
    return KernelMatrix(q, radius, verts, np.zeros((n, n), dtype=complex), None, "0", bandwidth=0)


def adjoint_kernel(A: KernelMatrix) -> KernelMatrix:
    return replace(A, matrix=A.matrix.conj().T.copy(), source=f"{A.source}*")


# --------------------------------------------------------------------------
# decay, negligibility and the composition series


@dataclass(frozen=True)
class DecayProfile:
    q: int
    maxima: np.ndarray  # max |k(x, y)| over pairs at distance d, d = 0..2R
    constants: np.ndarray  # C_N for N = 0..N_DECAY
    predicted: np.ndarray | None = None
    flagged: bool = False

    def weighted(self, n: int) -> np.ndarray:
        d = np.arange(len(self.maxima))
        return (1.0 + d) ** n * float(self.q) ** (d / 2) * self.maxima


def decay_profile(A: KernelMatrix, report: SClassReport | None = None,
                  factor: float = 10.0) -> DecayProfile:
    """Per-distance maxima of ``|k|`` and the smallest ``C_N`` with
    ``|k(x, y)| <= C_N q**(-d/2) (1 + d)**-N`` on the ball.

    With a class report the observed constants are compared against
    ``||a||_{Omega,N} + sum_{k <= N+1} ||d_s^k a||_inf``; ``flagged`` is set when
    some ``C_N`` exceeds ``factor`` times that shape.
    """
    dist = A.distances()
    absval = np.abs(A.matrix)
    maxima = np.zeros(2 * A.radius + 1)
    for d in range(len(maxima)):
        sel = dist == d
        if sel.any():
            maxima[d] = absval[sel].max()
    dd = np.arange(len(maxima))
    base = float(A.q) ** (dd / 2) * maxima
    consts = np.array([np.max((1.0 + dd) ** n * base) for n in range(N_DECAY + 1)])
    predicted = None
    flagged = False
    if report is not None:
        predicted = np.array([report.omega_norms[n] + sum(report.sup_norms[: min(n + 2, len(report.sup_norms))])
                              for n in range(N_DECAY + 1)])
        flagged = bool(np.any(consts > factor * predicted))
    return DecayProfile(A.q, maxima, consts, predicted, flagged)


def negligibility_report(A: KernelMatrix, eps_tag: float | None = None) -> dict[int, float]:
    """``{N: C_N(eps)}`` for ``N <= 4``."""
    return {n: float(c) for n, c in enumerate(decay_profile(A).constants)}


def composition_series(d: int, n_start: int, power: int = 3, n_max: int = 400) -> float:
    """``sum_{n >= n_start} sum_{k=0}^{d} ((1+k+n)(1+d-k+n))**-power`` with a bound on the tail."""
    n = np.arange(n_start, n_max + 1, dtype=float)[:, None]
    k = np.arange(d + 1, dtype=float)[None, :]
    body = np.sum(((1 + k + n) * (1 + d - k + n)) ** (-float(power)))
    if n_max < n_start:
        body = 0.0
    first = max(n_max, n_start - 1)
    remainder = (d + 1) / ((2 * power - 1) * (1 + first) ** (2 * power - 1))
    return float(body + remainder)


@lru_cache(maxsize=None)
def composition_constant(power: int = 3, d_max: int = 200) -> float:
    """``sup_D (1+D)**N sum_{n>=0} sum_k ((1+k+n)(1+D+n-k))**-N`` for the product of two
    kernels with ``q**(-d/2)(1+d)**-N`` decay; the series needs ``N >= 3``."""
    if power < 3:
        raise ValueError("the composition series converges only for N >= 3")
    return max((1 + d) ** power * composition_series(d, 0, power) for d in range(d_max + 1))


@dataclass(frozen=True)
class TailBound:
    tail_radius: int
    bound: float
    c3: tuple[float, float] = (0.0, 0.0)


def compose_kernels(A: KernelMatrix, B: KernelMatrix, tail: int = DEFAULT_TAIL) -> tuple[KernelMatrix, TailBound]:
    """``(A o B)(x, y) = sum_{z in ball(o, R)} A(x, z) B(z, y)`` on the inner ball ``R - tail``.

    Every ``z`` outside ``ball(o, R)`` is at distance ``>= tail + 1`` from the
    geodesic between two inner vertices, so the dropped part is bounded by the
    composition series started at ``n = tail + 1`` times the operands' ``C_3``.
    """
    _check_compatible(A, B)
    if tail < 0 or tail > A.radius:
        raise ValueError(f"tail radius {tail} incompatible with kernel radius {A.radius}")
    inner = A.radius - tail
    n = ball_size(inner, A.q)
    mat = A.matrix[:n, :] @ B.matrix[:, :n]
    band = None
    if A.bandwidth is not None and B.bandwidth is not None:
        band = A.bandwidth + B.bandwidth
    prod = KernelMatrix(A.q, inner, A.vertices[:n], mat, _merge_grid(A.grid_id, B.grid_id),
                        f"{A.source}.{B.source}", band)
    if any(k.bandwidth is not None and k.bandwidth <= tail for k in (A, B)):
        return prod, TailBound(tail, 0.0)
    c3a = float(decay_profile(A).constants[3])
    c3b = float(decay_profile(B).constants[3])
    worst = max(float(A.q) ** (-d / 2) * composition_series(d, tail + 1) for d in range(2 * inner + 1))
    return prod, TailBound(tail, c3a * c3b * worst, (c3a, c3b))


def matrix_commutator(A: KernelMatrix, B: KernelMatrix, inner: int) -> KernelMatrix:
    """``AB - BA`` restricted to ``ball(o, inner)``; exact there when one factor has
    bandwidth ``<= R - inner``."""
    _check_compatible(A, B)
    mat = A.matrix @ B.matrix - B.matrix @ A.matrix
    n = ball_size(inner, A.q)
    return KernelMatrix(A.q, inner, A.vertices[:n], mat[:n, :n],
                        _merge_grid(A.grid_id, B.grid_id), f"[{A.source}, {B.source}]")


def commutator_symbol(a: CylSymbol) -> CylSymbol:
    """Symbol ``c`` with ``Op(c) = [Delta, Op(a)]``:
    ``sqrt(q)/(q+1) (q**(-is)(a o sigma - a) + q**(is)(L a - a))``."""
    q = a.q
    coef = math.sqrt(q) / (q + 1)
    minus = exp_profile(q, -1) * coef
    plus = exp_profile(q, +1) * coef

    def times(sym: CylSymbol, prof) -> CylSymbol:
        return replace(sym, terms=tuple(replace(t, profile=t.profile * prof) for t in sym.terms))

    shifted = shift_compose(a)
    moved = transfer_L(a)
    c = times(shifted - a, minus) + times(moved - a, plus)
    return replace(c, depth=a.depth + 1, label=f"comm({a.label})")


# --------------------------------------------------------------------------
# the a#b symbol


@dataclass(frozen=True)
class SharpProduct:
    """``a#b`` evaluated from the kernel of ``Op(a)`` on ``ball(o, R)``.

    ``value(x, w)`` needs ``x`` in the inner ball ``R - tail`` and a stub ``w``
    at ``x`` long enough to locate every ``y`` of the ball and read ``b``
    from there (``|x| + R + depth(b)`` letters always suffice).
    """

    kernel: KernelMatrix
    b: CylSymbol
    grid: SGrid
    tail: TailBound

    def needed_stub(self, x: Vertex) -> int:
        return len(x) + self.kernel.radius + self.b.depth

    def value(self, x: Vertex, w) -> np.ndarray:
        K = self.kernel
        inner = K.radius - self.tail.tail_radius
        if len(x) > inner:
            raise ValueError(f"|x| = {len(x)} outside the certified inner ball {inner}")
        w = tuple(w)
        if len(w) < self.needed_stub(x):
            raise ValueError(f"stub of length {len(w)} too short; need {self.needed_stub(x)}")
        q = K.q
        row = K.matrix[K.index[x]]
        bt = self.b.profile_table(self.grid.nodes, 0)[:, 0, :]
        total = np.zeros(self.grid.size, dtype=complex)
        for iy, y in enumerate(K.vertices):
            if row[iy] == 0:
                continue
            g = path_word(x, y)
            j = 0
            while j < len(g) and w[j] == g[j]:
                j += 1
            h = 2 * j - len(g)
            gy = self.b.spatial_values(y, transport_stub(g, w, self.b.depth))
            total += row[iy] * float(q) ** (h / 2) * np.conj(self.grid.phase(h)) * (gy @ bt)
        return total


def sharp_product_symbol(a: CylSymbol, b: CylSymbol, radius: int, tail: int, grid: SGrid,
                         kernel: KernelMatrix | None = None) -> SharpProduct:
    if tail < 0 or tail > radius:
        raise ValueError(f"tail radius {tail} incompatible with radius {radius}")
    K = kernel if kernel is not None else kernel_of_symbol(a, radius, grid)
    c3 = float(decay_profile(K).constants[3])
    bsup = 0.0
    if b.terms:
        gmax = max(np.abs(b.spatial_values(y, p)).sum() for y in ball((), radius, b.q, cap=None)
                   for p in stubs(b.depth, b.q, cap=None))
        pmax = max(np.abs(t.profile(grid.nodes)).max() for t in b.terms)
        bsup = float(gmax * pmax)
    bound = c3 * bsup * float(polygamma(1, tail + 2))
    return SharpProduct(K, b, grid, TailBound(tail, bound, (c3, bsup)))


# --------------------------------------------------------------------------
# operator norms


@dataclass(frozen=True)
class NormEstimate:
    norm: float
    iterations: int
    residual: float
    converged: bool


def opnorm_estimate(A: KernelMatrix | np.ndarray, iters: int = POWER_MAX_ITER, seed: int = 0,
                    tol: float = POWER_TOL) -> NormEstimate:
    """Power iteration on ``A^H A`` of the finite section, from a seeded random start."""
    mat = A.matrix if isinstance(A, KernelMatrix) else np.asarray(A)
    n = mat.shape[1]
    if n == 0 or not np.any(mat):
        return NormEstimate(0.0, 0, 0.0, True)
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    v /= np.linalg.norm(v)
    lam = 0.0
    converged = False
    it = 0
    for it in range(1, iters + 1):
        w = mat.conj().T @ (mat @ v)
        new = float(np.vdot(v, w).real)
        nw = np.linalg.norm(w)
        if nw == 0:
            lam, converged = 0.0, True
            break
        v = w / nw
        if abs(new - lam) <= tol:
            lam, converged = new, True
            break
        lam = new
    w = mat.conj().T @ (mat @ v)
    lam = max(lam, float(np.vdot(v, w).real))
    residual = float(np.linalg.norm(w - lam * v))
    return NormEstimate(math.sqrt(max(lam, 0.0)), it, residual, converged and residual <= RESIDUAL_TOL)


def continuity_shape(report: SClassReport) -> float:
    """``||a||_{Omega,4} + sum_{k<=4} ||d_s^k a||_inf`` from a class report."""
    return report.omega_norms[4] + sum(report.sup_norms[:5])


def continuity_bound(report: SClassReport, constant: float = CONTINUITY_CONSTANT) -> float:
    return constant * continuity_shape(report)

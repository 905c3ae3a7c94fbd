"""Cylindrical symbols ``a(x, w, s) = sum_i g_i(x, w[:m_i]) * eta_i(s)``.

Here ``x`` is a vertex, ``w`` a stub read from ``x`` (it names the cylinder of
boundary points the symbol is evaluated on) and ``s`` the spectral parameter
in ``[0, tau]``.  Spatial parts are plain callables, memoised on first use;
profiles carry their ``s``-derivatives up to order ``K_MAX`` so that products
and the phase factors ``q**(+-is)`` stay exact.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from math import comb
from typing import Callable, Sequence

import numpy as np

from .boundary import refinement_stubs
from .tree import (
    Stub,
    Vertex,
    ball,
    distance,
    extension_count,
    parse_word,
    path_word,
    sphere_size,
    step,
    stubs,
    transport_stub,
    word_str,
)

K_MAX = 5
FLAT_TOL = 1e-12

Spatial = Callable[[Vertex, Stub], complex]


class DomainError(ValueError):
    """A symbol was evaluated outside the ball it is defined on."""


# --------------------------------------------------------------------------
# s-profiles


@dataclass(frozen=True)
class SProfile:
    """A function of ``s`` with derivatives ``0..kmax``.

    ``fn(s, kmax)`` returns a complex array of shape ``(kmax + 1, len(s))``.
    """

    fn: Callable[[np.ndarray, int], np.ndarray]
    kmax: int = K_MAX
    endpoint_flat: bool = False
    name: str = ""

    def derivatives(self, s, kmax: int | None = None) -> np.ndarray:
        kmax = self.kmax if kmax is None else kmax
        if kmax > self.kmax:
            raise ValueError(f"derivative order {kmax} exceeds K_max = {self.kmax}")
        s = np.atleast_1d(np.asarray(s, dtype=float))
        return np.asarray(self.fn(s, kmax), dtype=complex)[: kmax + 1]

    def __call__(self, s, k: int = 0):
        out = self.derivatives(s, k)[k]
        return out[0] if np.ndim(s) == 0 else out

    def __mul__(self, other: SProfile | complex) -> SProfile:
        if not isinstance(other, SProfile):
            c = complex(other)
            return SProfile(lambda s, k: c * self.fn(s, k), self.kmax, self.endpoint_flat,
                            f"{other}*{self.name}")
        f, g = self, other

        def leibniz(s, k):
            a = f.derivatives(s, k)
            b = g.derivatives(s, k)
            out = np.zeros_like(a)
            for n in range(k + 1):
                for i in range(n + 1):
                    out[n] += comb(n, i) * a[i] * b[n - i]
            return out

        return SProfile(leibniz, min(f.kmax, g.kmax), f.endpoint_flat or g.endpoint_flat,
                        f"{f.name}*{g.name}")

    __rmul__ = __mul__

    def conj(self) -> SProfile:
        f = self.fn
        return SProfile(lambda s, k: np.conj(f(s, k)), self.kmax, self.endpoint_flat,
                        f"conj({self.name})")


def constant_profile(c: complex = 1.0) -> SProfile:
    c = complex(c)

    def fn(s, k):
        out = np.zeros((k + 1, len(s)), dtype=complex)
        out[0] = c
        return out

    return SProfile(fn, K_MAX, c == 0, f"{c:g}" if c.imag == 0 else str(c))


def exp_profile(q: int, sign: int) -> SProfile:
    """``q**(sign * i s)``."""
    lam = sign * 1j * math.log(q)

    def fn(s, k):
        base = np.exp(lam * s)
        return np.array([lam**n * base for n in range(k + 1)])

    return SProfile(fn, K_MAX, False, f"q^({'+' if sign > 0 else '-'}is)")


def eigencurve_profile(q: int) -> SProfile:
    """``2 sqrt(q) cos(s log q) / (q + 1)``, the Laplacian's eigenvalue curve."""
    lq = math.log(q)
    amp = 2 * math.sqrt(q) / (q + 1)

    def fn(s, k):
        rows = []
        for n in range(k + 1):
            phase = s * lq + n * math.pi / 2
            rows.append(amp * lq**n * np.cos(phase))
        return np.array(rows, dtype=complex)

    return SProfile(fn, K_MAX, False, "lambda")


def _bump_u_derivatives(u: np.ndarray, kmax: int) -> np.ndarray:
    # f = exp(phi), phi(u) = -1/u - 1/(1 - u); f^(n+1) = sum_k C(n,k) f^(k) phi^(n+1-k)
    out = np.zeros((kmax + 1, len(u)))
    inside = (u > 0) & (u < 1)
    v = u[inside]
    phi = [-1 / v - 1 / (1 - v)]
    for n in range(1, kmax + 1):
        phi.append(-((-1) ** n) * math.factorial(n) / v ** (n + 1)
                   - math.factorial(n) / (1 - v) ** (n + 1))
    f = [np.exp(phi[0])]
    for n in range(kmax):
        f.append(sum(comb(n, k) * f[k] * phi[n + 1 - k] for k in range(n + 1)))
    for n in range(kmax + 1):
        out[n, inside] = f[n]
    return out


def bump_profile(q: int) -> SProfile:
    """``exp(-1 / (u (1 - u)))`` at ``u = s / tau``; all derivatives vanish at 0 and tau."""
    tau = math.pi / math.log(q)

    def fn(s, k):
        d = _bump_u_derivatives(s / tau, k)
        return d / tau ** np.arange(k + 1)[:, None]

    return SProfile(fn, K_MAX, True, "bump")


PROFILES = {
    "one": lambda q: constant_profile(1.0),
    "bump": bump_profile,
    "eigencurve": eigencurve_profile,
}


def named_profile(name: str, q: int) -> SProfile:
    try:
        return PROFILES[name](q)
    except KeyError:
        raise ValueError(f"unknown profile {name!r}; choose from {sorted(PROFILES)}") from None


def smooth_step(u):
    """C-infinity step: 0 for ``u <= 0``, 1 for ``u >= 1``, slope at most 2."""
    u = np.asarray(u, dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(u > 0, np.exp(-1 / np.where(u > 0, u, 1)), 0.0)
        b = np.where(u < 1, np.exp(-1 / np.where(u < 1, 1 - u, 1)), 0.0)
    out = a / (a + b)
    return float(out) if out.ndim == 0 else out


def cutoff(t, support: float = 1.0):
    """1-Lipschitz smooth cutoff on ``[0, inf)`` vanishing for ``t >= support``."""
    return smooth_step((support - np.asarray(t, dtype=float)) / 2)


# --------------------------------------------------------------------------
# symbols


def _memo(fn):
    return lru_cache(maxsize=None)(fn)


@dataclass(frozen=True)
class Term:
    spatial: Spatial
    profile: SProfile
    depth: int | None = 0  # None: the spatial part takes the full stub


@dataclass(frozen=True)
class CylSymbol:
    """Finite sum of separable cylindrical terms.

    ``domain_radius`` is the radius of the ball around ``o`` on which the
    spatial parts are defined (``None`` for the whole tree).  ``depth_fn``
    overrides ``depth`` for symbols whose cylinder depth varies with ``x``.
    """

    q: int
    depth: int
    terms: tuple[Term, ...]
    domain_radius: int | None = None
    depth_fn: Callable[[Vertex], int] | None = field(default=None, compare=False)
    label: str = ""

    def stub_depth(self, x: Vertex) -> int:
        return self.depth_fn(x) if self.depth_fn is not None else self.depth

    def check_domain(self, x: Vertex) -> None:
        if self.domain_radius is not None and len(x) > self.domain_radius:
            raise DomainError(f"|x| = {len(x)} outside the domain radius {self.domain_radius}")

    def spatial_values(self, x: Vertex, w: Stub) -> np.ndarray:
        self.check_domain(x)
        need = self.stub_depth(x)
        if len(w) < need:
            raise ValueError(f"stub of length {len(w)} shorter than the symbol depth {need}")
        w = tuple(w)
        return np.array([t.spatial(x, w if t.depth is None else w[: t.depth]) for t in self.terms],
                        dtype=complex)

    def profile_table(self, s, kmax: int = 0) -> np.ndarray:
        """Shape ``(n_terms, kmax + 1, len(s))``."""
        if not self.terms:
            return np.zeros((0, kmax + 1, np.size(s)), dtype=complex)
        return np.stack([t.profile.derivatives(s, kmax) for t in self.terms])

    def value(self, x: Vertex, w: Stub, s, k: int = 0):
        if k > K_MAX:
            raise ValueError(f"derivative order {k} exceeds K_max = {K_MAX}")
        g = self.spatial_values(x, w)
        if not self.terms:
            return 0.0 if np.ndim(s) == 0 else np.zeros(np.size(s), dtype=complex)
        out = g @ self.profile_table(s, k)[:, k, :]
        return out[0] if np.ndim(s) == 0 else out

    def derivative(self, x: Vertex, w: Stub, s, k: int):
        return self.value(x, w, s, k)

    def conj(self) -> CylSymbol:
        terms = tuple(
            Term(_memo(lambda x, w, g=t.spatial: complex(np.conj(g(x, w)))), t.profile.conj(), t.depth)
            for t in self.terms
        )
        return replace(self, terms=terms, label=f"conj({self.label})")

    def scaled(self, c: complex) -> CylSymbol:
        return replace(self, terms=tuple(Term(t.spatial, t.profile * c, t.depth) for t in self.terms))

    def __add__(self, other: CylSymbol) -> CylSymbol:
        if self.depth_fn is not None or other.depth_fn is not None:
            raise ValueError("cannot add symbols with position-dependent depth")
        return CylSymbol(self.q, max(self.depth, other.depth), self.terms + other.terms,
                         _min_radius(self.domain_radius, other.domain_radius),
                         label=f"({self.label} + {other.label})")

    def __sub__(self, other: CylSymbol) -> CylSymbol:
        return self + other.scaled(-1)

    def __mul__(self, other: CylSymbol) -> CylSymbol:
        return multiply(self, other)


def _min_radius(a: int | None, b: int | None) -> int | None:
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


def _shrink(radius: int | None, by: int) -> int | None:
    if radius is None:
        return None
    if radius - by < 0:
        raise DomainError("symbol domain exhausted")
    return radius - by


def constant_symbol(q: int, c: complex = 1.0) -> CylSymbol:
    return CylSymbol(q, 0, (Term(lambda x, w: 1.0, constant_profile(c)),), label=f"const({c})")


def profile_symbol(q: int, profile: SProfile) -> CylSymbol:
    return CylSymbol(q, 0, (Term(lambda x, w: 1.0, profile),), label=profile.name)


def spatial_symbol(q: int, fn: Callable[[Vertex], complex], profile: SProfile | None = None,
                   label: str = "") -> CylSymbol:
    """``a(x, w, s) = fn(x) * profile(s)``; multiplication operator when the profile is 1."""
    g = _memo(lambda x, w: complex(fn(x)))
    return CylSymbol(q, 0, (Term(g, profile or constant_profile(1.0)),), label=label or "a(x)")


def cylinder_symbol(q: int, depth: int, fn: Callable[[Vertex, Stub], complex],
                    profile: SProfile | None = None, label: str = "") -> CylSymbol:
    return CylSymbol(q, depth, (Term(_memo(fn), profile or constant_profile(1.0), depth),),
                     label=label or f"depth-{depth}")


def zero_symbol(q: int) -> CylSymbol:
    return CylSymbol(q, 0, (), label="0")


def multiply(a: CylSymbol, b: CylSymbol) -> CylSymbol:
    if a.q != b.q:
        raise ValueError("symbols on trees with different q")
    if a.depth_fn is not None or b.depth_fn is not None:
        raise ValueError("cannot multiply symbols with position-dependent depth")
    terms = []
    for ta in a.terms:
        for tb in b.terms:
            def g(x, w, ga=ta.spatial, gb=tb.spatial, da=ta.depth, db=tb.depth):
                return ga(x, w[:da]) * gb(x, w[:db])
            terms.append(Term(_memo(g), ta.profile * tb.profile, max(ta.depth, tb.depth)))
    return CylSymbol(a.q, max(a.depth, b.depth), tuple(terms),
                     _min_radius(a.domain_radius, b.domain_radius), label=f"{a.label}*{b.label}")


def _shifted_spatial(g: Spatial, m: int) -> Spatial:
    return _memo(lambda x, w: g(step(x, w[0]), w[1 : m + 1]))


def _transferred_spatial(g: Spatial, m: int, q: int) -> Spatial:
    def lg(x, w):
        total = 0j
        for c in range(q + 1):
            if c != w[0]:
                total += g(step(x, c), ((c,) + w)[:m])
        return total / q

    return _memo(lg)


def shift_compose(a: CylSymbol) -> CylSymbol:
    """``(a o sigma)(x, w, s) = a(x w_1, w_2.., s)``: move one step towards the boundary point."""
    if a.depth_fn is not None:
        raise ValueError("shift needs a fixed-depth symbol")
    terms = tuple(Term(_shifted_spatial(t.spatial, t.depth), t.profile, t.depth + 1) for t in a.terms)
    return CylSymbol(a.q, a.depth + 1, terms, _shrink(a.domain_radius, 1),
                     label=f"{a.label}.sigma")


def transfer_L(a: CylSymbol) -> CylSymbol:
    """Average of ``a`` over the ``q`` neighbours that the shift maps onto ``x``."""
    if a.depth_fn is not None:
        raise ValueError("transfer needs a fixed-depth symbol")
    terms = tuple(
        Term(_transferred_spatial(t.spatial, t.depth, a.q), t.profile, max(t.depth - 1, 1))
        for t in a.terms
    )
    depth = max(a.depth - 1, 1)
    return CylSymbol(a.q, depth, terms, _shrink(a.domain_radius, 1), label=f"L({a.label})")


def average_En(a: CylSymbol, n: int, base: Vertex | None = None) -> CylSymbol:
    """Conditional average over depth-``n`` cylinders.

    With ``base=None`` every spatial argument ``x`` averages over cylinders at
    ``x`` itself.  With a fixed ``base`` the averaging cylinders sit at ``base``
    while the symbol is still read from ``x``; the result then depends on the
    first ``n + d(base, x)`` letters of the stub at ``x``.
    """
    if n < 0:
        return replace(zero_symbol(a.q), domain_radius=a.domain_radius)
    q = a.q
    terms = []
    if base is None:
        for t in a.terms:
            m = a.depth if t.depth is None else t.depth
            if n >= m:
                terms.append(t)
                continue

            def avg(x, w, g=t.spatial, m=m):
                ext = [v for v in _extend(w[:n], m - n, q)]
                return sum(g(x, v) for v in ext) / len(ext)

            terms.append(Term(_memo(avg), t.profile, n))
        return replace(a, depth=min(n, a.depth), terms=tuple(terms), label=f"E{n}({a.label})")

    base = tuple(base)

    def depth_at(x):
        return 0 if n == 0 else n + distance(base, x)

    for t in a.terms:
        def avg(x, w, g=t.spatial, m=t.depth):
            ys = refinement_stubs(base, x, w, n, a.stub_depth(x) if m is None else m, q)
            return sum(g(x, v) for v in ys) / len(ys)

        terms.append(Term(_memo(avg), t.profile, None))
    return CylSymbol(q, n, tuple(terms), a.domain_radius, depth_at, f"E{n}^{word_str(base)}({a.label})")


def _extend(w: Stub, k: int, q: int) -> list[Stub]:
    out = [tuple(w)]
    for _ in range(k):
        out = [v + (c,) for v in out for c in range(q + 1) if not v or v[-1] != c]
    return out


# --------------------------------------------------------------------------
# double symbols


@dataclass(frozen=True)
class DoubleTerm:
    spatial: Callable[[Vertex, Vertex, Stub], complex]
    profile: SProfile


@dataclass(frozen=True)
class DoubleSymbol:
    """``c(x, y, w, s) = sum_i g_i(x, y, w) eta_i(s)`` with ``w`` a stub at ``x``.

    ``depth_fn(x, y)`` is the stub length at ``x`` that the spatial parts need.
    """

    q: int
    terms: tuple[DoubleTerm, ...]
    depth_fn: Callable[[Vertex, Vertex], int]
    label: str = ""

    def spatial_values(self, x: Vertex, y: Vertex, w: Stub) -> np.ndarray:
        return np.array([t.spatial(x, y, w) for t in self.terms], dtype=complex)


def left_quantized(a: CylSymbol) -> DoubleSymbol:
    """``c(x, y, .) = a(x, .)``."""
    terms = tuple(
        DoubleTerm(lambda x, y, w, g=t.spatial, m=t.depth: g(x, w if m is None else w[:m]), t.profile)
        for t in a.terms
    )
    return DoubleSymbol(a.q, terms, lambda x, y: a.stub_depth(x), f"left({a.label})")


def right_quantized(b: CylSymbol) -> DoubleSymbol:
    """``c(x, y, .) = b(y, .)``, the boundary point re-read from ``y``."""
    if b.depth_fn is not None:
        raise ValueError("right quantization needs a fixed-depth symbol")

    def term(t):
        def g(x, y, w):
            b.check_domain(y)
            return t.spatial(y, transport_stub(path_word(x, y), w, t.depth))
        return DoubleTerm(g, t.profile)

    return DoubleSymbol(b.q, tuple(term(t) for t in b.terms),
                        lambda x, y: distance(x, y) + b.depth, f"right({b.label})")


def two_point(a: CylSymbol, b: CylSymbol) -> DoubleSymbol:
    """``c(x, y, w, s) = a(x, w, s) b(y, w, s)``."""
    terms = []
    for ta in a.terms:
        for tb in b.terms:
            def g(x, y, w, ga=ta.spatial, gb=tb.spatial, ma=ta.depth, mb=tb.depth):
                return ga(x, w[:ma]) * gb(y, transport_stub(path_word(x, y), w, mb))
            terms.append(DoubleTerm(g, ta.profile * tb.profile))
    return DoubleSymbol(a.q, tuple(terms),
                        lambda x, y: max(a.depth, distance(x, y) + b.depth), f"{a.label}(x){b.label}(y)")


def zero_double(q: int) -> DoubleSymbol:
    return DoubleSymbol(q, (), lambda x, y: 0, "0")


# --------------------------------------------------------------------------
# built-in families


def bump_profile_only(q: int) -> CylSymbol:
    return replace(profile_symbol(q, bump_profile(q)), label="bump")


def radial_eps(q: int, eps: float, support: float = 1.0) -> CylSymbol:
    """``eta(s) chi(eps |x|)`` with ``eta`` the bump and ``chi`` a 1-Lipschitz cutoff."""
    a = spatial_symbol(q, lambda x: cutoff(eps * len(x), support), bump_profile(q))
    return replace(a, label=f"radial_eps({eps:g})")


def shifted_k(q: int, eps: float, k: int, support: float = 1.0) -> CylSymbol:
    a = radial_eps(q, eps, support)
    for _ in range(k):
        a = shift_compose(a)
    return replace(a, label=f"shifted_{k}({eps:g})")


FAMILIES = ("bump_profile_only", "radial_eps", "shifted_k")


def builtin_family(kind: str, q: int, eps: float = 0.1, k: int = 2, support: float = 1.0) -> CylSymbol:
    if kind == "bump_profile_only":
        return bump_profile_only(q)
    if kind == "radial_eps":
        return radial_eps(q, eps, support)
    if kind == "shifted_k":
        return shifted_k(q, eps, k, support)
    raise ValueError(f"unknown symbol family {kind!r}; choose from {FAMILIES}")


# --------------------------------------------------------------------------
# CSV tables


def load_symbol_csv(path, q: int, profiles: SProfile | Sequence[SProfile]) -> CylSymbol:
    """Read ``x_word,stub,term_index,re,im`` rows; absent entries are zero."""
    tables: dict[int, dict[tuple[Vertex, Stub], complex]] = {}
    depth = None
    radius = 0
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            x = parse_word(row["x_word"], q)
            w = parse_word(row["stub"], q)
            if depth is None:
                depth = len(w)
            elif len(w) != depth:
                raise ValueError("all stubs in a symbol table must have the same length")
            i = int(row["term_index"])
            tables.setdefault(i, {})[(x, w)] = complex(float(row["re"]), float(row["im"]))
            radius = max(radius, len(x))
    depth = depth or 0
    n_terms = max(tables, default=-1) + 1
    if isinstance(profiles, SProfile):
        profiles = [profiles] * n_terms
    if len(profiles) < n_terms:
        raise ValueError(f"{n_terms} terms in the table but {len(profiles)} profiles given")
    terms = tuple(
        Term(lambda x, w, tab=tables.get(i, {}): tab.get((x, w), 0j), profiles[i], depth)
        for i in range(n_terms)
    )
    return CylSymbol(q, depth, terms, radius, label=f"csv({path})")


def write_symbol_csv(a: CylSymbol, path, radius: int) -> None:
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["x_word", "stub", "term_index", "re", "im"])
        for x in ball((), radius, a.q):
            for w in stubs(a.depth, a.q):
                for i, v in enumerate(a.spatial_values(x, w)):
                    out.writerow([word_str(x), word_str(w), i, f"{v.real:.17g}", f"{v.imag:.17g}"])


# --------------------------------------------------------------------------
# class validation


@dataclass(frozen=True)
class SClassReport:
    """Empirical symbol-class constants on a test ball.

    ``omega_norms[N] = sup_x sup_n (1+n)**N ||(a - E^x_n a)(x, ., .)||_inf``;
    ``lipschitz[k]`` is the largest ``|d_s^k a(x) - d_s^k a(y)| / d(x, y)`` seen
    along a common boundary point; ``cross_constants[l][t]`` is the smallest
    ``C_l(t)`` with ``|(a - E^x_n a)(x) - (a - E^x_n a)(y)| <= eps C_l(t) (1+n)**-l``
    for ``d(x, y) = t``.
    """

    radius: int
    epsilon: float
    sup_norms: tuple[float, ...]
    omega_norms: tuple[float, ...]
    lipschitz: tuple[float, ...]
    cross_constants: dict[int, np.ndarray]
    exact_cylindrical: bool


def _sample(q: int, s) -> np.ndarray:
    if s is None:
        return np.linspace(0.0, math.pi / math.log(q), 65)
    return np.asarray(getattr(s, "nodes", s), dtype=float)


def _values(a: CylSymbol, x: Vertex, ws: Sequence[Stub], ptab: np.ndarray) -> np.ndarray:
    """``d_s^k a(x, w, s)`` with shape ``(len(ws), kmax + 1, len(s))``."""
    g = np.array([a.spatial_values(x, w) for w in ws], dtype=complex).reshape(len(ws), len(a.terms))
    return np.einsum("wt,tks->wks", g, ptab)


def _minus_block_means(v: np.ndarray, n: int, q: int) -> tuple[np.ndarray, bool]:
    """``v - E_n v`` for values on lex-ordered stubs; blocks share the first ``n`` letters."""
    total = v.shape[0]
    depth = 0
    while sphere_size(depth, q) < total:
        depth += 1
    size = extension_count(min(n, depth), depth, q)
    blocks = v.reshape(total // size, size, *v.shape[1:])
    const = np.all(blocks == blocks[:, :1], axis=1)
    dev = blocks - blocks.mean(axis=1, keepdims=True)
    dev = np.where(const[:, None], 0.0, dev)
    return dev.reshape(v.shape), bool(const.all())


def validate_class(a: CylSymbol, test_radius: int, epsilon_hint: float | None = None, s=None,
                   kmax: int = K_MAX, lmax: int = 3) -> SClassReport:
    """Exhaustive class constants of ``a`` over ``ball(o, test_radius)``."""
    if a.domain_radius is not None and test_radius > a.domain_radius:
        raise DomainError(f"test radius {test_radius} exceeds the domain radius {a.domain_radius}")
    q = a.q
    eps = 1.0 if not epsilon_hint else float(epsilon_hint)
    s = _sample(q, s)
    ptab = a.profile_table(s, kmax)
    verts = ball((), test_radius, q, cap=None)
    depth = max(a.stub_depth(x) for x in verts)
    nmax = depth + 2

    sup = np.zeros(kmax + 1)
    omega = np.zeros(K_MAX + 1)
    exact = True
    for x in verts:
        v = _values(a, x, stubs(nmax, q, cap=None), ptab)
        sup = np.maximum(sup, np.abs(v).max(axis=(0, 2)))
        for n in range(nmax + 1):
            dev, const = _minus_block_means(v[:, 0, :], n, q)
            if n >= a.stub_depth(x):
                exact = exact and const
            worst = float(np.abs(dev).max())
            omega = np.maximum(omega, (1.0 + n) ** np.arange(K_MAX + 1) * worst)

    lip = np.zeros(kmax + 1)
    diam = 2 * test_radius
    cross = {l: np.zeros(diam + 1) for l in range(lmax + 1)}
    for i, x in enumerate(verts):
        for y in verts[i + 1:]:
            g = path_word(x, y)
            d = len(g)
            ws = stubs(max(d + a.stub_depth(y), nmax), q, cap=None)
            vx = _values(a, x, ws, ptab)
            vy = _values(a, y, [transport_stub(g, w, a.stub_depth(y)) for w in ws], ptab)
            lip = np.maximum(lip, np.abs(vx - vy).max(axis=(0, 2)) / d)
            for n in range(nmax + 1):
                # E^x_n acts on both points through the cylinders at x
                dx, _ = _minus_block_means(vx[:, 0, :], n, q)
                dy, _ = _minus_block_means(vy[:, 0, :], n, q)
                worst = float(np.abs(dx - dy).max()) / eps
                for l in cross:
                    cross[l][d] = max(cross[l][d], (1.0 + n) ** l * worst)
    return SClassReport(test_radius, eps, tuple(map(float, sup)), tuple(map(float, omega)),
                        tuple(map(float, lip)), cross, exact)

"""The invariant suite behind ``treepdo verify``: one row per check."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator

import numpy as np

from .boundary import confluence_depth, cylinder_measure, e_partition, radon_nikodym
from .config import RunConfig
from .fourier import fh_forward, fh_inverse, plancherel_inner, symmetry_check
from .quantize import (
    compose_kernels,
    commutator_symbol,
    decay_profile,
    kernel_of_symbol,
    kernel_via_reference,
    laplacian_kernel,
    matrix_commutator,
)
from .spectral import build_grid, spherical_explicit, spherical_via_boundary
from .symbols import (
    builtin_family,
    constant_symbol,
    eigencurve_profile,
    FAMILIES,
    profile_symbol,
    shift_compose,
    transfer_L,
    validate_class,
)
from .tree import ball, distance, geodesic, sphere, sphere_size, stubs


@dataclass(frozen=True)
class CheckResult:
    name: str
    value: float
    tolerance: float
    passed: bool


def _row(name: str, value: float, tol: float) -> CheckResult:
    value = float(value)
    return CheckResult(name, value, tol, bool(np.isfinite(value) and value <= tol))


def _families(cfg: RunConfig):
    return [builtin_family(kind, cfg.q, cfg.eps, cfg.k, cfg.support) for kind in FAMILIES]


def _random_function(rng: np.random.Generator, verts) -> dict:
    vals = rng.standard_normal(len(verts)) + 1j * rng.standard_normal(len(verts))
    return dict(zip(verts, vals))


def tree_checks(cfg: RunConfig) -> Iterator[CheckResult]:
    q = cfg.q
    verts = ball((), 3, q)
    bad = 0
    for x in verts:
        for y in verts:
            d = distance(x, y)
            path = geodesic(x, y)
            bad += d != distance(y, x) or (d == 0) != (x == y) or len(path) != d + 1
            bad += any(distance(x, z) > d + distance(y, z) for z in verts)
    yield _row("tree: metric axioms and geodesics on ball(o,3)", bad, 0)
    bad = sum(len(sphere((), n, q)) != sphere_size(n, q) for n in range(6))
    bad += sum(len(stubs(n, q)) != sphere_size(n, q) for n in range(1, 7))
    yield _row("tree: sphere and cylinder counts, n <= 6", bad, 0)


def boundary_checks(cfg: RunConfig) -> Iterator[CheckResult]:
    q = cfg.q
    bad = 0
    for n in range(6):
        bad += cylinder_measure(n, q) != sum(cylinder_measure(n + 1, q) for _ in range(q if n else q + 1))
    yield _row("boundary: refinement additivity (exact)", bad, 0)
    bad = 0
    for x in ball((), 4, q):
        masses = e_partition(x, q).masses
        brute = [Fraction(0)] * (len(x) + 1)
        for w in stubs(len(x), q):
            brute[confluence_depth((), x, w) if x else 0] += cylinder_measure(len(x), q)
        bad += sum(masses) != 1 or list(masses) != brute
    yield _row("boundary: E-partition masses vs brute force (exact)", bad, 0)
    bad = 0
    for y in ball((), 3, q):
        depth = len(y)
        total = sum(cylinder_measure(depth, q) * radon_nikodym((), y, w, q) for w in stubs(depth, q))
        bad += total != 1
    yield _row("boundary: Radon-Nikodym total mass 1 (exact)", bad, 0)


def spectral_checks(cfg: RunConfig, grid) -> Iterator[CheckResult]:
    q = cfg.q
    yield _row("spectral: |M_0 - 1|", abs(grid.moment(0) - 1), 1e-12)
    worst = 0.0
    for d in range(1, 7):
        masses = e_partition((0,) * d, q).masses
        val = sum(float(m) * q ** (j - d / 2) * grid.moment(2 * j - d) for j, m in enumerate(masses))
        worst = max(worst, abs(val))
    yield _row("spectral: moment annihilation d <= 6", worst, 1e-10)
    s = np.linspace(0, grid.tau, 64)
    worst = max(abs(spherical_explicit(t, d, q) - spherical_via_boundary(t, (0,) * d, q))
                for t in s for d in range(7))
    yield _row("spectral: spherical explicit vs boundary", worst, 1e-10)


def fourier_checks(cfg: RunConfig, grid) -> Iterator[CheckResult]:
    rng = np.random.default_rng(cfg.seed)
    verts = ball((), min(cfg.radius, 4), cfg.q)
    round_err = inner_err = sym_err = 0.0
    for _ in range(3):
        f = _random_function(rng, verts)
        g = _random_function(rng, verts)
        F = fh_forward(f, grid)
        round_err = max(round_err, max(abs(fh_inverse(F, grid, x) - f[x]) for x in verts))
        direct = sum(f[x] * np.conj(g[x]) for x in verts)
        inner_err = max(inner_err, abs(plancherel_inner(f, g, grid) - direct))
        sym_err = max(sym_err, max(symmetry_check(F, grid, x) for x in verts[:10]))
    yield _row("fourier: roundtrip", round_err, 1e-8)
    yield _row("fourier: Plancherel inner product", inner_err, 1e-8)
    yield _row("fourier: symmetry condition", sym_err, 1e-8)


def quantize_checks(cfg: RunConfig, grid) -> Iterator[CheckResult]:
    q, R = cfg.q, cfg.radius
    K1 = kernel_of_symbol(constant_symbol(q), R, grid)
    yield _row("quantize: ||Op(1) - I||_max", np.abs(K1.matrix - np.eye(K1.size)).max(), 1e-10)
    KL = kernel_of_symbol(profile_symbol(q, eigencurve_profile(q)), R, grid)
    yield _row("quantize: ||Op(lambda) - Delta||_max",
               np.abs(KL.matrix - laplacian_kernel(q, R).matrix).max(), 1e-10)
    small = min(R, 3 if q == 2 else 2)
    lap = laplacian_kernel(q, R)
    for a in _families(cfg):
        Kg = kernel_of_symbol(a, small, grid)
        Kn = kernel_of_symbol(a, small, grid, method="naive")
        yield _row(f"quantize: grouped vs naive, {a.label}", np.abs(Kg.matrix - Kn.matrix).max(), 1e-12)
        Kr = kernel_via_reference(a, small, grid, (0,))
        yield _row(f"quantize: reference-point move, {a.label}", np.abs(Kg.matrix - Kr.matrix).max(), 1e-12)
        Ka = kernel_of_symbol(a, R, grid)
        comm = matrix_commutator(lap, Ka, R - 1)
        Kc = kernel_of_symbol(commutator_symbol(a), R - 1, grid)
        yield _row(f"quantize: commutator identity, {a.label}", np.abs(comm.matrix - Kc.matrix).max(), 1e-10)
        c4 = decay_profile(Ka).constants[4]
        yield _row(f"quantize: fitted C_4 finite, {a.label}", c4, math.inf)
    if R >= 2:
        sq, _ = compose_kernels(lap, lap, 1)
        dist = sq.distances()
        expect = np.where(dist == 0, 1 / (q + 1), np.where(dist == 2, 1 / (q + 1) ** 2, 0.0))
        yield _row("quantize: Delta^2 vs path count", np.abs(sq.matrix - expect).max(), 1e-15)


def symbol_checks(cfg: RunConfig, grid) -> Iterator[CheckResult]:
    q = cfg.q
    radius = 2
    for a in _families(cfg):
        back = transfer_L(shift_compose(a))
        worst = 0.0
        for x in ball((), radius, q):
            for w in stubs(back.depth + 1, q):
                worst = max(worst, np.abs(back.value(x, w, grid.nodes[::16]) - a.value(x, w, grid.nodes[::16])).max())
        yield _row(f"symbols: L(a o sigma) = a, {a.label}", worst, 1e-15)
        rep = validate_class(a, radius, cfg.eps)
        rep_s = validate_class(shift_compose(a), radius, cfg.eps)
        rep_l = validate_class(transfer_L(a), radius, cfg.eps)
        yield _row(f"symbols: Lip(a o sigma) - Lip(a), {a.label}", rep_s.lipschitz[0] - rep.lipschitz[0], 1e-12)
        yield _row(f"symbols: Lip(La) - 3 Lip(a), {a.label}", rep_l.lipschitz[0] - 3 * rep.lipschitz[0], 1e-12)
        yield _row(f"symbols: exact cylinder constancy, {a.label}", 0.0 if rep.exact_cylindrical else 1.0, 0.0)


SUITES: tuple[Callable, ...] = (tree_checks, boundary_checks)
GRID_SUITES: tuple[Callable, ...] = (spectral_checks, fourier_checks, quantize_checks, symbol_checks)


def run_verify(cfg: RunConfig) -> list[CheckResult]:
    grid = build_grid(cfg.q, cfg.snodes)
    rows: list[CheckResult] = []
    for suite in SUITES:
        rows.extend(suite(cfg))
    for suite in GRID_SUITES:
        rows.extend(suite(cfg, grid))
    return rows


def format_report(rows: list[CheckResult]) -> str:
    width = max(len(r.name) for r in rows)
    lines = [f"{'check':<{width}}  {'measured':>12}  {'tolerance':>10}  result"]
    for r in rows:
        lines.append(f"{r.name:<{width}}  {r.value:>12.3e}  {r.tolerance:>10.1e}  {'PASS' if r.passed else 'FAIL'}")
    n_fail = sum(not r.passed for r in rows)
    lines.append(f"{len(rows) - n_fail}/{len(rows)} checks passed")
    return "\n".join(lines)

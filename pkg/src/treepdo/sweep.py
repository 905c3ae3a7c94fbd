"""Semiclassical sweep: adjoint and product remainders as the parameter shrinks.

For each ``eps`` the symbols are rebuilt, kernels assembled on ``ball(o, R)``
and the remainders measured on the certified inner ball ``R - T``:

* adjoint:  ``Op(a)* - Op(conj a)`` with ``a`` the configured family;
* product:  ``Op(eta) Op(a) - Op(eta a)`` with ``eta`` the bump profile.

``R``, the grid and ``T`` are fixed across the sweep so that rows compare.
"""
from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass

from .config import InvalidValueError, RunConfig
from .quantize import (
    adjoint_kernel,
    compose_kernels,
    kernel_of_symbol,
    negligibility_report,
    opnorm_estimate,
)
from .spectral import build_grid
from .symbols import bump_profile_only, builtin_family, multiply

N_CONSTANTS = 4


@dataclass(frozen=True)
class SweepRow:
    epsilon: float
    adjoint_norm: float
    product_norm: float
    adjoint_constants: tuple[float, ...]
    product_constants: tuple[float, ...]
    product_tail: float
    seconds: float


def run_sweep(cfg: RunConfig) -> list[SweepRow]:
    grid = build_grid(cfg.q, cfg.snodes)
    R, T = cfg.radius, cfg.tail
    if T >= R:
        raise InvalidValueError(f"invalid value for tail: {T} (the sweep needs tail < radius = {R})")
    inner = R - T
    left = bump_profile_only(cfg.q)
    K_left = kernel_of_symbol(left, R, grid)
    rows = []
    for eps in cfg.epsilons:
        start = time.perf_counter()
        a = builtin_family(cfg.family, cfg.q, eps, cfg.k, cfg.support)
        Ka = kernel_of_symbol(a, R, grid)
        adj = (adjoint_kernel(Ka) - kernel_of_symbol(a.conj(), R, grid)).restrict(inner)
        prod, tail = compose_kernels(K_left, Ka, T)
        rem = prod - kernel_of_symbol(multiply(left, a), inner, grid)
        rows.append(SweepRow(
            eps,
            opnorm_estimate(adj, seed=cfg.seed).norm,
            opnorm_estimate(rem, seed=cfg.seed).norm,
            tuple(negligibility_report(adj, eps)[n] for n in range(N_CONSTANTS)),
            tuple(negligibility_report(rem, eps)[n] for n in range(N_CONSTANTS)),
            tail.bound,
            time.perf_counter() - start,
        ))
    return rows


def sweep_csv(rows: list[SweepRow], timings: bool = False) -> str:
    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    header = ["epsilon", "adjoint_norm", "product_norm"]
    header += [f"adjoint_C{n}" for n in range(N_CONSTANTS)]
    header += [f"product_C{n}" for n in range(N_CONSTANTS)]
    header += ["product_tail_bound"] + (["seconds"] if timings else [])
    out.writerow(header)
    for r in rows:
        vals = [r.epsilon, r.adjoint_norm, r.product_norm, *r.adjoint_constants,
                *r.product_constants, r.product_tail] + ([r.seconds] if timings else [])
        out.writerow([f"{v:.17g}" for v in vals])
    return buf.getvalue()

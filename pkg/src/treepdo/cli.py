"""Command-line front end: ``verify``, ``sweep``, ``kernel`` and ``transform``."""
from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, RunConfig, parse_config
from .fourier import fh_forward
from .quantize import kernel_of_symbol
from .spectral import build_grid
from .sweep import run_sweep, sweep_csv
from .symbols import FAMILIES, builtin_family
from .tree import CapExceeded, parse_word, word_str
from .verify import format_report, run_verify

ROOT_LABEL = "o"


def label(word) -> str:
    return word_str(word) or ROOT_LABEL


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value file; flags override it")
    p.add_argument("--q", type=str)
    p.add_argument("--radius", type=str)
    p.add_argument("--snodes", type=str)
    p.add_argument("--tail", type=str)
    p.add_argument("--family", type=str, help=f"one of {', '.join(FAMILIES)}")
    p.add_argument("--eps", type=str)
    p.add_argument("--k", type=str)
    p.add_argument("--support", type=str, help="support radius of the cutoff")
    p.add_argument("--epsilons", type=str, help="comma separated, strictly decreasing")
    p.add_argument("--seed", type=str)
    p.add_argument("--output-dir", dest="output_dir", type=str)
    p.add_argument("--max-vertices", dest="max_vertices", type=str)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="treepdo", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("verify", help="run the invariant suite")
    _common(p)
    p.add_argument("--out", help="also write the report to this file")
    p = sub.add_parser("sweep", help="adjoint and product remainders across epsilons")
    _common(p)
    p.add_argument("--out", default="sweep.csv")
    p.add_argument("--timings", action="store_true", help="add a (non-deterministic) seconds column")
    p = sub.add_parser("kernel", help="write the kernel of a built-in symbol")
    _common(p)
    p.add_argument("--out", default="kernel.csv")
    p.add_argument("--method", choices=("grouped", "naive"), default="grouped")
    p = sub.add_parser("transform", help="Fourier-Helgason transform of a CSV function")
    _common(p)
    p.add_argument("--input", required=True, help="CSV lines vertex_word,re,im")
    p.add_argument("--depth", type=int, default=None)
    p.add_argument("--out", default="transform.csv")
    return parser


_KEYS = [name for name in RunConfig.__dataclass_fields__]


def config_from_args(args: argparse.Namespace) -> RunConfig:
    overrides = {key: getattr(args, key, None) for key in _KEYS}
    return parse_config(overrides, args.config)


def _out_path(cfg: RunConfig, name: str) -> Path:
    path = Path(name)
    if not path.is_absolute():
        path = Path(cfg.output_dir) / path
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def cmd_verify(cfg: RunConfig, args) -> int:
    rows = run_verify(cfg)
    report = format_report(rows)
    print(report)
    if args.out:
        _out_path(cfg, args.out).write_text(report + "\n")
    return 0 if all(r.passed for r in rows) else 1


def cmd_sweep(cfg: RunConfig, args) -> int:
    text = sweep_csv(run_sweep(cfg), timings=args.timings)
    path = _out_path(cfg, args.out)
    path.write_text(text)
    print(text, end="")
    return 0


def cmd_kernel(cfg: RunConfig, args) -> int:
    grid = build_grid(cfg.q, cfg.snodes)
    a = builtin_family(cfg.family, cfg.q, cfg.eps, cfg.k, cfg.support)
    K = kernel_of_symbol(a, cfg.radius, grid, method=args.method, cap=cfg.max_vertices)
    dist = K.distances()
    path = _out_path(cfg, args.out)
    with open(path, "w", newline="") as fh:
        fh.write(f"# q={cfg.q} radius={cfg.radius} snodes={cfg.snodes} family={cfg.family} "
                 f"eps={cfg.eps:.17g} k={cfg.k} support={cfg.support:.17g} symbol={a.label} "
                 f"method={args.method}\n")
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["x_word", "y_word", "d", "re", "im"])
        for i, x in enumerate(K.vertices):
            for j, y in enumerate(K.vertices):
                v = K.matrix[i, j]
                out.writerow([label(x), label(y), int(dist[i, j]), f"{v.real:.17g}", f"{v.imag:.17g}"])
    print(f"wrote {K.size}x{K.size} kernel to {path}")
    return 0


def read_function_csv(path, q: int) -> dict:
    f: dict = {}
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].lstrip().startswith("#"):
                continue
            try:
                re_, im_ = float(row[1]), float(row[2]) if len(row) > 2 else 0.0
            except ValueError:
                continue  # header line
            x = parse_word(row[0], q)
            f[x] = f.get(x, 0) + complex(re_, im_)
    return f


def cmd_transform(cfg: RunConfig, args) -> int:
    grid = build_grid(cfg.q, cfg.snodes)
    f = read_function_csv(args.input, cfg.q)
    F = fh_forward(f, grid, args.depth)
    path = _out_path(cfg, args.out)
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["stub", "node_index", "s", "re", "im"])
        for w, row in zip(F.stubs, F.table):
            for k, (s, v) in enumerate(zip(grid.nodes, row)):
                out.writerow([label(w), k, f"{s:.17g}", f"{v.real:.17g}", f"{v.imag:.17g}"])
    print(f"wrote {len(F.stubs)} stubs x {grid.size} nodes to {path}")
    return 0


COMMANDS = {"verify": cmd_verify, "sweep": cmd_sweep, "kernel": cmd_kernel, "transform": cmd_transform}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        return COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"treepdo: {exc}", file=sys.stderr)
        return exc.exit_code
    except CapExceeded as exc:
        print(f"treepdo: cap exceeded: {exc}", file=sys.stderr)
        return 5


if __name__ == "__main__":
    sys.exit(main())

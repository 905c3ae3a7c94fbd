"""Adjoint and product remainders as the semiclassical parameter shrinks."""
from treepdo.config import parse_config
from treepdo.sweep import run_sweep

cfg = parse_config({"radius": "5", "tail": "3", "family": "shifted_k"})
print(f"{'eps':>6} {'adjoint':>11} {'/eps':>9} {'product':>11} {'/eps':>9}")
for row in run_sweep(cfg):
    e = row.epsilon
    print(f"{e:6.3f} {row.adjoint_norm:11.4e} {row.adjoint_norm / e:9.5f} "
          f"{row.product_norm:11.4e} {row.product_norm / e:9.6f}")

import numpy as np
import pytest

from treepdo.spectral import build_grid
from treepdo.symbols import (
    CylSymbol,
    Term,
    bump_profile,
    constant_profile,
    eigencurve_profile,
    exp_profile,
)


@pytest.fixture(scope="session")
def grids():
    cache = {}

    def get(q, n=256):
        if (q, n) not in cache:
            cache[q, n] = build_grid(q, n)
        return cache[q, n]

    return get


def _table_value(seed, x, w):
    rng = np.random.default_rng([seed, *x, 9, *w, 9, len(x)])
    return complex(rng.standard_normal(), rng.standard_normal())


def random_symbol(q, depth, seed=0, n_terms=2, label=None):
    """Deterministic pseudo-random cylindrical symbol with mixed profiles."""
    profiles = [bump_profile(q), constant_profile(1.0), eigencurve_profile(q), exp_profile(q, 1)]
    terms = tuple(
        Term(lambda x, w, s=seed * 31 + i: _table_value(s, x, w), profiles[i % len(profiles)], depth)
        for i in range(n_terms)
    )
    return CylSymbol(q, depth, terms, label=label or f"random(m={depth},seed={seed})")

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from treepdo.boundary import e_partition
from treepdo.spectral import (
    build_grid,
    c_abs_inv_sq,
    c_function,
    laplacian_eigencurve,
    plancherel_density,
    spherical_explicit,
    spherical_via_boundary,
)
from treepdo.tree import TreeParams


@pytest.mark.parametrize("q", [2, 3, 5])
def test_c_abs_inv_sq_examples(q):
    tau = math.pi / math.log(q)
    assert c_abs_inv_sq(0.0, q) == pytest.approx(0.0, abs=1e-15)
    assert c_abs_inv_sq(tau / 2, q) == pytest.approx(4.0, rel=1e-14)
    assert c_abs_inv_sq(tau, q) == pytest.approx(0.0, abs=1e-14)
    assert c_abs_inv_sq(tau / 2, TreeParams(q)) == pytest.approx(4.0, rel=1e-14)


@given(st.floats(0.01, 0.99), st.sampled_from([2, 3, 4]))
def test_c_function_modulus(u, q):
    s = u * math.pi / math.log(q)
    c = complex(c_function(s, q))
    assert abs(c) ** 2 * c_abs_inv_sq(s, q) == pytest.approx(1.0, rel=1e-12)


def test_density_integrates_to_one():
    from scipy.integrate import quad

    for q in (2, 3):
        total, _ = quad(lambda s: plancherel_density(s, q), 0, math.pi / math.log(q))
        assert total == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("q", [2, 3])
def test_grid_moments(q, grids):
    g = grids(q)
    assert abs(g.moment(0) - 1) <= 1e-12
    nb = (q / (q + 1)) * q**-0.5 * g.moment(-1) + (1 / (q + 1)) * q**0.5 * g.moment(1)
    assert abs(nb) <= 1e-12
    assert g.moment(-3) == g.moment(3).conjugate()
    assert np.all(np.diff(g.nodes) > 0) and np.all(g.weights > 0)
    assert 0 < g.nodes[0] and g.nodes[-1] < g.tau


@pytest.mark.parametrize("q", [2, 3])
def test_quadrature_convergence(q):
    errs = [abs(build_grid(q, n).moment(0) - 1) for n in (32, 64, 128, 256, 512)]
    for a, b in zip(errs, errs[1:]):
        assert b <= a + 1e-14


@pytest.mark.parametrize("q", [2, 3])
def test_moment_annihilation(q, grids):
    g = grids(q)
    for d in range(1, 7):
        masses = e_partition((0,) * d, q).masses
        val = sum(float(m) * q ** (j - d / 2) * g.moment(2 * j - d) for j, m in enumerate(masses))
        assert abs(val) <= 1e-10


def test_small_grid_rejected():
    with pytest.raises(ValueError):
        build_grid(2, 4)


def test_spherical_examples():
    for q in (2, 3):
        tau = math.pi / math.log(q)
        assert spherical_explicit(0.7, 0, q) == pytest.approx(1.0)
        assert spherical_explicit(0.0, 1, q) == pytest.approx(2 * math.sqrt(q) / (q + 1), rel=1e-14)
        assert spherical_explicit(tau, 1, q) == pytest.approx(-2 * math.sqrt(q) / (q + 1), rel=1e-14)
    assert spherical_via_boundary(0.3, (), 2) == pytest.approx(1.0)
    direct = (2 / 3) * 2**-0.5 + (1 / 3) * 2**0.5
    assert spherical_via_boundary(0.0, (0,), 2) == pytest.approx(direct, rel=1e-15)


@pytest.mark.parametrize("q", [2, 3])
def test_spherical_cross_validation(q):
    tau = math.pi / math.log(q)
    worst = max(abs(spherical_explicit(s, d, q) - spherical_via_boundary(s, tuple(i % 2 for i in range(d)), q))
                for s in np.linspace(0, tau, 64) for d in range(7))
    assert worst <= 1e-10


@pytest.mark.parametrize("q", [2, 3])
def test_spherical_continuous_at_lattice(q):
    tau = math.pi / math.log(q)
    for d in range(5):
        for s0 in (0.0, tau):
            near = s0 + (1e-6 if s0 == 0 else -1e-6)
            assert spherical_explicit(near, d, q) == pytest.approx(spherical_explicit(s0, d, q), abs=1e-9)


@given(st.floats(0, 1), st.sampled_from([2, 3, 7]))
def test_eigencurve_complex_form(u, q):
    s = u * math.pi / math.log(q)
    z = (q ** (0.5 + 1j * s) + q ** (0.5 - 1j * s)) / (q + 1)
    assert abs(laplacian_eigencurve(s, q) - z) <= 1e-14


def test_eigencurve_examples():
    q = 2
    tau = math.pi / math.log(q)
    top = 2 * math.sqrt(q) / (q + 1)
    assert laplacian_eigencurve(0.0, q) == pytest.approx(top)
    assert laplacian_eigencurve(tau / 2, q) == pytest.approx(0.0, abs=1e-15)
    assert laplacian_eigencurve(tau, q) == pytest.approx(-top)


def test_spherical_is_laplacian_eigenfunction():
    # (Delta phi)(o) = phi at radius 1 equals lambda(s) phi(o)
    q = 3
    for s in np.linspace(0, math.pi / math.log(q), 9):
        assert spherical_explicit(s, 1, q) == pytest.approx(laplacian_eigencurve(s, q), abs=1e-13)
        for d in range(1, 5):
            lhs = (spherical_explicit(s, d - 1, q) + q * spherical_explicit(s, d + 1, q)) / (q + 1)
            assert lhs == pytest.approx(laplacian_eigencurve(s, q) * spherical_explicit(s, d, q), abs=1e-13)

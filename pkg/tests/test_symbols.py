import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_symbol
from treepdo.symbols import (
    FAMILIES,
    K_MAX,
    DomainError,
    average_En,
    builtin_family,
    bump_profile,
    constant_profile,
    constant_symbol,
    cutoff,
    cylinder_symbol,
    eigencurve_profile,
    exp_profile,
    load_symbol_csv,
    multiply,
    named_profile,
    profile_symbol,
    shift_compose,
    spatial_symbol,
    transfer_L,
    validate_class,
    write_symbol_csv,
)
from treepdo.tree import ball, step, stubs


def tau(q):
    return math.pi / math.log(q)


def points(q, radius, depth, n, seed):
    """``n`` random (x, w, s) triples with ``|x| <= radius`` and stubs of length ``depth``."""
    rng = np.random.default_rng(seed)
    verts = ball((), radius, q)
    ws = stubs(depth, q)
    for _ in range(n):
        yield (verts[rng.integers(len(verts))], ws[rng.integers(len(ws))], rng.uniform(0, tau(q)))


# profiles


@pytest.mark.parametrize("make", [bump_profile, eigencurve_profile, lambda q: exp_profile(q, -1),
                                  lambda q: bump_profile(q) * eigencurve_profile(q)])
def test_profile_derivatives_match_finite_differences(make):
    q = 3
    p = make(q)
    s = np.linspace(0.3, tau(q) - 0.3, 9)
    h = 1e-5
    for k in range(K_MAX):
        fd = (p(s + h, k) - p(s - h, k)) / (2 * h)
        scale = max(1.0, np.abs(p(s, k + 1)).max())
        assert np.abs(fd - p(s, k + 1)).max() <= 1e-5 * scale


@pytest.mark.parametrize("q", [2, 3])
def test_bump_endpoint_flat(q):
    p = bump_profile(q)
    assert p.endpoint_flat
    d = p.derivatives(np.array([0.0, tau(q)]))
    assert np.abs(d).max() <= 1e-12
    mid = p.derivatives(np.array([tau(q) / 2]))
    assert abs(mid[0, 0] - math.exp(-4)) <= 1e-15


def test_profile_errors():
    with pytest.raises(ValueError):
        bump_profile(2).derivatives(0.5, K_MAX + 1)
    with pytest.raises(ValueError):
        named_profile("nope", 2)
    assert named_profile("one", 2)(1.0) == 1


def test_eigencurve_values():
    q = 2
    p = eigencurve_profile(q)
    assert abs(p(0.0) - 2 * math.sqrt(2) / 3) <= 1e-15
    assert abs(p(tau(q) / 2)) <= 1e-15


@given(st.floats(0, 5), st.floats(0, 5))
def test_cutoff_is_one_lipschitz(t1, t2):
    assert abs(cutoff(t1) - cutoff(t2)) <= abs(t1 - t2) + 1e-15


def test_cutoff_values():
    # the transition has width 2 so that the slope stays below 1
    assert cutoff(0.0) == 0.5
    assert cutoff(1.0) == 0.0
    assert cutoff(-1.0) == 1.0
    assert np.all(np.diff(cutoff(np.linspace(-1, 1, 50))) <= 0)
    assert cutoff(3.0) == 0.0


# evaluation


def test_constant_symbol_evaluates_to_constant():
    a = constant_symbol(2, 2.5 - 1j)
    for x, w, s in points(2, 3, 2, 20, 0):
        assert a.value(x, w, s) == 2.5 - 1j


def test_separable_derivative():
    q = 2
    p = bump_profile(q)
    a = spatial_symbol(q, lambda x: len(x) + 1, p)
    for x, w, s in points(q, 3, 0, 10, 1):
        assert abs(a.derivative(x, w, s, 1) - (len(x) + 1) * p(s, 1)) <= 1e-15


def test_sum_is_linear():
    a, b = random_symbol(2, 2, seed=1), random_symbol(2, 1, seed=2)
    c = a + b
    assert c.depth == 2
    for x, w, s in points(2, 3, 2, 20, 2):
        assert abs(c.value(x, w, s) - a.value(x, w, s) - b.value(x, w, s)) <= 1e-13


def test_evaluation_errors():
    a = cylinder_symbol(2, 2, lambda x, w: 1.0)
    with pytest.raises(ValueError):
        a.value((), (0,), 0.1)
    with pytest.raises(ValueError):
        a.value((), (0, 1), 0.1, K_MAX + 1)
    assert shift_compose(spatial_symbol(2, lambda x: 1.0)).domain_radius is None
    bounded = spatial_symbol(2, lambda x: 1.0)
    bounded = replace(bounded, domain_radius=1)
    with pytest.raises(DomainError):
        bounded.value((0, 1), (), 0.1)
    with pytest.raises(DomainError):
        shift_compose(shift_compose(bounded))


# products


def test_multiply_by_one():
    a = random_symbol(2, 2, seed=3)
    b = multiply(a, constant_symbol(2))
    for x, w, s in points(2, 3, 2, 20, 3):
        assert abs(b.value(x, w, s) - a.value(x, w, s)) <= 1e-15


@pytest.mark.parametrize("q", [2, 3])
def test_multiply_pointwise(q):
    a, b = random_symbol(q, 1, seed=4), random_symbol(q, 3, seed=5, n_terms=3)
    ab = a * b
    assert ab.depth == 3
    for x, w, s in points(q, 3, 3, 100, 4):
        for k in range(3):
            expect = sum(math.comb(k, i) * a.value(x, w, s, i) * b.value(x, w, s, k - i) for i in range(k + 1))
            assert abs(ab.value(x, w, s, k) - expect) <= 1e-12 * max(1, abs(expect))


# shift and transfer


def test_shift_of_constant():
    a = shift_compose(constant_symbol(2, 3.0))
    assert a.depth == 1
    for x, w, s in points(2, 3, 1, 10, 5):
        assert a.value(x, w, s) == 3.0


def test_shift_of_root_indicator():
    q = 2
    a = shift_compose(spatial_symbol(q, lambda x: 1.0 if x == () else 0.0))
    for x in ball((), 3, q):
        for w in stubs(1, q):
            hit = a.value(x, w, 0.5) != 0
            assert hit == (len(x) == 1 and w[0] == x[0])


def test_shift_depth_increases():
    a = random_symbol(3, 2, seed=6)
    assert shift_compose(a).depth == 3
    assert shift_compose(shift_compose(a)).depth == 4


def test_transfer_of_constant():
    a = transfer_L(constant_symbol(3, 2.0))
    assert a.depth == 1
    for x, w, s in points(3, 3, 1, 10, 7):
        assert abs(a.value(x, w, s) - 2.0) <= 1e-15


def test_transfer_q2_example():
    # a(x) = |x|: from o with w = (0,), the preimages are (1,) and (2,)
    a = transfer_L(spatial_symbol(2, lambda x: len(x)))
    assert a.value((), (0,), 0.0) == 1.0
    # from (0,) towards o the preimages are (0,1) and (0,2): average 2
    assert a.value((0,), (0,), 0.0) == 2.0
    # from (0,) away from o one preimage is o itself: (0 + 2) / 2
    assert a.value((0,), (1,), 0.0) == 1.0
    f = {(): 0.0, (1,): 1.0, (2,): 2.0, (0,): 4.0}
    b = transfer_L(spatial_symbol(2, lambda x: f.get(x, 0.0)))
    assert abs(b.value((), (0,), 0.0) - 1.5) <= 1e-15
    assert abs(b.value((), (1,), 0.0) - 3.0) <= 1e-15


@pytest.mark.parametrize("q", [2, 3])
def test_transfer_inverts_shift(q):
    for depth in (0, 1, 2):
        a = random_symbol(q, depth, seed=10 + depth)
        back = transfer_L(shift_compose(a))
        m = max(depth, 1)
        for x, w, s in points(q, 3, m, 100, depth):
            assert abs(back.value(x, w, s) - a.value(x, w, s)) <= 1e-15


def test_transfer_manual():
    # edges carry one colour seen from both ends, so the stub from x c back through x is (c,) + w
    q = 3
    a = random_symbol(q, 2, seed=12)
    La = transfer_L(a)
    for x, w, s in points(q, 2, 2, 30, 8):
        total = sum(a.value(step(x, c), ((c,) + w)[:2], s) for c in range(q + 1) if c != w[0])
        assert abs(La.value(x, w, s) - total / q) <= 1e-13


# averaging


def test_average_projection_and_contraction():
    q = 2
    a = random_symbol(q, 3, seed=13)
    s = np.linspace(0, tau(q), 7)
    for n in range(4):
        e = average_En(a, n)
        ee = average_En(e, n)
        assert e.depth == n
        for x, w, _ in points(q, 2, 3, 20, n):
            assert np.abs(ee.value(x, w, s) - e.value(x, w, s)).max() <= 1e-15
    sup_a = max(np.abs(a.value(x, w, s)).max() for x in ball((), 2, q) for w in stubs(3, q))
    e1 = average_En(a, 1)
    sup_e = max(np.abs(e1.value(x, w, s)).max() for x in ball((), 2, q) for w in stubs(3, q))
    assert sup_e <= sup_a + 1e-15
    assert average_En(a, 5).terms == a.terms


def test_average_fixed_base_matches_local():
    q = 3
    a = random_symbol(q, 2, seed=14)
    s = np.array([0.4, 1.7])
    for x in ball((), 2, q)[::4]:
        for n in range(3):
            e_loc = average_En(a, n)
            e_base = average_En(a, n, base=x)
            for w in stubs(2, q):
                assert np.abs(e_loc.value(x, w, s) - e_base.value(x, w, s)).max() <= 1e-14


def test_average_fixed_base_is_idempotent():
    q = 2
    a = random_symbol(q, 1, seed=15)
    s = np.array([0.9])
    for n in (0, 1, 2):
        e = average_En(a, n, base=())
        ee = average_En(e, n, base=())
        for x in ball((), 2, q):
            for w in stubs(e.stub_depth(x), q):
                assert np.abs(ee.value(x, w, s) - e.value(x, w, s)).max() <= 1e-15


def test_average_of_cylinder_indicator():
    # E_0 of the indicator of one depth-1 cylinder at o is its measure 1/(q+1)
    q = 2
    a = cylinder_symbol(q, 1, lambda x, w: 1.0 if w == (0,) else 0.0)
    assert abs(average_En(a, 0).value((), (), 0.0) - 1 / 3) <= 1e-15
    assert abs(average_En(a, 0, base=()).value((), (), 0.0) - 1 / 3) <= 1e-15


@pytest.mark.parametrize("n", range(5))
def test_product_averaging_bound(n):
    q = 2
    a, b = random_symbol(q, 3, seed=16), random_symbol(q, 4, seed=17)
    ea, eb, eab = average_En(a, n), average_En(b, n), average_En(a * b, n)
    s = np.linspace(0, tau(q), 5)
    for x in ball((), 1, q):
        ws = stubs(4, q)
        sup_a = max(np.abs(a.value(x, w, s)).max() for w in ws)
        sup_dev = max(np.abs(eb.value(x, w, s) - b.value(x, w, s)).max() for w in ws)
        gap = max(np.abs(ea.value(x, w, s) * eb.value(x, w, s) - eab.value(x, w, s)).max() for w in ws)
        assert gap <= sup_a * sup_dev + 1e-12


def test_average_negative_n_is_zero():
    a = random_symbol(2, 1, seed=18)
    assert average_En(a, -1).value((), (0,), 0.3) == 0


# validation


def test_validate_cylindrical_vanishing():
    q = 2
    for m in (0, 1, 2):
        a = random_symbol(q, m, seed=20 + m)
        rep = validate_class(a, 1)
        assert rep.exact_cylindrical
        assert all(np.isfinite(v) for v in rep.sup_norms + rep.omega_norms + rep.lipschitz)
        if m == 0:
            assert rep.omega_norms[0] == 0


def test_validate_x_independent():
    rep = validate_class(profile_symbol(2, bump_profile(2)), 2)
    assert rep.lipschitz == (0.0,) * (K_MAX + 1)
    assert rep.omega_norms[4] == 0
    assert abs(rep.sup_norms[0] - math.exp(-4)) <= 1e-12


@pytest.mark.parametrize("eps", [0.4, 0.1])
def test_validate_radial_eps_lipschitz(eps):
    q = 2
    a = builtin_family("radial_eps", q, eps)
    rep = validate_class(a, 3, eps)
    assert rep.lipschitz[0] <= math.exp(-4) * eps * (1 + 1e-9)
    assert rep.lipschitz[0] > 0


def test_builtin_families():
    q = 2
    bump = builtin_family("bump_profile_only", q)
    assert bump.depth == 0
    assert validate_class(bump, 2).lipschitz[0] == 0
    assert builtin_family("shifted_k", q, 0.1, k=2).depth == 2
    a = builtin_family("radial_eps", q, 0.2)
    ends = np.array([0.0, tau(q)])
    for x in ball((), 2, q):
        for k in range(K_MAX + 1):
            assert np.abs(a.value(x, (), ends, k)).max() <= 1e-12
    with pytest.raises(ValueError):
        builtin_family("nope", q)
    assert len(FAMILIES) == 3


def test_closure_under_product():
    q = 2
    eps = 0.2
    a = builtin_family("radial_eps", q, eps)
    b = builtin_family("shifted_k", q, eps, k=1)
    ra, rb, rab = (validate_class(c, 2, eps) for c in (a, b, a * b))
    assert all(np.isfinite(v) for v in rab.sup_norms + rab.omega_norms)
    bound = ra.sup_norms[0] * rb.lipschitz[0] + rb.sup_norms[0] * ra.lipschitz[0]
    assert rab.lipschitz[0] <= bound + 1e-10


@pytest.mark.parametrize("kind", FAMILIES)
def test_closure_under_shift_and_transfer(kind):
    q = 2
    a = builtin_family(kind, q, 0.3, k=1)
    rep = validate_class(a, 2)
    rs = validate_class(shift_compose(a), 2)
    rl = validate_class(transfer_L(a), 2)
    assert rs.lipschitz[0] <= rep.lipschitz[0] + 1e-12
    assert rl.lipschitz[0] <= 3 * rep.lipschitz[0] + 1e-12
    assert rs.exact_cylindrical and rl.exact_cylindrical


def test_validate_domain_error():
    a = replace(constant_symbol(2), domain_radius=1)
    with pytest.raises(DomainError):
        validate_class(a, 2)


# CSV


def test_symbol_csv_roundtrip(tmp_path):
    q = 2
    a = random_symbol(q, 2, seed=30, n_terms=2)
    path = tmp_path / "sym.csv"
    write_symbol_csv(a, path, 2)
    profiles = [t.profile for t in a.terms]
    b = load_symbol_csv(path, q, profiles)
    assert b.depth == 2 and b.domain_radius == 2
    for x, w, s in points(q, 2, 2, 40, 9):
        assert abs(b.value(x, w, s) - a.value(x, w, s)) <= 1e-14


def test_symbol_csv_errors(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("x_word,stub,term_index,re,im\n,0,0,1,0\n,01,0,1,0\n")
    with pytest.raises(ValueError):
        load_symbol_csv(path, 2, constant_profile())
    path.write_text("x_word,stub,term_index,re,im\n,0,1,1,0\n")
    with pytest.raises(ValueError):
        load_symbol_csv(path, 2, [constant_profile()])

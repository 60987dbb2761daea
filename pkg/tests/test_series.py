"""Truncated Laurent series, the norm equation and root extraction."""
from itertools import product

import pytest
from hypothesis import given, strategies as st

from singer_lattices.errors import DivisionByZero, NoRoot, PrecisionExhausted
from singer_lattices.gfield import field_params
from singer_lattices.series import Series, dth_root, series_norm, solve_norm_unit

F2 = field_params(2, 1, 3).K
F3 = field_params(3, 1, 3).K
F5 = field_params(5, 1, 3).K


def test_inverse_of_one_plus_y():
    s = Series.make(F5, 0, [1, 1], 10)
    inv = s.inverse()
    assert inv.coeffs[:4] == (1, 4, 1, 4)
    assert (inv * s - Series.one(F5)).is_zero()
    s2 = Series.make(F2, 0, [1, 1], 10)
    assert s2.inverse().coeffs == (1,) * 10


def test_monomials_and_valuation():
    y = Series.monomial(F3, 1, 1)
    assert (y * y.inverse() - Series.one(F3)).is_zero()
    u = Series.make(F3, 0, [2, 1, 1], 8)
    assert (y * y * u).valuation() == 2


def test_precision_is_carried():
    a = Series.make(F3, 0, [1, 2, 0, 1], 4)
    b = Series.make(F3, 1, [1, 1], 10)
    c = a + b
    assert c.absprec == 4
    d = a * b
    assert d.absprec == 5
    assert Series.exact(F3, [1, 1]).prec is None


def test_zero_inverse_and_empty_window():
    with pytest.raises(DivisionByZero):
        Series.zero(F3).inverse()
    z = Series.make(F3, 0, [0, 0], 2)
    with pytest.raises((DivisionByZero, PrecisionExhausted)):
        z.inverse()


def test_norm_unit_q2_d3():
    P = field_params(2, 1, 3)
    X = solve_norm_unit(P, 24)
    assert X.coefficient(0) == 1 and X.coefficient(1) == 1
    assert P.E.trace(1) == 1
    diff = series_norm(X, 3, P.K) - Series.exact(P.K, [1, 1])
    assert diff.is_zero() and diff.absprec >= 24


def test_norm_unit_q4_d2_first_coefficient():
    P = field_params(2, 2, 2)
    X = solve_norm_unit(P, 24)
    E = P.E
    ones = [x for x in range(E.order) if E.trace(x) == 1]
    assert X.coefficient(1) in ones
    diff = series_norm(X, 2, P.K) - Series.exact(P.K, [1, 1])
    assert diff.is_zero()


@pytest.mark.parametrize("p,a,d", [(2, 1, 3), (3, 1, 3), (2, 2, 3), (5, 1, 3), (2, 1, 4), (3, 1, 4), (2, 1, 5),
                                   (2, 1, 2), (3, 1, 2)])
def test_norm_unit_grid(p, a, d):
    P = field_params(p, a, d)
    X = solve_norm_unit(P, 24)
    diff = series_norm(X, d, P.K) - Series.exact(P.K, [1, 1])
    assert diff.is_zero() and diff.absprec >= 24


def test_dth_root_exact_power():
    s = Series.exact(F5, [1, 1]) ** 3
    r = dth_root(s, 3, 12)
    assert (r - Series.exact(F5, [1, 1])).is_zero()


def test_dth_root_p5_cube():
    s = Series.make(F5, 0, [1, 1], 12)
    r = dth_root(s, 3)
    assert r.coefficient(1) == 2
    assert (r ** 3 - s).is_zero()


@pytest.mark.parametrize("F", [F2, F3], ids=["p2", "p3"])
def test_p_th_root_of_one_plus_y_fails(F):
    with pytest.raises(NoRoot):
        dth_root(Series.make(F, 0, [1, 1], 12), F.p)


def test_noroot_confirmed_by_search():
    # every truncated candidate r mod Y^4 with r^p != 1 + Y mod Y^4
    for F in (F2, F3):
        p = F.p
        target = Series.make(F, 0, [1, 1], 4)
        for cs in product(range(F.order), repeat=4):
            if cs[0] == 0:
                continue
            r = Series.make(F, 0, list(cs), 4)
            assert not (r ** p - target).is_zero()


def test_root_needs_divisible_valuation():
    with pytest.raises(NoRoot):
        dth_root(Series.monomial(F5, 1, 1), 3)


series_coeffs = st.lists(st.integers(0, 4), min_size=1, max_size=8)


@given(series_coeffs, series_coeffs, st.integers(-3, 3), st.integers(-3, 3))
def test_valuation_laws(c1, c2, v1, v2):
    a = Series.make(F5, v1, c1, 8)
    b = Series.make(F5, v2, c2, 8)
    if a.coeffs and b.coeffs:
        assert (a * b).valuation() == a.valuation() + b.valuation()
        s = a + b
        if s.coeffs:
            assert s.valuation() >= min(a.valuation(), b.valuation())


@given(series_coeffs, st.integers(-3, 3))
def test_inverse_roundtrip(c, v):
    a = Series.make(F5, v, c, 8)
    if not a.coeffs:
        return
    assert (a * a.inverse() - Series.one(F5)).is_zero()


@given(series_coeffs, st.sampled_from([2, 3, 4]))
def test_roots_power_back(c, m):
    s = Series.make(F5, 0, [1] + c, 10)
    try:
        r = dth_root(s, m)
    except NoRoot:
        assert not F5.is_power(1, m)
        return
    assert (r ** m - s).is_zero()

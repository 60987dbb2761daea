"""Finite field tower: tables, Frobenius, norm, trace, discrete logs."""
import numpy as np
import pytest
from hypothesis import given, strategies as st

from singer_lattices.errors import ConfigError, FieldTooLarge, ZeroElement
from singer_lattices.gfield import (_Adder, _log_linear, conway_polynomial, exhaustive_checks,
                                    field_params, is_primitive_poly, ord_p)


# independent oracle: GF(2^n) as bit strings with carry-less products
def clmul_mod(x, y, mod, n):
    r = 0
    while y:
        if y & 1:
            r ^= x
        y >>= 1
        x <<= 1
        if x >> n & 1:
            x ^= mod
    return r


def test_f4_frobenius_matches_bit_arithmetic():
    P = field_params(2, 1, 2)
    E = P.E
    w = P.omega
    # x^2 + x + 1 is 0b111, and the int encoding of 1 + x is 0b11 in both
    assert E.frobenius(w) == clmul_mod(w, w, 0b111, 2) == 3
    assert E.frobenius(0) == 0 and E.frobenius(1) == 1


def test_f8_against_bit_oracle():
    P = field_params(2, 1, 3)
    E = P.E
    assert P.ext_modulus == (1, 1, 0, 1)
    for x in range(8):
        for y in range(8):
            assert E.mul(x, y) == clmul_mod(x, y, 0b1011, 3)
    w3 = clmul_mod(clmul_mod(2, 2, 0b1011, 3), 2, 0b1011, 3)
    assert E.discrete_log(w3) == 3
    assert E.discrete_log(1) == 0 and E.discrete_log(P.omega) == 1


def test_f8_norm_and_trace():
    P = field_params(2, 1, 3)
    E = P.E
    assert all(E.norm(x) == 1 for x in range(1, 8))
    assert E.norm(0) == 0 and E.trace(0) == 0
    assert E.trace(1) == 1


def test_discrete_log_of_zero():
    with pytest.raises(ZeroElement):
        field_params(2, 1, 3).E.discrete_log(0)


def test_conway_polynomials_known_values():
    # standard table entries
    assert conway_polynomial(2, 2) == (1, 1, 1)
    assert conway_polynomial(3, 2) == (2, 2, 1)
    assert conway_polynomial(2, 3) == (1, 1, 0, 1)


@pytest.mark.parametrize("p,a,d", [(2, 1, 3), (3, 1, 3), (2, 2, 3), (5, 1, 3), (3, 1, 4), (2, 1, 5)])
def test_moduli_primitive_and_deterministic(p, a, d):
    P = field_params(p, a, d)
    assert is_primitive_poly(P.ext_modulus, P.K)
    assert field_params(p, a, d) is P
    E = P.E
    assert len({E.exp(e) for e in range(E.m)}) == E.m


@pytest.mark.parametrize("p,a,d", [(2, 1, 3), (3, 1, 3), (2, 2, 3), (5, 1, 3), (2, 1, 4), (3, 1, 4)])
def test_norm_is_power_map(p, a, d):
    P = field_params(p, a, d)
    E, q = P.E, P.q
    e = (q ** d - 1) // (q - 1)
    for x in range(1, E.order, max(1, E.order // 200)):
        assert E.norm(x) == E.pow(x, e)


def test_config_errors():
    with pytest.raises(ConfigError):
        field_params(4, 1, 3)
    with pytest.raises(ConfigError):
        field_params(2, 1, 1)
    with pytest.raises(FieldTooLarge):
        field_params(2, 7, 3)


def test_ord_p_is_largest_power():
    assert ord_p(3, 3) == 3 and ord_p(4, 2) == 4 and ord_p(12, 2) == 4 and ord_p(5, 2) == 1


F16 = field_params(2, 2, 2)
F27 = field_params(3, 1, 3)
F64 = field_params(2, 2, 3)


@pytest.mark.parametrize("P", [F16, F27, F64], ids=["q4d2", "q3d3", "q4d3"])
@given(data=st.data())
def test_frobenius_is_field_automorphism(P, data):
    E = P.E
    x = data.draw(st.integers(0, E.order - 1))
    y = data.draw(st.integers(0, E.order - 1))
    assert E.frobenius(E.add(x, y)) == E.add(E.frobenius(x), E.frobenius(y))
    assert E.frobenius(E.mul(x, y)) == E.mul(E.frobenius(x), E.frobenius(y))
    assert E.frobenius(x, P.d) == x


@pytest.mark.parametrize("P", [F16, F27, F64], ids=["q4d2", "q3d3", "q4d3"])
@given(data=st.data())
def test_norm_multiplicative_trace_additive(P, data):
    E, K = P.E, P.K
    x = data.draw(st.integers(0, E.order - 1))
    y = data.draw(st.integers(0, E.order - 1))
    assert E.norm(E.mul(x, y)) == K.mul(E.norm(x), E.norm(y))
    assert E.trace(E.add(x, y)) == K.add(E.trace(x), E.trace(y))
    assert E.norm(x) < K.order and E.trace(x) < K.order


@pytest.mark.parametrize("P", [F16, F27], ids=["q4d2", "q3d3"])
@given(e=st.integers(0, 10 ** 6))
def test_exp_log_roundtrip(P, e):
    E = P.E
    assert E.discrete_log(E.exp(e)) == e % E.m


def test_trace_surjective_and_norm_fibres():
    P = F64
    E, q, d = P.E, P.q, P.d
    assert {E.trace(x) for x in range(E.order)} == set(range(q))
    fib = {}
    for x in range(1, E.order):
        fib[E.norm(x)] = fib.get(E.norm(x), 0) + 1
    assert set(fib.values()) == {(q ** d - 1) // (q - 1)}


# --- vectorized all-element checks --------------------------------------------------------------

@pytest.mark.parametrize("p,a,d", [(2, 1, 3), (3, 1, 3), (2, 2, 3), (5, 1, 2), (3, 2, 2), (7, 1, 3)])
def test_exhaustive_checks_hold(p, a, d):
    r = exhaustive_checks(field_params(p, a, d))
    assert all(r.values()), r


def test_log_linear_detects_broken_map():
    E = field_params(2, 1, 3).E
    g = E.frob_np.copy()
    assert _log_linear(E, g)
    g[[3, 5]] = g[[5, 3]]
    assert not _log_linear(E, g)
    assert not _log_linear(E, np.zeros_like(g))


def test_adder_matches_scalar_addition():
    for P in (field_params(3, 1, 3), field_params(5, 1, 2), field_params(2, 2, 2)):
        E = P.E
        xs = np.arange(E.order, dtype=np.int32)
        T = _Adder(E).table(xs, xs)
        for x in range(0, E.order, 3):
            for y in range(E.order):
                assert T[x, y] == E.add(x, y)


def test_exhaustive_checks_catch_bad_frobenius(monkeypatch):
    P = field_params(3, 1, 2)
    E = P.E
    bad = E.frob_np.copy()
    bad[[1, 2]] = bad[[2, 1]]
    monkeypatch.setattr(E, "_frob", bad)
    r = exhaustive_checks(P)
    assert not r["frobenius_additive"]

import numpy as np
import pytest
from hypothesis import given

import oracles as O
from strategies import nonzero_polys, polys
from cflab.gfpoly import (
    FieldElement,
    Poly,
    PolySyntaxError,
    convolve_mod,
    divides,
    format_poly,
    frobenius_cube,
    gcd,
    inverse_series,
    parse_poly,
)


def P(s):
    return parse_poly(s, 3)


def lst(f: Poly):
    return [int(x) for x in f.coeffs]


# -- worked examples -------------------------------------------------------------


def test_additive_inverse_cancels():
    assert (P("T+1") + P("2*T+2")).is_zero()


def test_t_times_t():
    assert P("T") * P("T") == P("T^2")


def test_cube_of_t_plus_one_is_freshman():
    assert P("T+1") ** 3 == P("T^3+1")


@pytest.mark.parametrize(
    "num, den, q, r",
    [
        ("T^3", "T", "T^2", "0"),
        ("T^3+1", "T^2", "T", "1"),
        ("2*T^4+T", "T^2+1", "2*T^2+1", "T+2"),
    ],
)
def test_divmod_examples(num, den, q, r):
    assert divmod(P(num), P(den)) == (P(q), P(r))


def test_gcd_is_monic():
    assert gcd(P("T^2-1"), P("T-1")) == P("T+2")


def test_gcd_of_zeros_rejected():
    with pytest.raises(ValueError):
        gcd(Poly([], 3), Poly([], 3))


def test_t_does_not_divide_t2_plus_1():
    assert not divides(P("T"), P("T^2+1"))


def test_frobenius_cube_of_t_plus_one():
    assert frobenius_cube(P("T+1")) == P("T^3+1")


def test_parse_ascending_coefficients():
    assert lst(P("T^2+2*T+1")) == [1, 2, 1]


def test_leading_minus_reduces():
    assert P("-T^3") == Poly([0, 0, 0, 2], 3)


def test_format_round_trip():
    assert format_poly(P("2*T^4+T")) == "2*T^4+T"


def test_zero_degree_is_sentinel():
    z = Poly([], 3)
    assert z.degree == float("-inf")
    assert z.degree < Poly([1], 3).degree


def test_modulus_mismatch():
    with pytest.raises(ValueError):
        Poly([1], 3) + Poly([1], 5)


def test_division_by_zero():
    with pytest.raises(ZeroDivisionError):
        divmod(P("T"), Poly([], 3))


@pytest.mark.parametrize("text, pos", [("T^", 2), ("2T", 1), ("T+*", 2), ("T$", 1), ("", 0)])
def test_syntax_errors_carry_position(text, pos):
    with pytest.raises(PolySyntaxError) as err:
        P(text)
    assert err.value.pos == pos


def test_whitespace_ignored():
    assert P(" 2 * T ^ 2 - 1 ") == P("2*T^2+2")


def test_field_element_arithmetic():
    two = FieldElement(2)
    assert int(two * two) == 1
    assert int(two.inverse()) == 2
    with pytest.raises(ZeroDivisionError):
        FieldElement(0).inverse()


def test_exact_div_raises_on_remainder():
    with pytest.raises(ArithmeticError):
        P("T^2+1").exact_div(P("T"))


def test_frobenius_cube_other_prime_multiplies():
    f = Poly([1, 1], 5)
    assert f.frobenius_cube() == f * f * f


# -- properties against the list oracle ---------------------------------------------


@given(polys(), polys(), polys())
def test_ring_axioms(a, b, c):
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a + b == b + a
    assert lst(a * b) == O.mul(lst(a), lst(b))
    assert lst(a - b) == O.sub(lst(a), lst(b))


@given(polys(), nonzero_polys())
def test_divmod_multiply_back(num, den):
    q, r = divmod(num, den)
    assert q * den + r == num
    assert r.degree < den.degree
    assert (lst(q), lst(r)) == O.divmod_(lst(num), lst(den))


@given(polys(), polys())
def test_frobenius_is_ring_homomorphism(f, g):
    assert frobenius_cube(f * g) == frobenius_cube(f) * frobenius_cube(g)
    assert frobenius_cube(f + g) == frobenius_cube(f) + frobenius_cube(g)
    assert frobenius_cube(f) == f * f * f


@given(polys())
def test_parse_format_round_trip(f):
    assert P(format_poly(f)) == f


@given(polys(max_len=12), nonzero_polys(max_len=6))
def test_divides_matches_remainder(a, d):
    assert divides(d, a * d)
    assert divides(d, a) == divmod(a, d)[1].is_zero()


@given(polys(max_len=20), polys(max_len=20))
def test_gcd_divides_both(a, b):
    if a.is_zero() and b.is_zero():
        return
    g = gcd(a, b)
    assert g.leading == 1
    assert divides(g, a) and divides(g, b)


# -- large inputs exercise the FFT and fast-division paths ---------------------------


@pytest.mark.parametrize("n, m", [(400, 300), (3000, 2500), (5000, 40)])
def test_fft_convolution_matches_direct(n, m):
    rng = np.random.default_rng(n + m)
    a = rng.integers(0, 3, n)
    b = rng.integers(0, 3, m)
    assert np.array_equal(convolve_mod(a, b, 3), np.convolve(a, b) % 3)


def test_large_prime_convolution_is_exact():
    rng = np.random.default_rng(7)
    p = 1_000_003
    a = rng.integers(0, p, 2000)
    b = rng.integers(0, p, 2000)
    want = [0] * 3999
    # check a strided sample against exact Python integers
    got = convolve_mod(a, b, p)
    for k in range(0, 3999, 97):
        s = sum(int(a[i]) * int(b[k - i]) for i in range(max(0, k - 1999), min(k, 1999) + 1))
        assert got[k] == s % p
    del want


def test_inverse_series_multiplies_to_one():
    rng = np.random.default_rng(3)
    u = rng.integers(0, 3, 700)
    u[0] = 2
    inv = inverse_series(u, 700, 3)
    prod = convolve_mod(u, inv, 3)[:700]
    assert prod[0] == 1 and not prod[1:].any()


def test_fast_division_matches_oracle():
    rng = np.random.default_rng(11)
    num = Poly(rng.integers(0, 3, 3000), 3)
    den = Poly(list(rng.integers(0, 3, 1200)) + [1], 3)
    q, r = divmod(num, den)
    assert q * den + r == num and r.degree < den.degree

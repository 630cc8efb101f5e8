import json
import warnings

import pytest
from hypothesis import given, strategies as st

import oracles as O
from strategies import nonzero_polys, polys, quotient_lists
from cflab.cfrac import (
    ContinuedFraction,
    DivisibilityError,
    PrecisionWarning,
    alt_scale,
    continuant,
    convergents,
    cube_each,
    evaluate,
    expand,
    expand_rational,
    first_mismatch,
    open_question_check,
    reconstruct,
    reverse,
    scale_identity_check,
)
from cflab.closedform import omega_build
from cflab.gfpoly import Poly, parse_poly
from cflab.laurent import EquationSpec, Laurent, solve_root


def P(s):
    return parse_poly(s, 3)


def seq(*items):
    return [P(s) for s in items]


def ls(p: Poly):
    return p.coeffs.tolist()


# -- expansion -------------------------------------------------------------------


def test_expand_one_over_t():
    cf = expand(Laurent.monomial(-1))
    assert cf.quotients == (Poly([], 3), P("T"))
    assert cf.finite


def test_rational_source_terminates_but_truncated_series_is_exhausted():
    rat = Laurent.from_rational(P("1"), P("T^2+T"), -30)
    cf = expand(rat)
    assert cf.finite and cf.quotients == (Poly([], 3), P("T^2+T"))
    # the same coefficients without the rational flag cannot prove termination
    bare = Laurent(rat.top, rat.coeffs, 3)
    assert expand(bare).exhausted_at is not None


def test_expand_budget():
    root = solve_root(EquationSpec.make("E1", "T", "T"), 200)
    cf = expand(root, 5)
    assert len(cf.partials) == 5
    assert cf.exhausted_at == 6


def test_zero_degree_partial_rejected():
    with pytest.raises(ValueError):
        ContinuedFraction.from_partials(["T", "2"])


@pytest.mark.parametrize("fam, A, C", [("E1", "T", "T"), ("W1", "T^2+1", "T"), ("MR", None, None), ("W2", "T^5+1", "T")])
def test_expansion_stable_under_precision(fam, A, C):
    eq = EquationSpec.make(fam, A, C)
    lo = expand(solve_root(eq, 150))
    hi = expand(solve_root(eq, 300))
    assert lo.exhausted_at is not None
    assert hi.quotients[: len(lo.quotients)] == lo.quotients
    assert len(hi.quotients) >= len(lo.quotients)


@given(quotient_lists(max_size=10), polys(max_len=4))
def test_expand_recovers_random_cf(partials, a0):
    qs = [a0] + partials
    num, den = O.cf_value([ls(a) for a in qs])
    d = len(den) - 1
    x = Laurent.from_rational(Poly(num, 3), Poly(den, 3), -2 * d)
    cf = expand(x)
    assert list(cf.quotients) == qs
    assert cf.finite
    # with too few coefficients the expansion is an honest prefix
    short = expand(Laurent.from_rational(Poly(num, 3), Poly(den, 3), -d))
    assert list(short.quotients) == qs[: len(short.quotients)]
    assert short.finite == (d == 0)


def test_near_rational_value_is_not_declared_finite():
    # (T^99 + 1)/T^100 agrees with 1/T down to T^-60
    x = Laurent.from_rational(Poly.monomial(99, 1, 3) + Poly([1], 3), Poly.monomial(100, 1, 3), -60)
    cf = expand(x)
    assert cf.quotients[:2] == (Poly([], 3), P("T"))
    assert not cf.finite


@given(quotient_lists(max_size=10), polys(max_len=4))
def test_expand_rational_matches_oracle(partials, a0):
    qs = [a0] + partials
    num, den = O.cf_value([ls(a) for a in qs])
    assert list(expand_rational(Poly(num, 3), Poly(den, 3)).quotients) == qs


# -- convergents ------------------------------------------------------------------


def test_convergents_of_one_over_t():
    t = convergents(ContinuedFraction.from_partials(["T"]))
    assert t.numerators == (Poly([], 3), Poly([1], 3))
    assert t.denominators == (Poly([1], 3), P("T"))


def test_convergent_of_t_squared():
    t = convergents(ContinuedFraction.from_partials(["T^2"]))
    assert (t.numerators[-1], t.denominators[-1]) == (P("1"), P("T^2"))


@given(quotient_lists(max_size=12), polys(max_len=3))
def test_determinant_and_degrees(partials, a0):
    cf = ContinuedFraction((a0, *partials))
    t = convergents(cf)
    assert t.determinant_ok()
    degs = [int(v.degree) for v in t.denominators]
    assert degs == [sum(cf.degrees()[:k]) for k in range(len(degs))]
    num, den = O.cf_value([ls(a) for a in cf.quotients])
    U, V = evaluate(cf.quotients)
    assert ls(U * Poly(den, 3)) == ls(V * Poly(num, 3))


@given(quotient_lists(min_size=3, max_size=8))
def test_best_approximation_identity(partials):
    """|alpha - U_k/V_k| = |V_k|^-2 |a_{k+1}|^-1 for every k < n."""
    cf = ContinuedFraction((Poly([], 3), *partials))
    U, V = continuant(cf.quotients)
    alpha = Laurent.from_rational(U, V, -4 * int(V.degree) - 10)
    t = convergents(cf)
    for k in range(len(partials)):
        diff = alpha - Laurent.from_rational(t.numerators[k], t.denominators[k], alpha.floor)
        assert -diff.top == 2 * int(t.denominators[k].degree) + int(partials[k].degree)


# -- reconstruction ------------------------------------------------------------------


def test_reconstruct_examples():
    assert reconstruct(ContinuedFraction.from_partials(["T"]), 20).agrees_with(Laurent.monomial(-1))
    r = reconstruct(ContinuedFraction((P("T"),)), 10)
    assert r == Laurent.from_poly(P("T")).truncate(-10) or r.agrees_with(Laurent.from_poly(P("T")))


def test_reconstruct_truncated_warns_and_clamps():
    cf = ContinuedFraction.from_partials(["T", "T^2"], exhausted_at=3)
    with pytest.warns(PrecisionWarning):
        x = reconstruct(cf, 50)
    assert x.floor == -6 and not x.rational


def test_reconstruct_within_determined_range_is_silent():
    cf = ContinuedFraction.from_partials(["T", "T^2"], exhausted_at=3)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        reconstruct(cf, 6)


def test_reconstruct_then_expand_round_trip():
    root = solve_root(EquationSpec.make("E1", "T", "T"), 200)
    cf = expand(root)
    _, V = continuant(cf.quotients)
    x = reconstruct(cf, 2 * int(V.degree))
    assert x.agrees_with(root)


# -- serialization ----------------------------------------------------------------------


def test_json_and_csv():
    cf = ContinuedFraction.from_partials(["T^2", "2*T"], exhausted_at=3)
    data = json.loads(json.dumps(cf.to_json()))
    assert data == {"a0": "0", "quotients": ["T^2", "2*T"], "exhausted_at": 3}
    assert ContinuedFraction.from_json(data) == cf
    assert cf.to_csv().splitlines() == ["index,quotient,degree", "0,0,", "1,T^2,2", "2,2*T,1"]


# -- scaling identity and sequence calculus -----------------------------------------------


def test_scale_identity_trivial_and_examples():
    assert scale_identity_check(P("1"), P("1"), seq("T", "T^2"))
    assert scale_identity_check(P("T"), P("2"), seq("T", "T^2", "T"))
    assert scale_identity_check(P("2*T"), P("T+1"), seq("T+1", "T^2", "2*T", "T^3+T", "T"))


def test_scale_identity_by_oracle():
    B, C = [0, 1], [2]
    qs = [[0, 1], [0, 0, 1], [0, 1]]
    left = O.cf_value([O.mul(B if i % 2 == 0 else C, a) for i, a in enumerate(qs)])
    right = O.cf_value([O.mul(C if i % 2 == 0 else B, a) for i, a in enumerate(qs)])
    # C * left == B * right as fractions
    assert O.mul(O.mul(C, left[0]), right[1]) == O.mul(O.mul(B, right[0]), left[1])


@given(nonzero_polys(max_len=4), nonzero_polys(max_len=4), quotient_lists(max_size=7), polys(max_len=3))
def test_scale_identity_random(B, C, partials, a0):
    assert scale_identity_check(B, C, [a0, *partials])


def test_scale_identity_rejects_zero():
    with pytest.raises(ValueError):
        scale_identity_check(Poly([], 3), P("T"), seq("T"))


def test_alt_scale_examples():
    s = seq("T^2", "T", "2*T^2", "2*T")
    assert alt_scale(s, P("1")) == s
    assert alt_scale(s, P("2*T"), "odd") == seq("2*T", "2*T^2", "T", "T^2") == reverse(s)
    assert alt_scale(seq("T^4"), P("T^2")) == seq("T^2")
    assert alt_scale(seq("T", "T^2"), P("T"), "even") == seq("T^2", "T")


def test_alt_scale_divisibility_error():
    with pytest.raises(DivisibilityError) as err:
        alt_scale(seq("T^2", "T", "T+1"), P("T"), "odd")
    assert err.value.index == 3


@given(st.lists(nonzero_polys(max_len=4), max_size=6), nonzero_polys(max_len=3))
def test_alt_scale_inverse(s, B):
    s = [B * x for x in s]  # every entry divisible, so both modes apply
    assert alt_scale(alt_scale(s, B, "odd"), B, "even") == s
    assert alt_scale(alt_scale(s, B, "even"), B, "odd") == s


@given(st.lists(polys(max_len=5), max_size=6))
def test_reverse_and_cube(s):
    assert reverse(reverse(s)) == s
    assert cube_each(s) == [a * a * a for a in s]


def test_first_mismatch():
    assert first_mismatch(seq("T", "T^2"), seq("T", "T^2", "T")) is None
    assert first_mismatch(seq("T", "T^2"), seq("T", "2*T^2")) == 1


# -- open question -------------------------------------------------------------------------


def test_open_question_worked_example():
    rep = open_question_check(seq("T^2", "T", "2*T^2", "2*T"), P("2*T"))
    assert rep.hypothesis and rep.n_even and rep.status == "conclusion holds"


def test_open_question_odd_length_without_hypothesis():
    rep = open_question_check(seq("T", "T^2", "T^3"), P("T"))
    assert rep.status == "hypothesis not satisfied"


def test_open_question_preconditions():
    with pytest.raises(DivisibilityError):
        open_question_check(seq("T+1", "T"), P("T"))
    with pytest.raises(ValueError):
        open_question_check(seq("T"), P("2"))


@st.composite
def symmetric_sequences(draw):
    """Sequences built to satisfy the conclusion: a_{n-k} = D^{(-1)^{k+1}} a_{k+1}."""
    D = draw(nonzero_polys(max_len=3).filter(lambda d: d.degree >= 1))
    half = draw(st.integers(1, 4))
    first, last = [], []
    for k in range(half):
        x = draw(nonzero_polys(max_len=3))
        if k % 2 == 0:
            first.append(D * x)
            last.append(x)
        else:
            first.append(x)
            last.append(D * x)
    return first + last[::-1], D


@given(symmetric_sequences())
def test_conclusion_implies_hypothesis(data):
    s, D = data
    rep = open_question_check(s, D)
    assert rep.hypothesis and rep.status == "conclusion holds"


@pytest.mark.parametrize("A, C", [("T", "T"), ("T^2", "T"), ("T^3+T", "T"), ("T^2+T", "T+1"), ("T^2", "T^2")])
def test_open_question_on_omega_two(A, C):
    om = omega_build("E1", A, C, 2)
    rep = open_question_check(list(om), P(C).scale(2))
    assert rep.status == "conclusion holds"

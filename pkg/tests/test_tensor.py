"""Tensor algebra kernel: products, exp/log, norms, involution, shuffle."""

from __future__ import annotations

import json
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from puresig.tensor import (
    GaussianRational,
    GradedTensor,
    TermBudgetError,
    alpha_involution,
    hs_inner,
    hs_norm_sq,
    l1_dual_witness,
    norm,
    pairing,
    pack_word,
    permute_slots,
    project,
    shuffle_mul,
    tensor_mul,
    truncated_exp,
    truncated_log,
    unpack_word,
)


def letter(i, d=2, n=8):
    return GradedTensor.letter(i, d, n)


def bracket_12(d=2, n=8):
    e1, e2 = letter(1, d, n), letter(2, d, n)
    return tensor_mul(e1, e2, n) - tensor_mul(e2, e1, n)


def naive_exp(x: GradedTensor, trunc: int) -> GradedTensor:
    """Independent oracle: literal sum of powers, no Horner, no fast path."""
    out = GradedTensor.unit(x.dim, trunc, x.exact)
    power = GradedTensor.unit(x.dim, trunc, x.exact)
    for k in range(1, trunc + 1):
        power = tensor_mul(power, x, trunc)
        out = out + power.scale(Fraction(1, math.factorial(k)))
    return out


# -- words ---------------------------------------------------------------------


def test_pack_unpack_roundtrip():
    for word in [(1,), (2, 1), (1, 2, 2), (2, 2, 2, 1)]:
        assert unpack_word(pack_word(word, 2), len(word), 2) == word
    assert pack_word((), 5) == 0


def test_pack_rejects_out_of_range():
    with pytest.raises(ValueError):
        pack_word((3,), 2)


# -- tensor product --------------------------------------------------------------


def test_mul_basis_concatenation():
    prod = tensor_mul(letter(1), letter(2))
    assert sorted(prod.terms()) == [((1, 2), 1)]


def test_mul_binomial():
    one_plus_e1 = GradedTensor.unit(2, 2) + letter(1, 2, 2)
    sq = tensor_mul(one_plus_e1, one_plus_e1, 2)
    assert sq == GradedTensor.from_terms(2, 2, {(): 1, (1,): 2, (1, 1): 1})


def test_mul_dimension_and_mode_mismatch():
    with pytest.raises(ValueError):
        tensor_mul(letter(1, 2), letter(1, 3))
    with pytest.raises(ValueError):
        tensor_mul(letter(1, 2), letter(1, 2).to_float())


def test_exp_additivity_in_time():
    # exp(s l) exp(t l) = exp((s+t) l) truncated, exact rationals
    l = (letter(1, 2, 6) + bracket_12(2, 6)).truncate(6)
    s, t = Fraction(2, 3), Fraction(-1, 5)
    lhs = tensor_mul(truncated_exp(l.scale(s), 6), truncated_exp(l.scale(t), 6), 6)
    rhs = truncated_exp(l.scale(s + t), 6)
    assert lhs == rhs


# -- exp / log -------------------------------------------------------------------


def test_exp_matches_naive_oracle():
    l = (letter(1, 2, 8) + bracket_12(2, 8)).truncate(8)
    assert truncated_exp(l, 8) == naive_exp(l, 8)
    mixed = l.scale(Fraction(1, 3))
    assert truncated_exp(mixed, 8) == naive_exp(mixed, 8)


def test_exp_single_letter():
    t = Fraction(5, 7)
    x = letter(1, 2, 2).scale(t)
    got = truncated_exp(x, 2)
    assert got == GradedTensor.from_terms(2, 2, {(): 1, (1,): t, (1, 1): t * t / 2})


def test_exp_degree2_component():
    l = (letter(1) + bracket_12()).truncate(8)
    x2 = project(truncated_exp(l, 8), 2)
    expected = GradedTensor.from_terms(
        2, 8, {(1, 1): Fraction(1, 2), (1, 2): 1, (2, 1): -1}
    )
    assert x2 == expected


def test_exp_homogeneous_power_structure():
    # x in V^(x2): degree-n part is x^(n/2)/(n/2)! when 2 | n, else 0
    x = bracket_12(2, 12).truncate(12)
    ex = truncated_exp(x, 12)
    power = GradedTensor.unit(2, 12)
    for k in range(1, 7):
        power = tensor_mul(power, x, 12)
        assert project(ex, 2 * k) == power.scale(Fraction(1, math.factorial(k)))
    for n in (1, 3, 5, 7, 9, 11):
        assert project(ex, n).is_zero()


def test_exp_rejects_nonzero_scalar():
    with pytest.raises(ValueError):
        truncated_exp(GradedTensor.unit(2, 4), 4)


def test_log_of_unit_is_zero():
    assert truncated_log(GradedTensor.unit(2, 6), 6).is_zero()


def test_log_exp_roundtrip_both_ways():
    l = (letter(1, 2, 10) + bracket_12(2, 10).scale(Fraction(3, 4))).truncate(10)
    g = truncated_exp(l, 10)
    assert truncated_log(g, 10) == l
    h = GradedTensor.unit(2, 10) + letter(2, 2, 10)
    assert truncated_exp(truncated_log(h, 10), 10) == h


def test_log_series_single_letter():
    g = GradedTensor.unit(2, 3) + letter(1, 2, 3)
    got = truncated_log(g, 3)
    assert got == GradedTensor.from_terms(
        2, 3, {(1,): 1, (1, 1): Fraction(-1, 2), (1, 1, 1): Fraction(1, 3)}
    )


def test_log_rejects_wrong_scalar():
    with pytest.raises(ValueError):
        truncated_log(letter(1), 4)


def test_exp_term_budget_guard():
    l = (letter(1, 2, 16) + letter(2, 2, 16)).truncate(16)
    with pytest.raises(TermBudgetError):
        truncated_exp(l, 16, term_budget=100)


# -- projection -------------------------------------------------------------------


def test_project_examples():
    x = GradedTensor.from_terms(2, 4, {(): 1, (1,): 1, (1, 2): 1})
    assert project(x, 1) == GradedTensor.from_terms(2, 4, {(1,): 1})
    l = (letter(1) + bracket_12()).truncate(8)
    ex = truncated_exp(l, 8)
    assert project(ex, 0).scalar_part() == 1
    with pytest.raises(ValueError):
        project(x, 9)


# -- norms -----------------------------------------------------------------------


def test_norm_examples():
    br = bracket_12()
    assert norm(br, "l1") == 2
    assert norm(br, "hs") == pytest.approx(math.sqrt(2))
    assert hs_norm_sq(br) == 2


def test_norm_requires_homogeneous():
    with pytest.raises(ValueError):
        norm(GradedTensor.unit(2, 2) + letter(1, 2, 2), "l1")


def test_exact_l1_rejects_complex():
    x = GradedTensor.from_terms(2, 1, {(1,): GaussianRational(1, 1)})
    with pytest.raises(ValueError):
        norm(x, "l1")


def test_l1_multiplicativity_on_homogeneous():
    x = GradedTensor.from_terms(2, 6, {(1, 2): 3, (2, 2): Fraction(-1, 2)})
    y = GradedTensor.from_terms(2, 6, {(1,): 2, (2,): 5})
    assert norm(tensor_mul(x, y, 6), "l1") == norm(x, "l1") * norm(y, "l1")


def test_hs_factorization():
    x = GradedTensor.from_terms(2, 6, {(1, 2): 1, (2, 1): -2})
    xp = GradedTensor.from_terms(2, 6, {(1, 2): 3, (2, 2): 1})
    y = GradedTensor.from_terms(2, 6, {(1,): 1, (2,): 4})
    yp = GradedTensor.from_terms(2, 6, {(2,): -1})
    lhs = hs_inner(tensor_mul(x, y, 6), tensor_mul(xp, yp, 6))
    assert lhs == hs_inner(x, xp) * hs_inner(y, yp)


def test_permutation_invariance_of_norms():
    x = GradedTensor.from_terms(2, 3, {(1, 2, 2): 3, (2, 1, 1): -1, (1, 1, 1): 2})
    for sigma in ([1, 0, 2], [2, 1, 0], [1, 2, 0]):
        p = permute_slots(x, sigma)
        assert norm(p, "l1") == norm(x, "l1")
        assert hs_norm_sq(p) == hs_norm_sq(x)


# -- inner products -----------------------------------------------------------------


def test_hs_inner_examples():
    assert hs_inner(letter(1), letter(2)) == 0
    br = bracket_12()
    assert hs_inner(br, br) == 2
    sq = tensor_mul(br, br, 8)
    h1 = GradedTensor.from_terms(
        2, 8, {(1, 1, 2, 1): 3, (1, 2, 1, 1): -3, (2, 1, 1, 1): 1, (1, 1, 1, 2): -1}
    )
    assert hs_inner(sq, h1) == 0  # disjoint word supports
    with pytest.raises(ValueError):
        hs_inner(letter(1, 2), letter(1, 3))


def test_hs_inner_conjugates_second_argument():
    x = GradedTensor.from_terms(2, 1, {(1,): GaussianRational(0, 1)})
    assert hs_inner(x, x) == 1


# -- involution ----------------------------------------------------------------------


def test_alpha_examples():
    assert alpha_involution(tensor_mul(letter(1), letter(2))) == tensor_mul(
        letter(2), letter(1)
    )
    br = bracket_12()
    assert alpha_involution(br) == br.scale(-1)


def test_alpha_involution_squares_to_identity():
    x = GradedTensor.from_terms(
        2, 4, {(): 2, (1,): 3, (1, 2): Fraction(1, 3), (2, 1, 1): -4, (1, 2, 2, 1): 7}
    )
    assert alpha_involution(alpha_involution(x)) == x


def test_alpha_antiautomorphism_and_isometry():
    x = GradedTensor.from_terms(2, 6, {(1, 2): 2, (2, 2): -1})
    y = GradedTensor.from_terms(2, 6, {(1,): 1, (2, 1): 3})
    assert alpha_involution(tensor_mul(x, y, 6)) == tensor_mul(
        alpha_involution(y), alpha_involution(x), 6
    )
    assert hs_inner(alpha_involution(x), alpha_involution(x)) == hs_inner(x, x)


# -- shuffle ----------------------------------------------------------------------


def test_shuffle_examples():
    s = shuffle_mul(letter(1), letter(2))
    assert s == GradedTensor.from_terms(2, 8, {(1, 2): 1, (2, 1): 1})
    s2 = shuffle_mul(letter(1), letter(1))
    assert s2 == GradedTensor.from_terms(2, 8, {(1, 1): 2})


def test_shuffle_identity_on_group_like():
    l = (letter(1, 2, 6) + letter(2, 2, 6) + bracket_12(2, 6)).truncate(6)
    g = truncated_exp(l, 6)
    words = [[]]
    for _ in range(3):
        words = words + [w + [a] for w in words for a in (1, 2)]
    words = [tuple(w) for w in words if w]
    for u in words:
        for v in words:
            if len(u) + len(v) > 6:
                continue
            sh = shuffle_mul(
                GradedTensor.from_terms(2, 6, {u: 1}),
                GradedTensor.from_terms(2, 6, {v: 1}),
                6,
            )
            assert g.coeff(u) * g.coeff(v) == pairing(sh, g)


# -- dual witness -----------------------------------------------------------------


def test_dual_witness_examples():
    br = bracket_12()
    b = l1_dual_witness(br)
    assert b.coeff((1, 2)) == 1 and b.coeff((2, 1)) == -1
    assert pairing(b, br) == norm(br, "l1") == 2
    assert pairing(l1_dual_witness(letter(1)), letter(1)) == 1
    h3 = GradedTensor.from_terms(
        2, 4, {(1, 1, 2, 2): 1, (1, 2, 1, 2): -2, (2, 1, 2, 1): 2, (2, 2, 1, 1): -1}
    )
    assert pairing(l1_dual_witness(h3), h3) == 6
    assert all(c in (-1, 1) for _, c in l1_dual_witness(h3).terms())


def test_dual_witness_rejects_complex():
    x = GradedTensor.from_terms(2, 1, {(1,): GaussianRational(1, 2)})
    with pytest.raises(ValueError):
        l1_dual_witness(x)


# -- property tests ----------------------------------------------------------------


@st.composite
def sparse_tensors(draw, dim=2, max_degree=3):
    n_terms = draw(st.integers(0, 5))
    terms = {}
    for _ in range(n_terms):
        deg = draw(st.integers(0, max_degree))
        word = tuple(draw(st.integers(1, dim)) for _ in range(deg))
        terms[word] = Fraction(draw(st.integers(-4, 4)), draw(st.integers(1, 3)))
    return GradedTensor.from_terms(dim, 8, terms)


@settings(max_examples=60, deadline=None)
@given(sparse_tensors(), sparse_tensors(), sparse_tensors())
def test_associativity(a, b, c):
    assert tensor_mul(tensor_mul(a, b, 8), c, 8) == tensor_mul(a, tensor_mul(b, c, 8), 8)


@settings(max_examples=40, deadline=None)
@given(sparse_tensors(), sparse_tensors())
def test_shuffle_commutative(a, b):
    assert shuffle_mul(a, b, 6) == shuffle_mul(b, a, 6)


@settings(max_examples=30, deadline=None)
@given(sparse_tensors())
def test_exp_log_inverse_property(x):
    l = GradedTensor(x.dim, 8, {n: t for n, t in x.data.items() if n > 0}, x.exact)
    assert truncated_log(truncated_exp(l, 8), 8) == l


# -- serialization ----------------------------------------------------------------


def test_json_roundtrip_byte_identity():
    x = GradedTensor.from_terms(
        2, 5, {(): Fraction(3, 2), (2, 1): -2, (1, 1, 2): Fraction(7, 3)}
    )
    text = x.to_json()
    again = GradedTensor.from_json(text).to_json()
    assert text == again
    assert GradedTensor.from_json(text) == x


def test_json_float_mode():
    x = GradedTensor.from_terms(2, 3, {(1, 2): complex(0.5, -1.25)}, exact=False)
    y = GradedTensor.from_json(x.to_json())
    assert not y.exact
    assert y.coeff((1, 2)) == complex(0.5, -1.25)


def test_json_term_ordering():
    x = GradedTensor.from_terms(2, 3, {(2, 1): 1, (1,): 1, (1, 2): 1})
    words = [tuple(t["word"]) for t in json.loads(x.to_json())["terms"]]
    assert words == [(1,), (1, 2), (2, 1)]

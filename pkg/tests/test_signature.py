"""Signature components, tail sequences, upper bound, local variation."""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

import pytest

from puresig.lie import parse_lie
from puresig.signature import (
    dense_norm_table,
    local_variation,
    neoclassical_check,
    signature,
    signature_component,
    tail_sequence,
    upper_bound_series,
)
from puresig.tensor import (
    GradedTensor,
    TermBudgetError,
    norm,
    project,
    tensor_mul,
    truncated_exp,
)

L_SPARSE = "e1 + [e1,e2]"
L_DENSE = "e1 + e2 + [e1,e2]"


def bracket_12(n=8):
    e1, e2 = GradedTensor.letter(1, 2, n), GradedTensor.letter(2, 2, n)
    return tensor_mul(e1, e2, n) - tensor_mul(e2, e1, n)


def oracle_upper(l_norms: list[float], n: int) -> float:
    """Composition sum via itertools, independent of the recursive generator."""
    m = len(l_norms)
    total = 0.0
    for ks in itertools.product(range(n + 1), repeat=m):
        if sum(ks) != n:
            continue
        term = 1.0
        for r, k in enumerate(ks, start=1):
            if k:
                a = l_norms[r - 1]
                term = 0.0 if a == 0 else term * a ** (k / r) / math.gamma(k / r + 1)
        total += term
    return total


# -- signature components ----------------------------------------------------------


def test_homogeneous_signature_structure():
    c = Fraction(3, 2)
    l = bracket_12(12).scale(c).truncate(12)
    power = GradedTensor.unit(2, 12)
    for k in range(1, 7):
        power = tensor_mul(power, l, 12)
        assert signature_component(l, 2 * k) == power.scale(Fraction(1, math.factorial(k)))
    for n in (1, 3, 5, 7):
        assert signature_component(l, n).is_zero()


def test_signature_component_examples():
    l = parse_lie(L_SPARSE)
    x2 = signature_component(l, 2)
    assert x2 == GradedTensor.from_terms(
        2, 2, {(1, 1): Fraction(1, 2), (1, 2): 1, (2, 1): -1}
    )
    zero = GradedTensor.zero(2, 4)
    assert signature_component(zero, 3).is_zero()
    assert signature_component(zero, 0).scalar_part() == 1


def test_chen_multiplicativity():
    l = parse_lie(L_DENSE).to_tensor(6)
    for s, t in ((Fraction(1, 3), Fraction(1, 2)), (Fraction(2, 5), Fraction(-1, 7))):
        lhs = tensor_mul(
            truncated_exp(l.scale(s), 6), truncated_exp(l.scale(t), 6), 6
        )
        assert lhs == truncated_exp(l.scale(s + t), 6)


# -- tail sequences -----------------------------------------------------------------


def test_tail_homogeneous_bracket():
    l = parse_lie("[e1,e2]")
    rep = tail_sequence(l, 2, 16, "l1")
    for n, t in zip(rep.degrees, rep.t_values):
        assert t == pytest.approx(2.0) if n % 2 == 0 else t == 0.0
    assert rep.window_sup == pytest.approx(2.0)


def test_tail_line_segment():
    rep = tail_sequence(parse_lie("e1", dim=2), 1, 10, "l1")
    assert all(t == pytest.approx(1.0) for t in rep.t_values)


def test_tail_disjoint_support_lower_bound():
    # n! ||X^{2n}|| >= 2^n exactly, and equals the split sum over powers
    l = parse_lie(L_SPARSE).to_tensor(20)
    sig = signature(l, 20)
    powers = {}
    power = GradedTensor.unit(2, 20)
    for k in range(1, 21):
        power = tensor_mul(power, l, 20)
        powers[k] = power
    for n in range(1, 11):
        total = norm(project(sig, 2 * n), "l1") * math.factorial(n)
        split = sum(
            Fraction(math.factorial(n), math.factorial(k))
            * norm(project(powers[k], 2 * n), "l1")
            for k in range(n, 2 * n + 1)
        )
        assert total == split
        assert total >= 2**n


def test_tail_window_and_csv():
    rep = tail_sequence(parse_lie(L_SPARSE), 2, 12, "l1", n0=6)
    assert rep.window_sup == max(
        t for n, t in zip(rep.degrees, rep.t_values) if n >= 6
    )
    text = rep.to_csv("metaline")
    lines = text.strip().splitlines()
    assert lines[0] == "n,norm,t_n,window_sup"
    assert lines[-1] == "# metaline"
    assert len(lines) == 14


def test_tail_rejects_bad_window():
    with pytest.raises(ValueError):
        tail_sequence(parse_lie(L_SPARSE), 2, 8, "l1", n0=9)


def test_tail_budget_guard():
    with pytest.raises(TermBudgetError):
        tail_sequence(parse_lie(L_DENSE), 2, 18, "l1", term_budget=500)


def test_dense_table_matches_sparse():
    l = parse_lie(L_DENSE)
    table = dense_norm_table(l, 10)
    sig = signature(l, 10)
    for n in range(1, 11):
        assert table[n][0] == pytest.approx(float(norm(project(sig, n), "l1")), rel=1e-12)
        assert table[n][1] == pytest.approx(float(norm(project(sig, n), "hs")), rel=1e-12)


def test_dense_tail_agrees():
    l = parse_lie(L_DENSE)
    a = tail_sequence(l, 2, 10, "l1")
    b = tail_sequence(l, 2, 10, "l1", dense=True)
    assert a.window_sup == pytest.approx(b.window_sup, rel=1e-12)


# -- upper bound --------------------------------------------------------------------


def test_upper_bound_line_segment():
    l = parse_lie("e1", dim=2)
    for n in (1, 3, 6):
        assert upper_bound_series(l, 1, n) == pytest.approx(1 / math.factorial(n))


def test_upper_bound_homogeneous_bracket():
    l = parse_lie("[e1,e2]")
    for k in (1, 2, 4):
        assert upper_bound_series(l, 2, 2 * k) == pytest.approx(2**k / math.factorial(k))


def test_upper_bound_matches_composition_oracle():
    l = parse_lie(L_SPARSE)
    for n in (1, 2, 3, 4, 7, 10):
        assert upper_bound_series(l, 2, n) == pytest.approx(oracle_upper([1.0, 2.0], n))
    l4 = parse_lie("[[e1,[e1,e2]],e1] + e1")
    for n in (4, 6, 9):
        assert upper_bound_series(l4, 4, n) == pytest.approx(
            oracle_upper([1.0, 0.0, 0.0, 8.0], n)
        )


def test_upper_bound_dominates_n4_example():
    l = parse_lie(L_SPARSE)
    bound = upper_bound_series(l, 2, 4)
    actual = float(norm(signature_component(l, 4), "l1"))
    assert actual == 2.375
    assert actual <= bound


@pytest.mark.parametrize("text,m", [(L_SPARSE, 2), (L_DENSE, 2), ("[[e1,[e1,e2]],e1] + e1", 4)])
@pytest.mark.parametrize("which", ["l1", "hs"])
def test_upper_bound_dominance(text, m, which):
    l = parse_lie(text)
    sig = signature(l, 12)
    for n in range(1, 13):
        actual = float(norm(project(sig, n), which))
        assert actual <= upper_bound_series(l, m, n, which) * (1 + 1e-12)


def test_upper_bound_rejects_overdeclared_degree():
    with pytest.raises(ValueError):
        upper_bound_series(parse_lie("[[e1,[e1,e2]],e1]"), 2, 4)


# -- local variation ----------------------------------------------------------------


def test_local_variation_homogeneous_exact():
    values = local_variation(parse_lie("[e1,e2]"), 2, 8)
    assert all(v == pytest.approx(2.0) for v in values)


def test_local_variation_line_segment():
    values = local_variation(parse_lie("e1", dim=2), 1, 6)
    assert all(v == pytest.approx(1.0) for v in values)


def test_local_variation_converges():
    # value at level j is 2 + 2^(-j/2) + 2^(-j-1): eventually monotone,
    # within 1% of ||pi_2(l)|| from level 14 on (1.6% at level 10)
    values = local_variation(parse_lie(L_SPARSE), 2, 14)
    for j, v in enumerate(values):
        assert v == pytest.approx(2 + 2 ** (-j / 2) + 2 ** (-j - 1), rel=1e-12)
    assert all(a > b for a, b in zip(values, values[1:]))
    assert abs(values[14] - 2.0) / 2.0 < 0.01
    assert abs(values[10] - 2.0) / 2.0 > 0.01  # stated 1% is not yet reached here


# -- neoclassical inequality -----------------------------------------------------------


def test_neoclassical_single_term_equality():
    ok, lhs, rhs = neoclassical_check([2.5], 3.0, 7)
    assert ok
    assert lhs == pytest.approx(rhs)


def test_neoclassical_p1_binomial():
    ok, lhs, rhs = neoclassical_check([1.5, 2.5], 1.0, 6)
    assert ok
    assert lhs == pytest.approx(rhs)  # binomial identity at p = 1


def test_neoclassical_strict_slack():
    ok, lhs, rhs = neoclassical_check([1.0, 1.0], 2.0, 4)
    assert ok
    assert lhs < rhs


def test_neoclassical_rejects_bad_input():
    with pytest.raises(ValueError):
        neoclassical_check([1.0, -1.0], 2.0, 4)
    with pytest.raises(ValueError):
        neoclassical_check([1.0], 0.5, 4)


# -- path wrapper --------------------------------------------------------------------


def test_pure_rough_path_wrapper():
    from puresig.signature import PureRoughPath

    p = PureRoughPath(parse_lie(L_SPARSE), 2)
    # Chen identity on increments at the truncation level
    s, t = Fraction(1, 3), Fraction(3, 4)
    chained = tensor_mul(p.at(s), p.increment(s, t), 2)
    assert chained == p.at(t)
    assert project(p.signature(6), 6) == signature_component(parse_lie(L_SPARSE), 6)
    rep = tail_sequence(p, 2, 8)
    assert rep.degrees[-1] == 8


def test_pure_rough_path_validation():
    from puresig.signature import PureRoughPath

    with pytest.raises(ValueError):
        PureRoughPath(parse_lie("e1", dim=2), 2)  # pi_2 = 0
    with pytest.raises(ValueError):
        PureRoughPath(parse_lie("[e1,[e1,e2]]"), 2)  # degree-3 part above m
    with pytest.raises(ValueError):
        PureRoughPath(parse_lie(L_SPARSE), 0)

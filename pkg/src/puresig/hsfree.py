"""Symmetrized products and Hilbert-Schmidt orthogonality of signature terms.

For l = l_a + l_b with homogeneous Lie parts of degrees a < b, the degree-bk
signature component splits as l_b^k / k! plus a remainder Q of mixed
symmetrized products.  When (b-a)/gcd(a,b) is odd every term of Q pairs an
odd total number of Lie factors against a tensor power, so the word-reversal
anti-involution forces <l_b^k, Q> = 0 and the tail norm is bounded below by
||l_b||^k / k!.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction

from .lie import LiePoly, dynkin_check
from .tensor import (
    GradedTensor,
    TermBudgetError,
    hs_inner,
    hs_norm_sq,
    tensor_mul,
)


def _homogeneous(x) -> GradedTensor:
    if isinstance(x, LiePoly):
        x = x.to_tensor()
    if not isinstance(x, GradedTensor):
        raise TypeError(f"expected LiePoly or GradedTensor, got {type(x).__name__}")
    x.homogeneous_degree()
    return x

__all__ = [
    "symmetrized_product",
    "reduced_sym",
    "tensor_power",
    "q_remainder",
    "OrthRow",
    "orthogonality_check",
    "rows_to_csv",
    "SYM_ARITY_GUARD",
]

SYM_ARITY_GUARD = 8
_INTERLEAVING_GUARD = 200_000


def tensor_power(x: GradedTensor, k: int, trunc: int | None = None) -> GradedTensor:
    if k < 0:
        raise ValueError("power must be >= 0")
    if trunc is None:
        trunc = x.homogeneous_degree() * k if not x.is_zero() else x.trunc
    out = GradedTensor.unit(x.dim, trunc, x.exact)
    for _ in range(k):
        out = tensor_mul(out, x.truncate(trunc), trunc)
    return out


def symmetrized_product(args: list[GradedTensor]) -> GradedTensor:
    """Average of the tensor product over all orderings of the arguments."""
    args = [_homogeneous(a) for a in args]
    n = len(args)
    if n == 0:
        raise ValueError("need at least one argument")
    if n > SYM_ARITY_GUARD:
        raise TermBudgetError(
            f"symmetrized product over {n} arguments exceeds the {SYM_ARITY_GUARD}! guard"
        )
    import itertools

    degree = sum(a.homogeneous_degree() for a in args)
    dim = args[0].dim
    total = GradedTensor.zero(dim, degree, args[0].exact)
    for perm in itertools.permutations(range(n)):
        prod = args[perm[0]].truncate(degree)
        for i in perm[1:]:
            prod = tensor_mul(prod, args[i], degree)
        total = total + prod
    return total.scale(Fraction(1, math.factorial(n)))


def reduced_sym(spec: list[tuple[GradedTensor, int]]) -> GradedTensor:
    """Symmetrized product divided by the multiplicity factorials.

    Equals (1/n!) times the sum over distinct interleavings, so it is
    computed by walking the multiset of argument positions instead of
    enumerating all n! permutations.
    """
    if not spec:
        raise ValueError("need at least one argument")
    spec = [(_homogeneous(x), mult) for x, mult in spec]
    items = [x for x, mult in spec]
    counts = [mult for _, mult in spec]
    if any(m < 1 for m in counts):
        raise ValueError("multiplicities must be >= 1")
    n = sum(counts)
    n_seq = math.factorial(n)
    for c in counts:
        n_seq //= math.factorial(c)
    if n_seq > _INTERLEAVING_GUARD:
        raise TermBudgetError(f"{n_seq} interleavings exceed the enumeration guard")
    degree = sum(x.homogeneous_degree() * m for x, m in spec)
    dim = items[0].dim
    total = GradedTensor.zero(dim, degree, items[0].exact)

    def walk(remaining: list[int], prefix: GradedTensor | None):
        nonlocal total
        if not any(remaining):
            total = total + prefix
            return
        for i, left in enumerate(remaining):
            if left == 0:
                continue
            nxt = (
                items[i].truncate(degree)
                if prefix is None
                else tensor_mul(prefix, items[i], degree)
            )
            remaining[i] -= 1
            walk(remaining, nxt)
            remaining[i] += 1

    walk(list(counts), None)
    return total.scale(Fraction(1, math.factorial(n)))


def q_remainder(l_a: GradedTensor, l_b: GradedTensor, k: int) -> GradedTensor:
    """Everything in pi_{bk}(exp(l_a + l_b)) except the pure l_b^k / k! term.

    Sums RSym over the solutions of a x + b y = b k with x > 0, y >= 0.
    """
    l_a, l_b = _homogeneous(l_a), _homogeneous(l_b)
    a = l_a.homogeneous_degree()
    b = l_b.homogeneous_degree()
    if not 1 <= a < b:
        raise ValueError("degrees must satisfy 1 <= deg(l_a) < deg(l_b)")
    if k < 1:
        raise ValueError("k must be >= 1")
    target = b * k
    out = GradedTensor.zero(l_a.dim, target, l_a.exact)
    for x in range(1, target // a + 1):
        rem = target - a * x
        if rem < 0 or rem % b:
            continue
        y = rem // b
        spec = [(l_a, x)] + ([(l_b, y)] if y else [])
        out = out + reduced_sym(spec)
    return out


def admissible_pairs(a: int, b: int, k: int) -> list[tuple[int, int]]:
    """Solutions (x, y) of a x + b y = b k with x > 0; x is forced onto multiples of b/gcd."""
    r = math.gcd(a, b)
    out = []
    step = b // r
    x = step
    while a * x <= b * k:
        rem = b * k - a * x
        if rem % b == 0:
            out.append((x, rem // b))
        x += step
    return out


@dataclass
class OrthRow:
    k: int
    inner: object
    condition_holds: bool
    lower_bound: float
    lower_bound_sq: object


def orthogonality_check(l_a: GradedTensor, l_b: GradedTensor, kmax: int) -> list[OrthRow]:
    """Per k: <l_b^k, Q> with an exact-zero verdict whenever the odd condition holds.

    Inputs must be homogeneous Lie elements (checked).  The reported lower
    bound is ||l_b||_hs^k / k!, valid for the degree-bk signature norm when
    the inner product vanishes.
    """
    l_a, l_b = _homogeneous(l_a), _homogeneous(l_b)
    for name, x in (("l_a", l_a), ("l_b", l_b)):
        if not dynkin_check(x):
            raise ValueError(f"{name} is not a Lie element")
    a = l_a.homogeneous_degree()
    b = l_b.homogeneous_degree()
    if not a < b:
        raise ValueError("need deg(l_a) < deg(l_b)")
    r = math.gcd(a, b)
    condition = ((b - a) // r) % 2 == 1
    nsq = hs_norm_sq(l_b)
    rows = []
    for k in range(1, kmax + 1):
        q = q_remainder(l_a, l_b, k)
        power = tensor_power(l_b, k)
        inner = hs_inner(power, q)
        bound_sq = Fraction(nsq) ** k / Fraction(math.factorial(k)) ** 2
        rows.append(
            OrthRow(
                k=k,
                inner=inner,
                condition_holds=condition,
                lower_bound=math.sqrt(float(bound_sq)),
                lower_bound_sq=bound_sq,
            )
        )
    return rows


def rows_to_csv(rows: list[OrthRow], meta: str | None = None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["k", "inner_product", "condition_holds", "lower_bound"])
    for row in rows:
        inner = row.inner
        text = "0" if inner == 0 else repr(complex(inner)) if not isinstance(inner, (int, Fraction)) else str(inner)
        w.writerow([row.k, text, row.condition_holds, repr(row.lower_bound)])
    if meta:
        buf.write(f"# {meta}\n")
    return buf.getvalue()

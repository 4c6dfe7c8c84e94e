"""Free Lie algebra over R^d: Lyndon bases, bracket expansion, membership.

Bracket trees are nested tuples: a leaf is a letter (int in 1..d), an inner
node is a pair (left, right).  The concrete Hall family is the Lyndon basis
with the standard (right) factorization; arbitrary bracket expressions are
converted to Lyndon coordinates by an exact linear solve over word
coefficients.
"""

from __future__ import annotations

import re
from fractions import Fraction
from functools import lru_cache
from typing import Union

from .tensor import GradedTensor, GaussianRational, pack_word

Bracket = Union[int, tuple]

__all__ = [
    "Bracket",
    "bracket_degree",
    "bracket_str",
    "lyndon_words",
    "hall_basis",
    "expand_bracket",
    "dim_free_lie",
    "dynkin_check",
    "LiePoly",
    "parse_lie",
    "solve_exact",
]


def bracket_degree(t: Bracket) -> int:
    if isinstance(t, int):
        return 1
    return bracket_degree(t[0]) + bracket_degree(t[1])


def bracket_str(t: Bracket) -> str:
    if isinstance(t, int):
        return f"e{t}"
    return f"[{bracket_str(t[0])},{bracket_str(t[1])}]"


@lru_cache(maxsize=None)
def lyndon_words(dim: int, degree: int) -> tuple[tuple[int, ...], ...]:
    """All Lyndon words of the given length over 1..dim, lexicographic."""
    if dim < 1 or degree < 1:
        raise ValueError("dim and degree must be >= 1")
    words = []
    w = [1]
    while w:
        if len(w) == degree:
            words.append(tuple(w))
        # Duval's algorithm: next Lyndon word of length <= degree
        w = (w * (degree // len(w) + 1))[:degree]
        while w and w[-1] == dim:
            w.pop()
        if w:
            w[-1] += 1
    return tuple(words)


def _standard_bracketing(word: tuple[int, ...]) -> Bracket:
    if len(word) == 1:
        return word[0]
    # right factor = lexicographically smallest proper suffix (itself Lyndon)
    suffixes = [word[i:] for i in range(1, len(word))]
    v = min(suffixes)
    u = word[: len(word) - len(v)]
    return (_standard_bracketing(u), _standard_bracketing(v))


@lru_cache(maxsize=None)
def hall_basis(dim: int, degree: int) -> tuple[Bracket, ...]:
    """Lyndon bracketings of all Lyndon words of the given degree."""
    return tuple(_standard_bracketing(w) for w in lyndon_words(dim, degree))


@lru_cache(maxsize=None)
def _expand_keyed(t: Bracket, dim: int) -> tuple[tuple[int, int], ...]:
    if isinstance(t, int):
        if not 1 <= t <= dim:
            raise ValueError(f"letter {t} out of range 1..{dim}")
        return ((pack_word((t,), dim), 1),)
    left = dict(_expand_keyed(t[0], dim))
    right = dict(_expand_keyed(t[1], dim))
    nl, nr = bracket_degree(t[0]), bracket_degree(t[1])
    out: dict[int, int] = {}
    shift_r, shift_l = dim**nr, dim**nl
    for kl, cl in left.items():
        for kr, cr in right.items():
            k = kl * shift_r + kr
            out[k] = out.get(k, 0) + cl * cr
            k = kr * shift_l + kl
            out[k] = out.get(k, 0) - cl * cr
    return tuple(sorted((k, c) for k, c in out.items() if c))


def expand_bracket(t: Bracket, dim: int, trunc: int | None = None) -> GradedTensor:
    """Expand an iterated bracket into words, exact integer coefficients."""
    n = bracket_degree(t)
    if trunc is None:
        trunc = n
    return GradedTensor(dim, trunc, {n: dict(_expand_keyed(t, dim))}, exact=True)


def _mobius(n: int) -> int:
    if n == 1:
        return 1
    result, p = 1, 2
    while p * p <= n:
        if n % p == 0:
            n //= p
            if n % p == 0:
                return 0
            result = -result
        p += 1
    if n > 1:
        result = -result
    return result


def dim_free_lie(dim: int, degree: int) -> int:
    """Witt dimension (1/m) sum_{e|m} mu(e) d^(m/e)."""
    if dim < 1 or degree < 1:
        raise ValueError("dim and degree must be >= 1")
    total = sum(
        _mobius(e) * dim ** (degree // e) for e in range(1, degree + 1) if degree % e == 0
    )
    return total // degree


def _right_bracketing(word: tuple[int, ...], dim: int) -> dict[int, int]:
    # D(e_{i1} ... e_{in}) = [e_{i1}, [e_{i2}, [..., e_{in}]...]]
    t: Bracket = word[-1]
    for a in reversed(word[:-1]):
        t = (a, t)
    return dict(_expand_keyed(t, dim))


def dynkin_check(x: GradedTensor) -> bool:
    """True iff the right-bracketing map D satisfies D(x) = m x (exact mode)."""
    if not x.exact:
        raise ValueError("membership check requires exact mode")
    if x.is_zero():
        return True
    m = x.homogeneous_degree()
    if m == 0:
        return False
    from .tensor import unpack_word

    acc: dict[int, object] = {}
    for k, c in x.data[m].items():
        for kk, cc in _right_bracketing(unpack_word(k, m, x.dim), x.dim).items():
            acc[kk] = acc.get(kk, 0) + c * cc
    target = {k: m * c for k, c in x.data[m].items()}
    acc = {k: c for k, c in acc.items() if c != 0}
    return acc == target


def solve_exact(rows: list[list], rhs: list) -> list | None:
    """Solve the (possibly overdetermined) system rows * c = rhs exactly.

    Entries must live in a common field (Fraction / GaussianRational work).
    Returns the unique solution, or None if the system is inconsistent or
    underdetermined.
    """
    m = len(rows)
    n = len(rows[0]) if m else 0
    aug = [list(map(Fraction, r)) if _all_rat(r) else list(r) for r in rows]
    for i in range(m):
        aug[i] = aug[i] + [rhs[i]]
    pivots = []
    r = 0
    for col in range(n):
        piv = next((i for i in range(r, m) if aug[i][col] != 0), None)
        if piv is None:
            continue
        aug[r], aug[piv] = aug[piv], aug[r]
        inv = _inverse(aug[r][col])
        aug[r] = [v * inv for v in aug[r]]
        for i in range(m):
            if i != r and aug[i][col] != 0:
                f = aug[i][col]
                aug[i] = [a - f * b for a, b in zip(aug[i], aug[r])]
        pivots.append(col)
        r += 1
        if r == m:
            break
    if len(pivots) < n:
        return None
    for i in range(r, m):
        if aug[i][n] != 0:
            return None
    sol = [0] * n
    for i, col in enumerate(pivots):
        sol[col] = aug[i][n]
    return sol


def _all_rat(r) -> bool:
    return all(isinstance(v, (int, Fraction)) for v in r)


def _inverse(v):
    if isinstance(v, (int, Fraction)):
        return Fraction(1) / v
    return GaussianRational(1) / v


class LiePoly:
    """Lie polynomial in Lyndon coordinates, one coefficient vector per degree."""

    def __init__(self, dim: int, coeffs: dict[int, dict[int, object]] | None = None):
        if dim < 1:
            raise ValueError("dim must be >= 1")
        self.dim = dim
        self.coeffs: dict[int, dict[int, object]] = {}
        if coeffs:
            for n, vec in coeffs.items():
                clean = {i: c for i, c in vec.items() if c != 0}
                if clean:
                    self.coeffs[n] = clean

    @property
    def max_degree(self) -> int:
        return max(self.coeffs) if self.coeffs else 0

    def is_zero(self) -> bool:
        return not self.coeffs

    def homogeneous_part(self, n: int) -> "LiePoly":
        part = {n: dict(self.coeffs[n])} if n in self.coeffs else {}
        return LiePoly(self.dim, part)

    def __add__(self, other: "LiePoly") -> "LiePoly":
        if self.dim != other.dim:
            raise ValueError("dimension mismatch")
        out: dict[int, dict[int, object]] = {}
        for src in (self.coeffs, other.coeffs):
            for n, vec in src.items():
                dst = out.setdefault(n, {})
                for i, c in vec.items():
                    dst[i] = dst.get(i, 0) + c
        return LiePoly(self.dim, out)

    def scale(self, c) -> "LiePoly":
        return LiePoly(
            self.dim, {n: {i: c * v for i, v in vec.items()} for n, vec in self.coeffs.items()}
        )

    def __sub__(self, other: "LiePoly") -> "LiePoly":
        return self + other.scale(-1)

    def __eq__(self, other):
        if not isinstance(other, LiePoly):
            return NotImplemented
        return self.dim == other.dim and self.coeffs == other.coeffs

    def to_tensor(self, trunc: int | None = None) -> GradedTensor:
        if trunc is None:
            trunc = self.max_degree
        out = GradedTensor.zero(self.dim, trunc, exact=True)
        for n, vec in self.coeffs.items():
            if n > trunc:
                continue
            basis = hall_basis(self.dim, n)
            for i, c in vec.items():
                out = out + expand_bracket(basis[i], self.dim, trunc).scale(c)
        return out

    @classmethod
    def from_tensor(cls, x: GradedTensor) -> "LiePoly":
        """Convert an exact tensor to Lyndon coordinates; raises if not Lie."""
        if not x.exact:
            raise ValueError("conversion requires exact mode")
        if 0 in x.data:
            raise ValueError("Lie polynomials have no degree-0 part")
        coeffs: dict[int, dict[int, object]] = {}
        for n, table in x.data.items():
            basis = hall_basis(x.dim, n)
            expansions = [dict(_expand_keyed(t, x.dim)) for t in basis]
            keys = sorted(set().union(table, *expansions))
            rows = [[exp.get(k, 0) for exp in expansions] for k in keys]
            rhs = [table.get(k, 0) for k in keys]
            sol = solve_exact(rows, rhs)
            if sol is None:
                raise ValueError(f"degree-{n} component is not a Lie element")
            coeffs[n] = {i: c for i, c in enumerate(sol) if c != 0}
        return cls(x.dim, coeffs)

    @classmethod
    def from_brackets(cls, terms: list[tuple[object, Bracket]], dim: int) -> "LiePoly":
        x = GradedTensor.zero(dim, max(bracket_degree(t) for _, t in terms), exact=True)
        for c, t in terms:
            x = x + expand_bracket(t, dim, x.trunc).scale(c)
        return cls.from_tensor(x)

    def __repr__(self):
        parts = []
        for n in sorted(self.coeffs):
            basis = hall_basis(self.dim, n)
            for i in sorted(self.coeffs[n]):
                parts.append(f"{self.coeffs[n][i]}*{bracket_str(basis[i])}")
        return "<LiePoly " + (" + ".join(parts) if parts else "0") + ">"


_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+/\d+|\d+\.\d+|\d+)|(?P<letter>e\d+)|(?P<sym>[\[\],+*()-]))"
)


def _tokenize(text: str) -> list:
    tokens, pos = [], 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ValueError(f"cannot parse Lie expression at: {text[pos:pos+12]!r}")
        if m.lastgroup == "num":
            s = m.group("num")
            tokens.append(("num", Fraction(s)))
        elif m.lastgroup == "letter":
            tokens.append(("letter", int(m.group("letter")[1:])))
        else:
            tokens.append(("sym", m.group("sym")))
        pos = m.end()
    return tokens


class _Parser:
    """Recursive descent over: expr := ['+'|'-'] term (('+'|'-') term)*
    term := (num '*'?)* atom | num; atom := letter | '[' expr ',' expr ']' | '(' expr ')'
    """

    def __init__(self, tokens: list, dim: int, trunc: int):
        self.tokens = tokens
        self.pos = 0
        self.dim = dim
        self.trunc = trunc

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else (None, None)

    def take(self, kind=None, value=None):
        tok = self.peek()
        if kind and tok[0] != kind or value is not None and tok[1] != value:
            raise ValueError(f"unexpected token {tok} in Lie expression")
        self.pos += 1
        return tok

    def expr(self) -> GradedTensor:
        sign = 1
        if self.peek() == ("sym", "+"):
            self.take()
        elif self.peek() == ("sym", "-"):
            self.take()
            sign = -1
        acc = self.term().scale(sign)
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "sym":
            op = self.take()[1]
            t = self.term()
            acc = acc + (t if op == "+" else t.scale(-1))
        return acc

    def term(self) -> GradedTensor:
        coeff = Fraction(1)
        while self.peek()[0] == "num":
            coeff *= self.take()[1]
            if self.peek() == ("sym", "*"):
                self.take()
        kind, val = self.peek()
        if kind is None or (kind == "sym" and val in ("+", "-", ",", "]", ")")):
            raise ValueError("a Lie expression cannot contain a bare scalar term")
        return self.atom().scale(coeff)

    def atom(self) -> GradedTensor:
        kind, val = self.peek()
        if kind == "letter":
            self.take()
            return GradedTensor.letter(val, self.dim, self.trunc)
        if (kind, val) == ("sym", "["):
            self.take()
            a = self.expr()
            self.take("sym", ",")
            b = self.expr()
            self.take("sym", "]")
            from .tensor import tensor_mul

            return tensor_mul(a, b, self.trunc) - tensor_mul(b, a, self.trunc)
        if (kind, val) == ("sym", "("):
            self.take()
            a = self.expr()
            self.take("sym", ")")
            return a
        raise ValueError(f"unexpected token {(kind, val)} in Lie expression")


def _expr_degree(tokens: list) -> int:
    # crude but safe truncation bound: no term exceeds the total letter count
    return max(1, sum(1 for k, _ in tokens if k == "letter"))


def parse_lie(text: str, dim: int | None = None) -> LiePoly:
    """Parse the bracket grammar, e.g. ``e1 + 1/2*[e1,e2]``, into a LiePoly.

    Decimal coefficients are read exactly (0.5 becomes 1/2).  The alphabet
    size is inferred from the largest letter unless ``dim`` is given.
    """
    tokens = _tokenize(text)
    letters = [v for k, v in tokens if k == "letter"]
    if not letters:
        raise ValueError("expression contains no letters")
    inferred = max(letters)
    if dim is None:
        dim = max(inferred, 2)
    elif inferred > dim:
        raise ValueError(f"letter e{inferred} out of range for dim={dim}")
    trunc = _expr_degree(tokens)
    parser = _Parser(tokens, dim, trunc)
    x = parser.expr()
    if parser.pos != len(tokens):
        raise ValueError("trailing tokens in Lie expression")
    return LiePoly.from_tensor(x)

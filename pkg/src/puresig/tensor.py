"""Sparse truncated tensor algebra over R^d or C^d.

Elements are stored degree by degree as dictionaries mapping packed words to
coefficients.  Two scalar modes are supported: exact (int / Fraction /
GaussianRational) and floating (Python complex).  A word (i1, ..., in) with
letters in 1..d is packed into a single integer by folding base d, so the
memory cost of a degree-24 element over d=2 is proportional to the number of
words actually present.
"""

from __future__ import annotations

import json
import math
from fractions import Fraction
from typing import Iterable, Iterator

__all__ = [
    "GaussianRational",
    "GradedTensor",
    "TermBudgetError",
    "pack_word",
    "unpack_word",
    "tensor_mul",
    "truncated_exp",
    "truncated_log",
    "project",
    "norm",
    "hs_norm_sq",
    "hs_inner",
    "pairing",
    "alpha_involution",
    "shuffle_mul",
    "l1_dual_witness",
    "permute_slots",
]


class TermBudgetError(RuntimeError):
    """Raised when a computation would exceed the configured term budget."""


class GaussianRational:
    """Exact complex scalar with Fraction real and imaginary parts.

    Supports mixed arithmetic with int and Fraction so that mostly-real
    exact computations only pay for the complex representation where a
    genuinely complex value appears.
    """

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    @staticmethod
    def _coerce(x):
        if isinstance(x, GaussianRational):
            return x
        if isinstance(x, (int, Fraction)):
            return GaussianRational(x)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            if isinstance(other, (float, complex)):
                return complex(self) + other
            return NotImplemented
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            if isinstance(other, (float, complex)):
                return complex(self) - other
            return NotImplemented
        return GaussianRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            if isinstance(other, (float, complex)):
                return other - complex(self)
            return NotImplemented
        return GaussianRational(o.re - self.re, o.im - self.im)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            if isinstance(other, (float, complex)):
                return complex(self) * other
            return NotImplemented
        return GaussianRational(
            self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            if isinstance(other, (float, complex)):
                return complex(self) / other
            return NotImplemented
        d = o.re * o.re + o.im * o.im
        if d == 0:
            raise ZeroDivisionError("division by zero GaussianRational")
        return GaussianRational(
            (self.re * o.re + self.im * o.im) / d,
            (self.im * o.re - self.re * o.im) / d,
        )

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            if isinstance(other, (float, complex)):
                return other / complex(self)
            return NotImplemented
        return o / self

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __eq__(self, other):
        if isinstance(other, GaussianRational):
            return self.re == other.re and self.im == other.im
        if isinstance(other, (int, Fraction)):
            return self.im == 0 and self.re == other
        return NotImplemented

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __bool__(self):
        return self.re != 0 or self.im != 0

    def conjugate(self):
        return GaussianRational(self.re, -self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __abs__(self):
        # modulus of a Gaussian rational is in general irrational
        return math.hypot(float(self.re), float(self.im))

    def __repr__(self):
        return f"GaussianRational({self.re!r}, {self.im!r})"


def _is_exact(c) -> bool:
    return isinstance(c, (int, Fraction, GaussianRational))


def _conj(c):
    if isinstance(c, (int, Fraction)):
        return c
    return c.conjugate()


def _re(c):
    if isinstance(c, (int, Fraction)):
        return c
    if isinstance(c, GaussianRational):
        return c.re
    return c.real


def _im(c):
    if isinstance(c, (int, Fraction)):
        return Fraction(0)
    if isinstance(c, GaussianRational):
        return c.im
    return c.imag


def pack_word(letters: Iterable[int], dim: int) -> int:
    """Fold a word with letters in 1..dim into a base-dim integer key."""
    key = 0
    for a in letters:
        if not 1 <= a <= dim:
            raise ValueError(f"letter {a} out of range 1..{dim}")
        key = key * dim + (a - 1)
    return key


def unpack_word(key: int, degree: int, dim: int) -> tuple[int, ...]:
    letters = [0] * degree
    for i in range(degree - 1, -1, -1):
        key, r = divmod(key, dim)
        letters[i] = r + 1
    return tuple(letters)


class GradedTensor:
    """Element of the truncated tensor algebra T^(N)(F^d), canonical form.

    ``data`` maps degree -> {packed word -> coefficient}; zero coefficients
    and empty degree slots are never stored.
    """

    __slots__ = ("dim", "trunc", "data", "exact")

    def __init__(self, dim: int, trunc: int, data: dict | None = None, exact: bool = True):
        if dim < 1:
            raise ValueError("dim must be >= 1")
        if trunc < 0:
            raise ValueError("truncation level must be >= 0")
        self.dim = dim
        self.trunc = trunc
        self.exact = exact
        self.data: dict[int, dict[int, object]] = {}
        if data:
            for n, table in data.items():
                if n > trunc:
                    continue
                if exact:
                    clean = {
                        k: _canonical_coeff(c)
                        for k, c in table.items()
                        if not _coeff_is_zero(c)
                    }
                else:
                    clean = {k: c for k, c in table.items() if not _coeff_is_zero(c)}
                if clean:
                    self.data[n] = clean

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, dim: int, trunc: int, exact: bool = True) -> "GradedTensor":
        return cls(dim, trunc, {}, exact)

    @classmethod
    def unit(cls, dim: int, trunc: int, exact: bool = True) -> "GradedTensor":
        one = 1 if exact else complex(1.0)
        return cls(dim, trunc, {0: {0: one}}, exact)

    @classmethod
    def letter(cls, i: int, dim: int, trunc: int, exact: bool = True) -> "GradedTensor":
        one = 1 if exact else complex(1.0)
        return cls(dim, trunc, {1: {pack_word((i,), dim): one}}, exact)

    @classmethod
    def from_terms(cls, dim: int, trunc: int, terms: dict, exact: bool = True) -> "GradedTensor":
        """Build from a mapping of letter tuples to coefficients."""
        data: dict[int, dict[int, object]] = {}
        for word, c in terms.items():
            n = len(word)
            data.setdefault(n, {})
            key = pack_word(word, dim)
            data[n][key] = data[n].get(key, 0) + c
        return cls(dim, trunc, data, exact)

    # -- basic access ------------------------------------------------------

    def coeff(self, word: tuple[int, ...]):
        n = len(word)
        zero = 0 if self.exact else complex(0.0)
        return self.data.get(n, {}).get(pack_word(word, self.dim), zero)

    def terms(self) -> Iterator[tuple[tuple[int, ...], object]]:
        """Iterate (word, coefficient) sorted by (degree, word)."""
        for n in sorted(self.data):
            for key in sorted(self.data[n]):
                yield unpack_word(key, n, self.dim), self.data[n][key]

    def degrees(self) -> list[int]:
        return sorted(self.data)

    def num_terms(self) -> int:
        return sum(len(t) for t in self.data.values())

    def is_zero(self) -> bool:
        return not self.data

    def is_homogeneous(self) -> bool:
        return len(self.data) <= 1

    def homogeneous_degree(self) -> int:
        """Degree of a homogeneous element; raises on mixed input."""
        if self.is_zero():
            return 0
        if len(self.data) != 1:
            raise ValueError("element is not homogeneous")
        return next(iter(self.data))

    def scalar_part(self):
        zero = 0 if self.exact else complex(0.0)
        return self.data.get(0, {}).get(0, zero)

    # -- linear structure ----------------------------------------------------

    def _check_compat(self, other: "GradedTensor"):
        if self.dim != other.dim:
            raise ValueError(f"dimension mismatch: {self.dim} != {other.dim}")
        if self.exact != other.exact:
            raise ValueError("scalar mode mismatch (exact vs floating)")

    def __add__(self, other: "GradedTensor") -> "GradedTensor":
        self._check_compat(other)
        trunc = min(self.trunc, other.trunc)
        out: dict[int, dict[int, object]] = {}
        for src in (self.data, other.data):
            for n, table in src.items():
                if n > trunc:
                    continue
                dst = out.setdefault(n, {})
                for k, c in table.items():
                    dst[k] = dst.get(k, 0) + c
        return GradedTensor(self.dim, trunc, out, self.exact)

    def __sub__(self, other: "GradedTensor") -> "GradedTensor":
        return self + other.scale(-1)

    def __neg__(self) -> "GradedTensor":
        return self.scale(-1)

    def scale(self, c) -> "GradedTensor":
        if _coeff_is_zero(c):
            return GradedTensor.zero(self.dim, self.trunc, self.exact)
        out = {n: {k: c * v for k, v in t.items()} for n, t in self.data.items()}
        return GradedTensor(self.dim, self.trunc, out, self.exact)

    def truncate(self, trunc: int) -> "GradedTensor":
        return GradedTensor(self.dim, trunc, self.data, self.exact)

    def to_float(self) -> "GradedTensor":
        out = {n: {k: complex(v) for k, v in t.items()} for n, t in self.data.items()}
        return GradedTensor(self.dim, self.trunc, out, exact=False)

    def __eq__(self, other):
        if not isinstance(other, GradedTensor):
            return NotImplemented
        if self.dim != other.dim:
            return False
        if set(self.data) != set(other.data):
            return False
        for n, table in self.data.items():
            ot = other.data[n]
            if set(table) != set(ot):
                return False
            for k, c in table.items():
                if c != ot[k]:
                    return False
        return True

    def __hash__(self):
        return hash(
            tuple(
                (n, tuple(sorted(self.data[n].items(), key=lambda kv: kv[0])))
                for n in sorted(self.data)
            )
        )

    def __repr__(self):
        parts = []
        for word, c in self.terms():
            if len(parts) == 8:
                parts.append("...")
                break
            w = "".join(map(str, word)) if word else "1"
            parts.append(f"{c}*{w}")
        body = " + ".join(parts) if parts else "0"
        return f"<GradedTensor d={self.dim} N={self.trunc} {body}>"

    # -- serialization -------------------------------------------------------

    def to_json(self) -> str:
        """Canonical JSON form, terms sorted by (degree, lexicographic word)."""
        terms = []
        for word, c in self.terms():
            if self.exact:
                re, im = _re(c), _im(c)
                entry = {"word": list(word), "re": _frac_str(re), "im": _frac_str(im)}
            else:
                entry = {"word": list(word), "re": c.real, "im": c.imag}
            terms.append(entry)
        return json.dumps({"dim": self.dim, "trunc": self.trunc, "terms": terms})

    @classmethod
    def from_json(cls, text: str) -> "GradedTensor":
        obj = json.loads(text)
        data: dict[int, dict[int, object]] = {}
        exact = True
        for entry in obj["terms"]:
            re, im = entry["re"], entry["im"]
            if isinstance(re, str):
                c: object = (
                    Fraction(re) if Fraction(im) == 0 else GaussianRational(Fraction(re), Fraction(im))
                )
            else:
                c = complex(re, im)
                exact = False
            word = tuple(entry["word"])
            n = len(word)
            data.setdefault(n, {})[pack_word(word, obj["dim"])] = c
        return cls(obj["dim"], obj["trunc"], data, exact)


def _coeff_is_zero(c) -> bool:
    if isinstance(c, complex):
        return c == 0
    return not bool(c)


def _canonical_coeff(c):
    # canonical form prefers the simplest exact representation
    if isinstance(c, GaussianRational) and c.im == 0:
        c = c.re
    if isinstance(c, Fraction) and c.denominator == 1:
        return c.numerator
    return c


def _frac_str(f: Fraction) -> str:
    f = Fraction(f)
    return f"{f.numerator}/{f.denominator}" if f.denominator != 1 else str(f.numerator)


# -- products ---------------------------------------------------------------


def tensor_mul(a: GradedTensor, b: GradedTensor, trunc: int | None = None) -> GradedTensor:
    """Graded concatenation product truncated at ``trunc``."""
    a._check_compat(b)
    if trunc is None:
        trunc = min(a.trunc, b.trunc)
    d = a.dim
    out: dict[int, dict[int, object]] = {}
    powers = {n: d**n for n in b.data}
    for na, ta in a.data.items():
        if na > trunc:
            continue
        for nb, tb in b.data.items():
            n = na + nb
            if n > trunc:
                continue
            dst = out.setdefault(n, {})
            shift = powers[nb]
            for ka, ca in ta.items():
                base = ka * shift
                for kb, cb in tb.items():
                    k = base + kb
                    dst[k] = dst.get(k, 0) + ca * cb
    return GradedTensor(d, trunc, out, a.exact)


def _int_coeffs(x: GradedTensor) -> bool:
    return x.exact and all(
        isinstance(c, int) for t in x.data.values() for c in t.values()
    )


def truncated_exp(x: GradedTensor, trunc: int, term_budget: int | None = None) -> GradedTensor:
    """exp(x) = sum x^k / k! truncated at ``trunc``; requires pi_0(x) = 0."""
    if 0 in x.data:
        raise ValueError("exponential requires zero degree-0 part")
    d = x.dim
    if x.is_zero():
        return GradedTensor.unit(d, trunc, x.exact)
    if _int_coeffs(x):
        return _exp_int(x, trunc, term_budget)
    # Horner form: 1 + x(1 + x/2 (1 + x/3 (...)))
    acc = GradedTensor.unit(d, trunc, x.exact)
    for k in range(trunc, 0, -1):
        inv = Fraction(1, k) if x.exact else 1.0 / k
        acc = tensor_mul(x.scale(inv), acc, trunc) + GradedTensor.unit(d, trunc, x.exact)
        _check_budget(acc, term_budget)
    return acc


def _exp_int(x: GradedTensor, trunc: int, term_budget: int | None) -> GradedTensor:
    # Integer fast path: accumulate n! * pi_n(exp x) as integers, divide once.
    # pi_n(x^k) vanishes for k > n, so n!/k! below is always integral.
    d = x.dim
    num: dict[int, dict[int, int]] = {}
    fact = [math.factorial(n) for n in range(trunc + 1)]
    power = GradedTensor.unit(d, trunc, True)
    for k in range(1, trunc + 1):
        power = tensor_mul(power, x, trunc)
        if power.is_zero():
            break
        _check_budget(power, term_budget)
        for n, table in power.data.items():
            mult = fact[n] // fact[k]
            dst = num.setdefault(n, {})
            for key, c in table.items():
                dst[key] = dst.get(key, 0) + mult * c
        if term_budget is not None and sum(len(t) for t in num.values()) > term_budget:
            raise TermBudgetError("term budget exceeded while expanding exponential")
    out: dict[int, dict[int, object]] = {0: {0: 1}}
    for n, table in num.items():
        out[n] = {k: Fraction(c, fact[n]) for k, c in table.items()}
    return GradedTensor(d, trunc, out, True)


def _check_budget(x: GradedTensor, term_budget: int | None):
    if term_budget is not None and x.num_terms() > term_budget:
        raise TermBudgetError("term budget exceeded while expanding exponential")


def truncated_log(g: GradedTensor, trunc: int) -> GradedTensor:
    """log(g) for g with degree-0 part 1; inverse of truncated_exp."""
    if g.scalar_part() != 1:
        raise ValueError("logarithm requires degree-0 part equal to 1")
    d = g.dim
    u = GradedTensor(d, trunc, {n: t for n, t in g.data.items() if n > 0}, g.exact)
    # log(1+u) = u (1 - u (1/2 - u (1/3 - ...)))  evaluated by Horner
    acc = GradedTensor.zero(d, trunc, g.exact)
    for k in range(trunc, 0, -1):
        inv = Fraction(1, k) if g.exact else 1.0 / k
        unit_scaled = GradedTensor(d, trunc, {0: {0: inv}}, g.exact)
        acc = unit_scaled - tensor_mul(u, acc, trunc)
    # acc = sum_{j>=0} (-1)^j u^j /(j+1); log = u * acc
    return tensor_mul(u, acc, trunc)


def project(x: GradedTensor, n: int) -> GradedTensor:
    """Canonical projection onto the degree-n component."""
    if n > x.trunc:
        raise ValueError(f"degree {n} exceeds truncation {x.trunc}")
    data = {n: dict(x.data[n])} if n in x.data else {}
    return GradedTensor(x.dim, x.trunc, data, x.exact)


# -- norms and pairings -------------------------------------------------------


def norm(x: GradedTensor, which: str = "l1"):
    """l1 or Hilbert-Schmidt norm of a homogeneous element.

    In exact mode the l1 norm is only defined for real coefficients (the
    modulus of a complex rational is irrational) and is returned exactly;
    the HS norm is returned as a float, see hs_norm_sq for the exact square.
    """
    if not x.is_homogeneous():
        raise ValueError("norm requires a homogeneous element")
    if which == "l1":
        total = 0
        for table in x.data.values():
            for c in table.values():
                if isinstance(c, (int, Fraction)):
                    total += abs(c)
                elif isinstance(c, GaussianRational):
                    if c.im != 0:
                        raise ValueError("exact l1 norm requires real coefficients")
                    total += abs(c.re)
                else:
                    total += abs(c)
        return total
    if which == "hs":
        return math.sqrt(float(hs_norm_sq(x)))
    raise ValueError(f"unknown norm {which!r}")


def hs_norm_sq(x: GradedTensor):
    """Sum of squared coefficient magnitudes; exact in exact mode."""
    total = 0
    for table in x.data.values():
        for c in table.values():
            if isinstance(c, (int, Fraction)):
                total += c * c
            elif isinstance(c, GaussianRational):
                total += c.re * c.re + c.im * c.im
            else:
                total += c.real * c.real + c.imag * c.imag
    return total


def hs_inner(x: GradedTensor, y: GradedTensor):
    """Coefficientwise inner product <x, y>, conjugate-linear in y."""
    if x.dim != y.dim:
        raise ValueError("dimension mismatch")
    total = 0
    for n, table in x.data.items():
        ot = y.data.get(n)
        if not ot:
            continue
        for k, c in table.items():
            oc = ot.get(k)
            if oc is not None:
                total += c * _conj(oc)
    return total


def pairing(b: GradedTensor, x: GradedTensor):
    """Bilinear pairing sum_w b_w x_w (no conjugation); applies a dual functional."""
    if b.dim != x.dim:
        raise ValueError("dimension mismatch")
    total = 0
    for n, table in b.data.items():
        ot = x.data.get(n)
        if not ot:
            continue
        for k, c in table.items():
            oc = ot.get(k)
            if oc is not None:
                total += c * oc
    return total


def alpha_involution(x: GradedTensor) -> GradedTensor:
    """Word reversal with sign (-1)^degree, degree by degree."""
    d = x.dim
    out: dict[int, dict[int, object]] = {}
    for n, table in x.data.items():
        sign = -1 if n % 2 else 1
        dst = out.setdefault(n, {})
        for k, c in table.items():
            rk = pack_word(reversed(unpack_word(k, n, d)), d)
            dst[rk] = dst.get(rk, 0) + sign * c
    return GradedTensor(d, x.trunc, out, x.exact)


def _shuffle_words(u: tuple, v: tuple, memo: dict) -> dict:
    if not u:
        return {v: 1}
    if not v:
        return {u: 1}
    key = (u, v)
    hit = memo.get(key)
    if hit is not None:
        return hit
    out: dict = {}
    for w, c in _shuffle_words(u[:-1], v, memo).items():
        w2 = w + (u[-1],)
        out[w2] = out.get(w2, 0) + c
    for w, c in _shuffle_words(u, v[:-1], memo).items():
        w2 = w + (v[-1],)
        out[w2] = out.get(w2, 0) + c
    memo[key] = out
    return out


def shuffle_mul(a: GradedTensor, b: GradedTensor, trunc: int | None = None) -> GradedTensor:
    """Bilinear shuffle product, truncated at ``trunc``."""
    a._check_compat(b)
    if trunc is None:
        trunc = min(a.trunc, b.trunc)
    d = a.dim
    memo: dict = {}
    out: dict[int, dict[int, object]] = {}
    for na, ta in a.data.items():
        for nb, tb in b.data.items():
            n = na + nb
            if n > trunc:
                continue
            dst = out.setdefault(n, {})
            for ka, ca in ta.items():
                wa = unpack_word(ka, na, d)
                for kb, cb in tb.items():
                    wb = unpack_word(kb, nb, d)
                    cab = ca * cb
                    for w, mult in _shuffle_words(wa, wb, memo).items():
                        k = pack_word(w, d)
                        dst[k] = dst.get(k, 0) + mult * cab
    return GradedTensor(d, trunc, out, a.exact)


def l1_dual_witness(x: GradedTensor) -> GradedTensor:
    """Sign functional B with all |B_w| <= 1 and pairing(B, x) = norm(x, 'l1').

    Only defined for homogeneous elements with real coefficients.
    """
    if not x.is_homogeneous():
        raise ValueError("dual witness requires a homogeneous element")
    out: dict[int, dict[int, object]] = {}
    for n, table in x.data.items():
        dst = out.setdefault(n, {})
        for k, c in table.items():
            if isinstance(c, GaussianRational):
                if c.im != 0:
                    raise ValueError("dual witness requires real coefficients")
                c = c.re
            elif isinstance(c, complex):
                if c.imag != 0:
                    raise ValueError("dual witness requires real coefficients")
                c = c.real
            dst[k] = 1 if c > 0 else -1
    return GradedTensor(x.dim, x.trunc, out, x.exact)


def permute_slots(x: GradedTensor, sigma: list[int]) -> GradedTensor:
    """Apply a permutation of tensor slots to a homogeneous element.

    ``sigma`` lists, for each output slot, the input slot it reads from
    (0-based), so the letter in output position i is word[sigma[i]].
    """
    n = x.homogeneous_degree()
    if sorted(sigma) != list(range(n)):
        raise ValueError("sigma must be a permutation of the tensor slots")
    d = x.dim
    out: dict[int, dict[int, object]] = {n: {}}
    for k, c in x.data.get(n, {}).items():
        w = unpack_word(k, n, d)
        pw = tuple(w[sigma[i]] for i in range(n))
        pk = pack_word(pw, d)
        out[n][pk] = out[n].get(pk, 0) + c
    return GradedTensor(d, x.trunc, out, x.exact)

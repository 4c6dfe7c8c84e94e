"""Signatures of exponential paths and normalized tail sequences.

The path X_t = exp(t*l) on [0,1] has signature exp(l); its degree-n
component feeds the normalized tail value t_n = ((n/m)! ||X^n||)^(m/n),
whose limsup the finite-degree window supremum estimates.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .lie import LiePoly
from .tensor import GradedTensor, TermBudgetError, norm, project, truncated_exp

__all__ = [
    "PureRoughPath",
    "as_tensor",
    "signature",
    "signature_component",
    "dense_norm_table",
    "TailReport",
    "tail_sequence",
    "upper_bound_series",
    "local_variation",
    "neoclassical_check",
    "DEFAULT_TERM_BUDGET",
]

DEFAULT_TERM_BUDGET = 50_000_000


def as_tensor(l, trunc: int | None = None) -> GradedTensor:
    """Accept a PureRoughPath, LiePoly, or GradedTensor with zero degree-0 part."""
    if isinstance(l, PureRoughPath):
        l = l.l
    if isinstance(l, LiePoly):
        return l.to_tensor(trunc if trunc is not None else l.max_degree)
    if isinstance(l, GradedTensor):
        if 0 in l.data:
            raise ValueError("degree-0 part must vanish")
        return l if trunc is None else l.truncate(trunc)
    raise TypeError(f"expected LiePoly or GradedTensor, got {type(l).__name__}")


class PureRoughPath:
    """The path X_t = exp(t l) on [0, 1] with declared roughness m.

    ``l`` may be a LiePoly, or a raw GradedTensor with zero degree-0 part for
    the non-geometric variants of the upper bound.  The highest declared
    degree must actually be present.
    """

    def __init__(self, l, m: int):
        if m < 1:
            raise ValueError("roughness m must be >= 1")
        x = as_tensor(l)
        if any(n > m for n in x.degrees()):
            raise ValueError(f"l has components above the declared roughness {m}")
        x = x.truncate(m)
        if project(x, m).is_zero():
            raise ValueError(f"declared roughness {m} but pi_{m}(l) = 0")
        self.l = x
        self.m = m

    def at(self, t, trunc: int | None = None) -> GradedTensor:
        """X_t = exp(t l), truncated at ``trunc`` (default m)."""
        n = self.m if trunc is None else trunc
        return truncated_exp(self.l.truncate(n).scale(t), n)

    def increment(self, s, t, trunc: int | None = None) -> GradedTensor:
        """X_{s,t} = exp((t-s) l)."""
        return self.at(t - s, trunc)

    def signature(self, trunc: int, term_budget: int | None = DEFAULT_TERM_BUDGET) -> GradedTensor:
        return signature(self.l, trunc, term_budget)

    def __repr__(self):
        return f"<PureRoughPath m={self.m} d={self.l.dim}>"


def signature(l, trunc: int, term_budget: int | None = DEFAULT_TERM_BUDGET) -> GradedTensor:
    """exp(l) truncated at the given degree."""
    return truncated_exp(as_tensor(l, trunc).truncate(trunc), trunc, term_budget)


def signature_component(l, n: int, term_budget: int | None = DEFAULT_TERM_BUDGET) -> GradedTensor:
    """pi_n(exp(l))."""
    if n < 0:
        raise ValueError("degree must be >= 0")
    return project(signature(l, n, term_budget), n)


def dense_norm_table(l, trunc: int, term_budget: int | None = DEFAULT_TERM_BUDGET) -> dict[int, tuple[float, float]]:
    """Per-degree (l1, hs) norms of exp(l) in double precision.

    Holds every degree-n coefficient slice of exp(l) as one flat array of
    length d^n, so appending a degree-r block of l is a strided vector add.
    This makes dense truncations (all d^n words present) feasible where the
    sparse dictionaries would thrash.
    """
    x = as_tensor(l, trunc)
    d = x.dim
    total_cells = sum(d**n for n in range(trunc + 1))
    if term_budget is not None and total_cells > term_budget:
        raise TermBudgetError(
            f"dense table would hold {total_cells} coefficients, over the budget {term_budget}"
        )
    is_real = all(
        not isinstance(c, complex) or c.imag == 0 for t in x.data.values() for c in t.values()
    )
    dtype = np.float64 if is_real else np.complex128
    blocks = [
        (r, key, (complex(c).real if is_real else complex(c)))
        for r, table in x.data.items()
        for key, c in table.items()
    ]
    term: dict[int, np.ndarray] = {0: np.ones(1, dtype=dtype)}
    acc: dict[int, np.ndarray] = {n: np.zeros(d**n, dtype=dtype) for n in range(trunc + 1)}
    acc[0][0] = 1.0
    for k in range(1, trunc + 1):
        cur: dict[int, np.ndarray] = {}
        for n, arr in term.items():
            for r, key, c in blocks:
                nn = n + r
                if nn > trunc:
                    continue
                tgt = cur.get(nn)
                if tgt is None:
                    tgt = cur[nn] = np.zeros(d**nn, dtype=dtype)
                tgt.reshape(-1, d**r)[:, key] += (c / k) * arr
        if not cur:
            break
        for n, arr in cur.items():
            acc[n] += arr
        term = cur
    out = {}
    for n in range(trunc + 1):
        a = np.abs(acc[n])
        out[n] = (float(a.sum()), float(math.sqrt((a * a).sum())))
    return out


def gamma_factorial(x: float) -> float:
    """x! for real x >= 0 via the Gamma function."""
    return math.gamma(x + 1.0)


def _log_norm(value) -> float:
    """log of a positive norm value that may be a huge int or Fraction."""
    if isinstance(value, int):
        return math.log(value) if value > 0 else -math.inf
    if isinstance(value, Fraction):
        return (
            math.log(value.numerator) - math.log(value.denominator)
            if value > 0
            else -math.inf
        )
    v = float(value)
    return math.log(v) if v > 0 else -math.inf


@dataclass
class TailReport:
    """Per-degree signature norms and normalized tail values."""

    m: int
    which_norm: str
    n0: int
    degrees: list[int] = field(default_factory=list)
    norms: list[object] = field(default_factory=list)
    t_values: list[float] = field(default_factory=list)
    window_sup: float = 0.0

    def to_csv(self, meta: str | None = None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "norm", "t_n", "window_sup"])
        for n, v, t in zip(self.degrees, self.norms, self.t_values):
            w.writerow([n, repr(float(v)), repr(t), repr(self.window_sup)])
        if meta:
            buf.write(f"# {meta}\n")
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "norm": self.which_norm,
            "n0": self.n0,
            "rows": [
                {"n": n, "norm": float(v), "t_n": t}
                for n, v, t in zip(self.degrees, self.norms, self.t_values)
            ],
            "window_sup": self.window_sup,
        }


def tail_sequence(
    l,
    m: int,
    trunc: int,
    which_norm: str = "l1",
    n0: int | None = None,
    term_budget: int | None = DEFAULT_TERM_BUDGET,
    dense: bool = False,
) -> TailReport:
    """Normalized tail values t_n for n <= trunc and their window supremum.

    The window supremum over n in [n0, trunc] (n0 defaults to ceil(trunc/2))
    is the finite-degree stand-in for the limit-superior tail functional.
    Degrees not divisible by m are kept; their factorial uses the Gamma
    function.  ``dense`` switches to the double-precision dense kernel, which
    is the practical choice when most words up to d^trunc are populated.
    """
    if m < 1:
        raise ValueError("roughness m must be >= 1")
    if n0 is None:
        n0 = (trunc + 1) // 2
    if n0 > trunc:
        raise ValueError("window start exceeds truncation")
    if dense:
        table = dense_norm_table(l, trunc, term_budget)
    else:
        sig = signature(l, trunc, term_budget)
    report = TailReport(m=m, which_norm=which_norm, n0=n0)
    for n in range(1, trunc + 1):
        if dense:
            v = table[n][0 if which_norm == "l1" else 1]
        else:
            v = norm(project(sig, n), which_norm)
        if v == 0:
            t = 0.0
        else:
            logf = math.lgamma(n / m + 1.0)
            t = math.exp((m / n) * (logf + _log_norm(v)))
        report.degrees.append(n)
        report.norms.append(v)
        report.t_values.append(t)
    report.window_sup = max(
        (t for n, t in zip(report.degrees, report.t_values) if n >= n0), default=0.0
    )
    return report


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def upper_bound_series(l, m: int, n: int, which_norm: str = "l1") -> float:
    """Combinatorial majorant of ||X^n|| from the degreewise norms of l.

    Sums ||l_1||^{k_1} ||l_2||^{k_2/2} ... / (k_1! (k_2/2)! ...) over all
    compositions k_1 + ... + k_m = n, with real factorials via Gamma.
    """
    x = as_tensor(l)
    if any(r > m for r in x.degrees()):
        raise ValueError(f"l has components above the declared degree m={m}")
    norms = []
    for r in range(1, m + 1):
        part = project(x, r) if r <= x.trunc else None
        norms.append(float(norm(part, which_norm)) if part is not None else 0.0)
    total = 0.0
    for ks in _compositions(n, m):
        term = 1.0
        for r, k in enumerate(ks, start=1):
            if k == 0:
                continue
            a = norms[r - 1]
            if a == 0.0:
                term = 0.0
                break
            term *= a ** (k / r) / gamma_factorial(k / r)
        total += term
    return total


def local_variation(l, m: int, max_level: int, which_norm: str = "l1") -> list[float]:
    """Variation sums over uniform dyadic partitions with 2^j intervals.

    Returns, for j = 0..max_level, sum_k (sum_i ||X^k_{t_{i-1},t_i}||^{m/k})^{k/m}
    with every increment equal to exp(2^-j l) truncated at degree m.
    """
    x = as_tensor(l, m).truncate(m)
    values = []
    for j in range(max_level + 1):
        pieces = 2**j
        h = Fraction(1, pieces)
        inc = truncated_exp(x.scale(h), m)
        total = 0.0
        for k in range(1, m + 1):
            v = float(norm(project(inc, k), which_norm))
            if v > 0:
                total += (pieces * v ** (m / k)) ** (k / m)
        values.append(total)
    return values


def neoclassical_check(a: list[float], p: float, n: int) -> tuple[bool, float, float]:
    """Both sides of the composition inequality for positive a_i and p >= 1.

    Left: sum over k_1+...+k_m = n of prod a_i^{k_i/p} / (k_i/p)!.
    Right: p^{m-1} (a_1+...+a_m)^{n/p} / (n/p)!.
    """
    if any(v <= 0 for v in a):
        raise ValueError("entries must be positive")
    if p < 1:
        raise ValueError("p must be >= 1")
    m = len(a)
    lhs = 0.0
    for ks in _compositions(n, m):
        term = 1.0
        for v, k in zip(a, ks):
            term *= v ** (k / p) / gamma_factorial(k / p)
        lhs += term
    rhs = p ** (m - 1) * sum(a) ** (n / p) / gamma_factorial(n / p)
    return lhs <= rhs * (1 + 1e-12), lhs, rhs

"""Lie-algebraic developments: tuples of complex matrices M_i = Phi(e_i).

A development extends multiplicatively to the tensor algebra,
Phi(v1 x ... x vn) = Phi(v1)...Phi(vn), and its operator norm is
max_i ||M_i|| because the source carries the l1 norm over the letter basis.
Matrices are stored as nested tuples so that exact scalars (int, Fraction,
GaussianRational) and Python complex flow through the same arithmetic;
numpy enters only for eigenvalues, singular values and matrix exponentials.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import scipy.linalg

from .lie import Bracket, LiePoly, expand_bracket, hall_basis, solve_exact
from .signature import as_tensor
from .tensor import GaussianRational, GradedTensor, project

__all__ = [
    "Development",
    "GrowthCurve",
    "CartanReport",
    "PerturbationTrack",
    "Preset",
    "from_matrices",
    "apply_tensor",
    "operator_norm",
    "matrix_norm",
    "eigen_lower_bound",
    "sl_cyclic_embedding",
    "block_diagonal_embedding",
    "so5_embedding",
    "so5_weight_decomposition",
    "preset_development",
    "growth_curve",
    "perturbation_track",
    "exterior_power_rep",
    "cartan_check",
    "separate_points",
    "DEGREE4_HALL",
    "PRESET_CASES",
]


# -- small matrix helpers over exact or complex scalars -----------------------


def _mat(rows) -> tuple:
    return tuple(tuple(r) for r in rows)


def mat_zeros(n: int, exact: bool = True) -> tuple:
    z = 0 if exact else complex(0.0)
    return _mat([[z] * n for _ in range(n)])


def mat_identity(n: int, exact: bool = True) -> tuple:
    one, z = (1, 0) if exact else (complex(1.0), complex(0.0))
    return _mat([[one if i == j else z for j in range(n)] for i in range(n)])


def mat_add(a: tuple, b: tuple) -> tuple:
    return _mat([[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)])


def mat_sub(a: tuple, b: tuple) -> tuple:
    return _mat([[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)])


def mat_scale(a: tuple, c) -> tuple:
    return _mat([[c * x for x in row] for row in a])


def mat_mul(a: tuple, b: tuple) -> tuple:
    n = len(a)
    bt = list(zip(*b))
    return _mat(
        [[sum(x * y for x, y in zip(row, col)) for col in bt] for row in a]
    )


def mat_to_numpy(a: tuple) -> np.ndarray:
    return np.array([[complex(x) for x in row] for row in a], dtype=complex)


def mat_max_abs(a: tuple) -> float:
    return max((abs(complex(x)) for row in a for x in row), default=0.0)


def _entry_is_exact(x) -> bool:
    return isinstance(x, (int, Fraction, GaussianRational))


class Development:
    """d complex k x k matrices plus the norm convention on the target space."""

    def __init__(self, matrices, w_norm: str = "l1", kind: str = "custom", meta: dict | None = None):
        mats = [_mat(m) if not isinstance(m, np.ndarray) else _mat(m.tolist()) for m in matrices]
        if not mats:
            raise ValueError("a development needs at least one matrix")
        k = len(mats[0])
        for m in mats:
            if len(m) != k or any(len(row) != k for row in m):
                raise ValueError("all matrices must be square and of equal size")
        if w_norm not in ("l1", "l2"):
            raise ValueError("w_norm must be 'l1' or 'l2'")
        self.matrices = tuple(mats)
        self.w_norm = w_norm
        self.kind = kind
        self.meta = dict(meta or {})

    @property
    def dim(self) -> int:
        return len(self.matrices)

    @property
    def size(self) -> int:
        return len(self.matrices[0])

    @property
    def exact(self) -> bool:
        return all(_entry_is_exact(x) for m in self.matrices for row in m for x in row)

    def numpy(self) -> list[np.ndarray]:
        return [mat_to_numpy(m) for m in self.matrices]

    def scale(self, c) -> "Development":
        return Development(
            [mat_scale(m, c) for m in self.matrices], self.w_norm, self.kind, self.meta
        )

    def to_float(self) -> "Development":
        return Development(self.numpy(), self.w_norm, self.kind, self.meta)

    def weight_value(self, p: tuple):
        """Distinguished weight of a Cartan image p under this development.

        For sl-type embeddings this is the sum of the first diagonal entry of
        each block; for the so(5) embedding it is the eigenvalue on the
        distinguished common eigenvector.
        """
        if self.kind in ("sl_cyclic", "sl_block", "sl4_sharp"):
            m = self.meta.get("m", self.size)
            return sum(p[j][j] for j in range(0, self.size, m))
        if self.kind == "so5":
            x, y = so5_weight_decomposition(p)
            i = GaussianRational(0, 1) if _entry_is_exact(y) else 1j
            return i * y
        raise ValueError(f"no weight convention for development kind {self.kind!r}")

    def to_json(self) -> str:
        mats = [
            [[[complex(x).real, complex(x).imag] for x in row] for row in m]
            for m in self.matrices
        ]
        return json.dumps({"k": self.size, "w_norm": self.w_norm, "matrices": mats})

    @classmethod
    def from_json(cls, text: str) -> "Development":
        obj = json.loads(text)
        mats = [
            [[complex(re, im) for re, im in row] for row in m] for m in obj["matrices"]
        ]
        return cls(mats, obj["w_norm"])

    def __repr__(self):
        return f"<Development d={self.dim} k={self.size} w_norm={self.w_norm} kind={self.kind}>"


def from_matrices(matrices, w_norm: str = "l1") -> Development:
    return Development(matrices, w_norm)


def apply_tensor(dev: Development, x: GradedTensor) -> tuple:
    """Sum over stored words of coeff * M_{i1} ... M_{in}, plus scalar * Id."""
    if x.dim != dev.dim:
        raise ValueError(f"dimension mismatch: tensor {x.dim}, development {dev.dim}")
    exact = dev.exact and x.exact
    k = dev.size
    if exact:
        mats = dev.matrices
    else:
        mats = tuple(_mat(mat_to_numpy(m).tolist()) for m in dev.matrices)
        x = x.to_float()
    out = mat_zeros(k, exact)
    scalar = x.scalar_part()
    if scalar != 0:
        out = mat_add(out, mat_scale(mat_identity(k, exact), scalar))
    from .tensor import unpack_word

    for n, table in x.data.items():
        if n == 0:
            continue
        for key, c in table.items():
            word = unpack_word(key, n, x.dim)
            prod = mats[word[0] - 1]
            for a in word[1:]:
                prod = mat_mul(prod, mats[a - 1])
            out = mat_add(out, mat_scale(prod, c))
    return out


def matrix_norm(m, w_norm: str):
    """Operator norm of one matrix: max column abs sum (l1) or top singular value (l2).

    For l1 with exact real-rational entries the result is exact.
    """
    if w_norm == "l1":
        if not isinstance(m, np.ndarray) and all(
            isinstance(x, (int, Fraction)) for row in m for x in row
        ):
            cols = list(zip(*m))
            return max((sum(abs(x) for x in col) for col in cols), default=Fraction(0))
        a = m if isinstance(m, np.ndarray) else mat_to_numpy(m)
        return float(np.abs(a).sum(axis=0).max()) if a.size else 0.0
    if w_norm == "l2":
        a = m if isinstance(m, np.ndarray) else mat_to_numpy(m)
        return float(np.linalg.norm(a, 2)) if a.size else 0.0
    raise ValueError(f"unknown norm {w_norm!r}")


def operator_norm(dev: Development):
    """max_i ||Phi(e_i)||, valid because the source carries the l1 letter norm."""
    return max(matrix_norm(m, dev.w_norm) for m in dev.matrices)


def eigen_lower_bound(dev: Development, l, m: int) -> float:
    """sup Re(spectrum(Phi(pi_m(l)))) / ||Phi||^m."""
    op = float(operator_norm(dev))
    if op == 0.0:
        raise ValueError("development is zero")
    x = as_tensor(l)
    lm = project(x, m)
    e = apply_tensor(dev, lm)
    eigs = np.linalg.eigvals(mat_to_numpy(e))
    return float(eigs.real.max()) / op**m


# -- root-pattern embeddings ---------------------------------------------------


def sl_cyclic_embedding(m: int, vectors: list, w_norm: str = "l1") -> Development:
    """One m x m matrix per letter: superdiagonal a_1..a_{m-1}, corner a_m.

    Iterated brackets of degree m of such matrices are diagonal, which is what
    makes these embeddings useful for eigenvalue lower bounds.
    """
    mats = []
    for a in vectors:
        a = list(a)
        if len(a) != m:
            raise ValueError(f"parameter vector must have length {m}")
        exact = all(_entry_is_exact(x) for x in a)
        rows = [list(row) for row in mat_zeros(m, exact)]
        for i in range(m - 1):
            rows[i][i + 1] = a[i]
        rows[m - 1][0] = a[m - 1] if m > 1 else a[0]
        mats.append(rows)
    return Development(mats, w_norm, kind="sl_cyclic", meta={"m": m, "blocks": 1})


def block_diagonal_embedding(blocks: list, m: int, w_norm: str = "l1") -> Development:
    """Assemble k sl-cyclic blocks per letter into km x km block-diagonal matrices."""
    counts = {len(per_letter) for per_letter in blocks}
    if len(counts) != 1:
        raise ValueError("every letter needs the same number of blocks")
    k = counts.pop()
    mats = []
    for per_letter in blocks:
        exact = all(_entry_is_exact(x) for vec in per_letter for x in vec)
        rows = [list(row) for row in mat_zeros(k * m, exact)]
        for b, vec in enumerate(per_letter):
            if len(vec) != m:
                raise ValueError(f"block parameter vector must have length {m}")
            off = b * m
            for i in range(m - 1):
                rows[off + i][off + i + 1] = vec[i]
            rows[off + m - 1][off] = vec[m - 1] if m > 1 else vec[0]
        mats.append(rows)
    return Development(mats, w_norm, kind="sl_block", meta={"m": m, "blocks": k})


def _gr(re=0, im=0) -> GaussianRational:
    return GaussianRational(Fraction(re), Fraction(im))


def _gr_mat(entries) -> tuple:
    return _mat([[_gr(*e) if isinstance(e, tuple) else _gr(e) for e in row] for row in entries])


# Cartan generators and root vectors of the 5 x 5 skew-symmetric picture.
SO5_H1 = _gr_mat([
    [0, 1, 0, 0, 0],
    [-1, 0, 0, 0, 0],
    [0, 0, 0, 0, 0],
    [0, 0, 0, 0, 0],
    [0, 0, 0, 0, 0],
])
SO5_H2 = _gr_mat([
    [0, 0, 0, 0, 0],
    [0, 0, 0, 0, 0],
    [0, 0, 0, 1, 0],
    [0, 0, -1, 0, 0],
    [0, 0, 0, 0, 0],
])
SO5_X_ALPHA = _gr_mat([
    [0, 0, 0, 0, 0],
    [0, 0, 0, 0, 0],
    [0, 0, 0, 0, 1],
    [0, 0, 0, 0, (0, 1)],
    [0, 0, -1, (0, -1), 0],
])
SO5_X_BETA = _gr_mat([
    [0, 0, -1, (0, 1), 0],
    [0, 0, (0, 1), 1, 0],
    [1, (0, -1), 0, 0, 0],
    [(0, -1), -1, 0, 0, 0],
    [0, 0, 0, 0, 0],
])
SO5_X_GAMMA = _gr_mat([
    [0, 0, -1, (0, 1), 0],
    [0, 0, (0, -1), -1, 0],
    [1, (0, 1), 0, 0, 0],
    [(0, -1), 1, 0, 0, 0],
    [0, 0, 0, 0, 0],
])

# Common eigenbasis w_1..w_5 of the Cartan images, rows in C^5.
SO5_EIGENBASIS = (
    (0, 0, 0, 0, 1),
    (1j, 1, 0, 0, 0),
    (-1j, 1, 0, 0, 0),
    (0, 0, 1j, 1, 0),
    (0, 0, -1j, 1, 0),
)


def so5_embedding(a: tuple, b: tuple, w_norm: str = "l2") -> Development:
    """Send the two letters to a1 X_alpha + a2 X_beta + a3 X_gamma (resp. b)."""
    if len(a) != 3 or len(b) != 3:
        raise ValueError("each letter takes three parameters")

    def build(params):
        exact = all(_entry_is_exact(x) for x in params)
        gens = (SO5_X_ALPHA, SO5_X_BETA, SO5_X_GAMMA)
        acc = mat_zeros(5, exact)
        for c, g in zip(params, gens):
            gg = g if exact else _mat(mat_to_numpy(g).tolist())
            acc = mat_add(acc, mat_scale(gg, c))
        return acc

    return Development([build(a), build(b)], w_norm, kind="so5", meta={"m": 4})


def so5_weight_decomposition(p: tuple):
    """Write a Cartan element p as x H1 + y H2 and return (x, y).

    Reads off the two generating entries; use cartan_check to certify that
    the remainder vanishes.
    """
    return p[0][1], p[2][3]


# -- presets from the low-degree constructions ---------------------------------

DEGREE4_HALL: tuple[Bracket, ...] = (
    ((1, (1, 2)), 1),     # [[e1,[e1,e2]],e1]
    (((1, 2), 2), 2),     # [[[e1,e2],e2],e2]
    (1, ((1, 2), 2)),     # [e1,[[e1,e2],e2]]
)

DEGREE3_HALL: tuple[Bracket, ...] = (
    (1, (1, 2)),          # [e1,[e1,e2]]
    ((1, 2), 2),          # [[e1,e2],e2]
)

PRESET_CASES = ("deg2", "deg3", "deg4_so5", "deg4_sharp_c3zero")

_SL4_SHARP_A = (
    (0, 1, 0, 0),
    (0, 0, 1, 0),
    (0, 0, 0, 1),
    (-1, 0, 0, 0),
)
_SL4_SHARP_B = (
    (0, 1, 0, 0),
    (0, 0, -1, 0),
    (0, 0, 0, 1),
    (1, 0, 0, 0),
)


@dataclass
class Preset:
    """A ready-made development together with its certified targets."""

    name: str
    signs: str
    dev: Development
    hall: tuple[Bracket, ...]
    targets: list
    expected_norm: float
    expected_factor: float | None = None
    dev_exact: Development | None = None
    exact_scale: Fraction | None = None  # Phi(h) true value = exact value * scale


def _parse_signs(signs: str, count: int) -> list[int]:
    if len(signs) != count or any(c not in "+-" for c in signs):
        raise ValueError(f"signs must be {count} characters from '+-', got {signs!r}")
    return [1 if c == "+" else -1 for c in signs]


def preset_development(case: str, signs: str | None = None) -> Preset:
    """Install the known sharp low-degree constructions with their parameter values."""
    if case == "deg2":
        (s,) = _parse_signs(signs or "+", 1)
        dev = sl_cyclic_embedding(2, [(1, 1), (-s, s)])
        return Preset("deg2", signs or "+", dev, (hall_basis(2, 2)[0],), [2 * s], 1.0, 1.0)

    if case == "deg3":
        s1, s2 = _parse_signs(signs or "++", 2)
        # sign cases follow from the base one by flipping letters:
        # e1 -> -e1 flips the second target only, e2 -> -e2 the first only
        a, b = (1, 1, -1), (-1, 1, 1)
        if s1 < 0:
            b = tuple(-x for x in b)
        if s2 < 0:
            a = tuple(-x for x in a)
        dev = sl_cyclic_embedding(3, [a, b])
        return Preset("deg3", signs or "++", dev, DEGREE3_HALL, [4 * s1, 4 * s2], 1.0, 1.0)

    if case == "deg4_so5":
        s1, s2, s3 = _parse_signs(signs or "+++", 3)
        if s1 * s2 < 0:
            raise ValueError("the so(5) preset covers sign patterns with c1*c2 >= 0 only")
        # rationalized parameters; the true ones carry a common factor 10^(-1/4)
        ar = (_gr(2), _gr(Fraction(1, 2)), _gr(Fraction(1, 2)))
        br = (_gr(-1), _gr(1), _gr(1))
        # rotating F by exp(i pi/4) negates all three degree-4 targets and
        # keeps singular values; flipping e2 negates targets 1 and 2 only
        rotated = s3 < 0
        if (s1 < 0) != rotated:
            br = tuple(-x for x in br)
        scale = Fraction(1, 10)  # (10^(-1/4))^4
        dev_exact = None if rotated else so5_embedding(ar, br)
        af = tuple(complex(x) for x in ar)
        bf = tuple(complex(x) for x in br)
        if rotated:
            rot = complex(math.cos(math.pi / 4), math.sin(math.pi / 4))
            af = tuple(x * rot for x in af)
            bf = tuple(x * rot for x in bf)
        s = 10 ** (-0.25)
        dev_float = so5_embedding(tuple(x * s for x in af), tuple(x * s for x in bf))
        targets = [8 * s1, 8 * s2, 6 * s3]
        return Preset(
            "deg4_so5",
            signs or "+++",
            dev_float,
            DEGREE4_HALL,
            targets,
            2 * math.sqrt(2) * s,
            5 / 32,
            dev_exact=dev_exact,
            exact_scale=scale,
        )

    if case == "deg4_sharp_c3zero":
        s1, s2 = _parse_signs(signs or "++", 2)
        if s1 * s2 > 0:
            mats = [_SL4_SHARP_A, _SL4_SHARP_B]
            phases = (1.0, 1.0)
        else:
            phases = (np.exp(5j * math.pi / 8), np.exp(1j * math.pi / 8))
            mats = [
                mat_scale(_SL4_SHARP_A, phases[0]),
                mat_scale(_SL4_SHARP_B, phases[1]),
            ]
        if s1 < 0:
            # rotate both letters by e^{i pi/4}: flips both degree-4 targets
            rot = np.exp(1j * math.pi / 4)
            mats = [mat_scale(m, rot) for m in mats]
        dev = Development(mats, "l1", kind="sl4_sharp", meta={"m": 4, "blocks": 1})
        exact_dev = dev if s1 > 0 and s2 > 0 else None
        return Preset(
            "deg4_sharp_c3zero",
            signs or "++",
            dev,
            DEGREE4_HALL,
            [8 * s1, 8 * s2, None],
            1.0,
            1.0,
            dev_exact=exact_dev,
            exact_scale=Fraction(1) if exact_dev else None,
        )

    raise ValueError(f"unknown preset case {case!r}; choose from {PRESET_CASES}")


# -- growth curves and perturbation ---------------------------------------------


@dataclass
class GrowthCurve:
    lambdas: list[float]
    values: list[float]
    series_norms: list[float]
    expm_norms: list[float]
    agreements: list[float]
    trunc_used: list[int]


def _log_expm_norm(a: np.ndarray, w_norm: str) -> float:
    """log ||exp(a)|| without overflow, by scaling, squaring and renormalizing."""
    na = float(matrix_norm(a, w_norm))
    s = max(0, math.ceil(math.log2(na / 0.5))) if na > 0.5 else 0
    e = scipy.linalg.expm(a / 2**s)
    logscale = 0.0
    for _ in range(s):
        nm = float(matrix_norm(e, w_norm))
        e = e / nm
        logscale = 2.0 * (logscale + math.log(nm))
        e = e @ e
    return logscale + math.log(float(matrix_norm(e, w_norm)))


def _graded_matrix_exp(parts: dict[int, np.ndarray], size: int, trunc: int) -> list[np.ndarray]:
    """Degree components of exp(sum_r t^r A_r) as polynomials in t, cut at trunc."""
    ident = np.eye(size, dtype=complex)
    acc = [ident] + [np.zeros((size, size), dtype=complex) for _ in range(trunc)]
    for k in range(trunc, 0, -1):
        nxt = [np.zeros((size, size), dtype=complex) for _ in range(trunc + 1)]
        nxt[0] = ident.copy()
        for r, a in parts.items():
            for n in range(trunc + 1 - r):
                nxt[n + r] += (a / k) @ acc[n]
        acc = nxt
    return acc


def growth_curve(
    dev: Development,
    l,
    m: int,
    lambdas: list[float],
    trunc: int = 40,
    tol: float = 1e-8,
    auto_extend: bool = True,
    series_limit: float = 300.0,
    require_agreement: bool = True,
) -> GrowthCurve:
    """log ||Gamma_1^lambda|| / (lambda ||Phi||)^m over a lambda grid.

    Gamma_1^lambda is evaluated twice, as the degree-truncated series
    sum_n lambda^n Phi(X^n) and as exp(Phi(delta_lambda l)); a relative
    disagreement above tol signals insufficient truncation (raised unless
    auto_extend lets the series grow).  Above ``series_limit`` the float
    range rules out the series evaluation; with ``require_agreement`` off
    the value then comes from a scaled matrix exponential alone and the
    agreement is reported as nan.
    """
    x = as_tensor(l)
    op = float(operator_norm(dev))
    parts0 = {
        r: mat_to_numpy(apply_tensor(dev, project(x, r))) for r in x.degrees() if r > 0
    }
    size = dev.size
    out = GrowthCurve([], [], [], [], [], [])
    for lam in lambdas:
        parts = {r: (lam**r) * a for r, a in parts0.items()}
        total = sum(parts.values()) if parts else np.zeros((size, size), dtype=complex)
        arg_norm = float(matrix_norm(total, dev.w_norm))
        if arg_norm > series_limit:
            if require_agreement:
                raise ValueError(
                    f"argument norm {arg_norm:.1f} at lambda={lam} exceeds the dual-"
                    f"evaluation range {series_limit}; shrink lambda or l"
                )
            log_gnorm = _log_expm_norm(total, dev.w_norm)
            agreement, n, series_norm = math.nan, 0, math.nan
        else:
            gamma_exp = scipy.linalg.expm(total)
            n = trunc
            while True:
                comps = _graded_matrix_exp(parts, size, n)
                gamma_series = sum(comps)
                denom = max(1.0, float(matrix_norm(gamma_exp, dev.w_norm)))
                agreement = float(np.abs(gamma_series - gamma_exp).max()) / denom
                if agreement <= tol or not auto_extend:
                    break
                n = max(n + 8, int(n * 1.5))
                if n > 100_000:
                    raise ValueError("series does not stabilize; argument norm too large")
            if agreement > tol:
                raise ValueError(
                    f"series/exponential disagreement {agreement:.2e} at lambda={lam}; "
                    f"increase the truncation degree (argument norm {arg_norm:.2f})"
                )
            log_gnorm = math.log(float(matrix_norm(gamma_exp, dev.w_norm)))
            series_norm = float(matrix_norm(gamma_series, dev.w_norm))
        value = log_gnorm / (lam * op) ** m if lam > 0 and op > 0 else 0.0
        out.lambdas.append(lam)
        out.values.append(value)
        out.series_norms.append(series_norm)
        out.expm_norms.append(math.exp(min(log_gnorm, 700.0)))
        out.agreements.append(agreement)
        out.trunc_used.append(n)
    return out


@dataclass
class PerturbationTrack:
    lambdas: list[float]
    base_eigenvalues: np.ndarray
    matched: list[np.ndarray]
    distances: list[float]


def perturbation_track(dev: Development, l, m: int, lambdas: list[float]) -> PerturbationTrack:
    """Eigenvalues of T(lambda) = Phi(l_m) + Phi(l_{m-1})/lambda + ... vs Phi(l_m).

    Each eigenvalue of T(lambda) is matched greedily to the nearest remaining
    eigenvalue of Phi(l_m) (ties by index order); the reported distance is the
    largest matched gap.
    """
    x = as_tensor(l)
    lm = project(x, m)
    if lm.is_zero():
        raise ValueError(f"declared roughness {m} but pi_{m}(l) = 0")
    parts = {r: mat_to_numpy(apply_tensor(dev, project(x, r))) for r in x.degrees() if r > 0}
    base = np.sort_complex(np.linalg.eigvals(parts[m]))
    track = PerturbationTrack([], base, [], [])
    for lam in lambdas:
        if lam <= 0:
            raise ValueError("lambda grid must be positive")
        t = sum(a * lam ** (r - m) for r, a in parts.items())
        eigs = list(np.linalg.eigvals(t))
        matched = np.empty(len(base), dtype=complex)
        remaining = list(enumerate(eigs))
        for i, mu in enumerate(base):
            j_best = min(range(len(remaining)), key=lambda j: abs(remaining[j][1] - mu))
            matched[i] = remaining.pop(j_best)[1]
        dist = float(np.abs(matched - base).max()) if len(base) else 0.0
        track.lambdas.append(lam)
        track.matched.append(matched)
        track.distances.append(dist)
    return track


def exterior_power_rep(m: np.ndarray, k: int) -> np.ndarray:
    """Matrix of the induced derivation on the k-th exterior power.

    Basis: k-element index subsets in lexicographic order.  The action on a
    wedge replaces one factor at a time, matching the Leibniz action on
    tensors pushed down to the alternating quotient.
    """
    m = np.asarray(m, dtype=complex)
    n = m.shape[0]
    if m.shape != (n, n):
        raise ValueError("matrix must be square")
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in 1..{n}")
    basis = list(itertools.combinations(range(n), k))
    index = {s: i for i, s in enumerate(basis)}
    out = np.zeros((len(basis), len(basis)), dtype=complex)
    for col, s in enumerate(basis):
        sset = set(s)
        for pos, j in enumerate(s):
            for i in range(n):
                if m[i, j] == 0:
                    continue
                if i == j:
                    out[col, col] += m[i, j]
                elif i not in sset:
                    replaced = [v for v in s if v != j]
                    q = sum(1 for v in replaced if v < i)
                    replaced.insert(q, i)
                    sign = -1 if (pos - q) % 2 else 1
                    out[index[tuple(replaced)], col] += sign * m[i, j]
    return out


@dataclass
class CartanReport:
    trees: list[Bracket]
    residuals: list[float]
    exact_zero: list[bool]

    @property
    def max_residual(self) -> float:
        return max(self.residuals, default=0.0)


def cartan_check(dev: Development, trees, cartan_span: list | None = None) -> CartanReport:
    """Residual of each Phi(h) off the Cartan span (off-diagonal part if no span given).

    With exact matrices the residual is decided exactly; the float value is
    reported alongside.
    """
    report = CartanReport(list(trees), [], [])
    for t in trees:
        p = apply_tensor(dev, expand_bracket(t, dev.dim))
        if cartan_span is None:
            resid = [
                p[i][j] for i in range(len(p)) for j in range(len(p)) if i != j
            ]
            rmat = None
        else:
            coeffs = _project_span(p, cartan_span)
            rebuilt = mat_zeros(dev.size, exact=_entry_is_exact(p[0][0]))
            for c, basis_mat in zip(coeffs, cartan_span):
                bm = basis_mat if not isinstance(basis_mat, np.ndarray) else _mat(basis_mat.tolist())
                rebuilt = mat_add(rebuilt, mat_scale(bm, c))
            rmat = mat_sub(p, rebuilt)
            resid = [x for row in rmat for x in row]
        float_resid = max((abs(complex(x)) for x in resid), default=0.0)
        is_exact = all(_entry_is_exact(x) for x in resid)
        report.residuals.append(float_resid)
        report.exact_zero.append(is_exact and all(x == 0 for x in resid))
    return report


def _project_span(p: tuple, span: list) -> list:
    """Least-squares coefficients of p on the span, exact when possible."""
    span_t = [s if not isinstance(s, np.ndarray) else _mat(s.tolist()) for s in span]
    exact = all(_entry_is_exact(x) for row in p for x in row) and all(
        _entry_is_exact(x) for s in span_t for row in s for x in row
    )
    if exact:

        def inner(a, b):
            total = 0
            for ra, rb in zip(a, b):
                for x, y in zip(ra, rb):
                    yy = y.conjugate() if isinstance(y, GaussianRational) else y
                    total = total + x * yy
            return total

        gram = [[inner(sj, si) for sj in span_t] for si in span_t]
        rhs = [inner(p, si) for si in span_t]
        sol = solve_exact(gram, rhs)
        if sol is None:
            raise ValueError("Cartan span matrices are linearly dependent")
        return sol
    a = np.stack([mat_to_numpy(s).ravel() for s in span_t], axis=1)
    sol, *_ = np.linalg.lstsq(a, mat_to_numpy(p).ravel(), rcond=None)
    return list(sol)


def separate_points(
    l: LiePoly,
    lp: LiePoly,
    seed: int = 0,
    tol: float = 1e-9,
    restarts: int = 64,
) -> tuple[Development, float]:
    """Find a development and scale epsilon with Phi_eps(exp l) != Phi_eps(exp l').

    Targets a sign functional of the lowest-degree difference through the
    block polynomial system, then scans epsilon downward over powers of two
    until both the Lie images and their exponentials separate at tolerance.
    """
    from . import polysys
    from .tensor import l1_dual_witness, pairing

    if l.dim != lp.dim:
        raise ValueError("dimension mismatch")
    diff = l - lp
    if diff.is_zero():
        raise ValueError("the two Lie polynomials are equal")
    m = min(diff.coeffs)
    delta = diff.homogeneous_part(m).to_tensor(m)
    witness = l1_dual_witness(delta)
    d = l.dim
    targets = [
        complex(pairing(witness, expand_bracket(t, d))) for t in hall_basis(d, m)
    ]
    polys = polysys.polys_from_hall(d, m)
    result = polysys.solve_targets(polys, targets, m, d, seed=seed, restarts=restarts)
    dev = result.development()
    nmax = max(l.max_degree, lp.max_degree)
    xl, xlp = l.to_tensor(nmax), lp.to_tensor(nmax)
    for j in range(0, 41):
        eps = 2.0**-j
        dev_eps = dev.scale(eps).to_float()
        pl = mat_to_numpy(apply_tensor(dev_eps, xl.to_float()))
        plp = mat_to_numpy(apply_tensor(dev_eps, xlp.to_float()))
        if np.abs(pl - plp).max() <= tol:
            continue
        el = scipy.linalg.expm(pl)
        elp = scipy.linalg.expm(plp)
        if np.abs(el - elp).max() > tol:
            return dev_eps, eps
    raise ValueError("no separating scale found down to 2^-40")
